//! Reference spectra used to certify flow results.

use crate::certify::sylvester_residual;
use crate::eigh::{jacobi_eigh, spd_inv_sqrt, spd_sqrt, SYMMETRY_TOL};
use crate::error::{Error, Result};
use crate::matrix::{rel_tol, DenseMatrix};
use crate::symmetrizer::{char_poly_rank_one, rank_one_matrix};

const SYLVESTER_TOL: f64 = 1e-9;
const SYMMETRIZATION_TOL: f64 = 1e-8;
const RESIDUAL_TOL: f64 = 1e-9;
const ROOT_TOL: f64 = 1e-12;
const CROSS_CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    SymmetrizedJacobi,
    CharPolyBisection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSpectrum {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Unit columns with `A v_i = lambda_i v_i`.
    pub eigenvectors_a: DenseMatrix,
    pub method: OracleMethod,
}

impl ReferenceSpectrum {
    pub fn top(&self, m: usize) -> &[f64] {
        &self.eigenvalues[..m.min(self.eigenvalues.len())]
    }
}

fn certify_pairs(a: &DenseMatrix, values: &[f64], vectors: &DenseMatrix) -> Result<()> {
    let tolerance = rel_tol(RESIDUAL_TOL, a.frobenius_norm());
    for (j, &lambda) in values.iter().enumerate() {
        let v = vectors.column(j);
        let residual = a
            .mul_vec(&v)
            .iter()
            .zip(&v)
            .map(|(av, x)| (av - lambda * x).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual > tolerance {
            return Err(Error::ResidualTooLarge {
                residual,
                tolerance,
            });
        }
    }
    Ok(())
}

fn normalize_columns(m: &DenseMatrix) -> DenseMatrix {
    let inv: Vec<f64> = (0..m.cols())
        .map(|j| 1.0 / m.column(j).iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    m.scale_columns(&inv)
}

/// Eigenpairs of `A` from the symmetric matrix `sqrt(S) A sqrt(S)^{-1}`.
pub fn reference_eigenpairs(a: &DenseMatrix, s: &DenseMatrix) -> Result<ReferenceSpectrum> {
    s.check_symmetric(SYMMETRY_TOL)?;
    let a_norm = a.frobenius_norm();
    let residual = sylvester_residual(a, s)?;
    let tolerance = rel_tol(SYLVESTER_TOL, a_norm);
    if residual > tolerance {
        return Err(Error::ResidualTooLarge {
            residual,
            tolerance,
        });
    }
    let s = s.symmetric_part();
    let root = spd_sqrt(&s)?;
    let root_inv = spd_inv_sqrt(&s)?;
    let at = &(&root * a) * &root_inv;
    let asymmetry = at.asymmetry();
    let tolerance = rel_tol(SYMMETRIZATION_TOL, at.frobenius_norm());
    if asymmetry > tolerance {
        return Err(Error::SymmetrizationFailed {
            asymmetry,
            tolerance,
        });
    }
    let eig = jacobi_eigh(&at.symmetric_part())?;
    let vectors = normalize_columns(&(&root_inv * &eig.eigenvectors));
    certify_pairs(a, &eig.eigenvalues, &vectors)?;
    Ok(ReferenceSpectrum {
        eigenvalues: eig.eigenvalues,
        eigenvectors_a: vectors,
        method: OracleMethod::SymmetrizedJacobi,
    })
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::BracketFailure { lo, hi });
    }
    let rising = flo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= ROOT_TOL || mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Eigenvalues of `diag(d) + a b^T` by bisection on the interlacing brackets
/// `(d_i, d_{i+1})` and `(d_n, d_n + sum a_i b_i + 1)`, cross-checked against
/// [`reference_eigenpairs`] with `S = diag(b_i / a_i)`.
pub fn rank_one_roots(d: &[f64], a: &[f64], b: &[f64]) -> Result<ReferenceSpectrum> {
    crate::symmetrizer::check_rank_one_hypotheses(d, a, b)?;
    let n = d.len();
    if n == 0 {
        return Err(Error::DimensionMismatch("empty diagonal".into()));
    }
    let f = |l: f64| char_poly_rank_one(d, a, b, l);
    let mass: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    // brackets end exactly on the poles, where the expanded form is used
    let mut roots = Vec::with_capacity(n);
    for i in 0..n {
        let hi = if i + 1 < n { d[i + 1] } else { d[n - 1] + mass + 1.0 };
        roots.push(bisect(f, d[i], hi)?);
    }
    roots.reverse();

    // eigenvector for lambda is (lambda I - D)^{-1} a
    let columns: Vec<Vec<f64>> = roots
        .iter()
        .map(|&l| d.iter().zip(a).map(|(di, ai)| ai / (l - di)).collect())
        .collect();
    let vectors = normalize_columns(&DenseMatrix::from_columns(&columns)?);
    let dense = rank_one_matrix(d, a, b)?;

    let s: Vec<f64> = a.iter().zip(b).map(|(x, y)| y / x).collect();
    let reference = reference_eigenpairs(&dense, &DenseMatrix::from_diag(&s))?;
    for (r, e) in roots.iter().zip(&reference.eigenvalues) {
        let tolerance = rel_tol(CROSS_CHECK_TOL, r.abs().max(1.0));
        if (r - e).abs() > tolerance {
            return Err(Error::ResidualTooLarge {
                residual: (r - e).abs(),
                tolerance,
            });
        }
    }
    certify_pairs(&dense, &roots, &vectors)?;
    Ok(ReferenceSpectrum {
        eigenvalues: roots,
        eigenvectors_a: vectors,
        method: OracleMethod::CharPolyBisection,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn example_spectrum() {
        let r = reference_eigenpairs(&presets::ex1_a(), &presets::ex1_s()).unwrap();
        assert_eq!(r.method, OracleMethod::SymmetrizedJacobi);
        for (got, want) in r.eigenvalues.iter().zip(presets::EX1_EIGENVALUES) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn saddle_spectrum() {
        let r = reference_eigenpairs(&presets::saddle_a(), &presets::saddle_s_half()).unwrap();
        for (got, want) in r.eigenvalues.iter().zip(presets::SADDLE_EIGENVALUES) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert!((r.eigenvalues[0] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn symmetric_input_matches_jacobi() {
        let a = DenseMatrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let r = reference_eigenpairs(&a, &DenseMatrix::identity(2)).unwrap();
        let e = jacobi_eigh(&a).unwrap();
        assert_eq!(r.eigenvalues, e.eigenvalues);
    }

    #[test]
    fn wrong_symmetrizer_is_rejected() {
        assert!(matches!(
            reference_eigenpairs(&presets::ex1_a(), &DenseMatrix::identity(3)),
            Err(Error::ResidualTooLarge { .. })
        ));
    }

    #[test]
    fn scalar_rank_one() {
        let r = rank_one_roots(&[2.0], &[1.5], &[2.0]).unwrap();
        assert!((r.eigenvalues[0] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn interlacing_three_by_three() {
        let d = [1.0, 2.0, 3.0];
        let r = rank_one_roots(&d, &[1.0; 3], &[1.0; 3]).unwrap();
        let asc: Vec<f64> = r.eigenvalues.iter().rev().copied().collect();
        assert!(1.0 < asc[0] && asc[0] < 2.0);
        assert!(2.0 < asc[1] && asc[1] < 3.0);
        assert!(3.0 < asc[2]);
        // trace bound
        assert!(asc[2] < 3.0 + 3.0);
        let trace: f64 = r.eigenvalues.iter().sum();
        assert!((trace - 9.0).abs() < 1e-10);
    }

    #[test]
    fn hypothesis_violation_is_reported() {
        assert!(rank_one_roots(&[1.0, 2.0], &[1.0, -1.0], &[1.0, 1.0]).is_err());
        assert!(matches!(
            bisect(|x| x * x + 1.0, 0.0, 1.0),
            Err(Error::BracketFailure { .. })
        ));
    }
}
