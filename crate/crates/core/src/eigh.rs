//! Symmetric eigendecomposition by cyclic Jacobi rotations and the SPD
//! square root built on top of it.

use crate::error::{Error, Result};
use crate::matrix::{rel_tol, DenseMatrix};

/// Relative symmetry tolerance accepted by [`jacobi_eigh`].
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Default cap on cyclic sweeps.
pub const DEFAULT_MAX_SWEEPS: usize = 100;
/// Default relative eigenvalue floor for positive definiteness.
pub const PD_TOL: f64 = 1e-12;

/// Eigenvalues sorted descending with orthonormal eigenvectors stored as
/// columns in the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEigenResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DenseMatrix,
}

impl SymEigenResult {
    pub fn min(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::INFINITY)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NEG_INFINITY)
    }

    /// `V diag(f(lambda)) V^T`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        let mapped: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let vd = self.eigenvectors.scale_columns(&mapped);
        &vd * &self.eigenvectors.transpose()
    }
}

/// Symmetric eigendecomposition with the default sweep cap.
pub fn jacobi_eigh(m: &DenseMatrix) -> Result<SymEigenResult> {
    jacobi_eigh_with(m, DEFAULT_MAX_SWEEPS)
}

/// Cyclic Jacobi with a threshold strategy: the first three sweeps only
/// rotate entries above a fraction of the mean off-diagonal mass, later
/// sweeps zero out entries that no longer perturb the diagonal.
pub fn jacobi_eigh_with(m: &DenseMatrix, max_sweeps: usize) -> Result<SymEigenResult> {
    m.check_symmetric(SYMMETRY_TOL)?;
    let n = m.rows();
    let mut a = m.symmetric_part();
    let mut v = DenseMatrix::identity(n);

    let mut converged = n <= 1;
    for sweep in 1..=max_sweeps {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].abs())
            .sum();
        if off == 0.0 {
            converged = true;
            break;
        }
        let thresh = if sweep < 4 {
            0.2 * off / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let g = 100.0 * apq.abs();
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                if sweep > 4 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                if apq.abs() <= thresh || apq == 0.0 {
                    continue;
                }
                let h = aqq - app;
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let t = 1.0 / (theta.abs() + (theta * theta + 1.0).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                rotate(&mut a, &mut v, p, q, t);
            }
        }
        if sweep == max_sweeps {
            return Err(Error::NoConvergence { sweeps: max_sweeps });
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: max_sweeps });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let eigenvalues = order.iter().map(|&i| a[(i, i)]).collect();
    let mut eigenvectors = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            eigenvectors[(k, dst)] = v[(k, src)];
        }
    }
    Ok(SymEigenResult {
        eigenvalues,
        eigenvectors,
    })
}

fn rotate(a: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize, t: f64) {
    let n = a.rows();
    let apq = a[(p, q)];
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        let new_kp = c * akp - s * akq;
        let new_kq = s * akp + c * akq;
        a[(k, p)] = new_kp;
        a[(p, k)] = new_kp;
        a[(k, q)] = new_kq;
        a[(q, k)] = new_kq;
    }
    a[(p, p)] -= t * apq;
    a[(q, q)] += t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Smallest eigenvalue threshold below which a matrix is not treated as
/// positive definite.
pub fn pd_threshold(m: &DenseMatrix) -> f64 {
    rel_tol(PD_TOL, m.frobenius_norm())
}

/// Symmetric positive definite square root `R` with `R R = S`.
pub fn spd_sqrt(s: &DenseMatrix) -> Result<DenseMatrix> {
    let eig = jacobi_eigh(s)?;
    let min = eig.min();
    if min <= pd_threshold(s) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min,
        });
    }
    Ok(eig.reconstruct_with(f64::sqrt).symmetric_part())
}

/// Inverse of the SPD square root, `R^{-1}`.
pub fn spd_inv_sqrt(s: &DenseMatrix) -> Result<DenseMatrix> {
    let eig = jacobi_eigh(s)?;
    let min = eig.min();
    if min <= pd_threshold(s) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min,
        });
    }
    Ok(eig.reconstruct_with(|l| 1.0 / l.sqrt()).symmetric_part())
}

/// True when every eigenvalue exceeds [`pd_threshold`].
pub fn is_positive_definite(m: &DenseMatrix) -> Result<bool> {
    Ok(jacobi_eigh(m)?.min() > pd_threshold(m))
}
