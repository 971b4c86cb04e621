use crate::certify::sylvester_residual;
use crate::error::{Error, Result};
use crate::matrix::{rel_tol, DenseMatrix};

const EIGEN_TOL: f64 = 1e-8;

/// `S = V^{-T} Z V^{-1}` for a real eigenbasis `V` of `A` (columns) and a
/// positive diagonal `Z`.
///
/// Any positive `Z` gives a valid symmetrizer, so the result is one member
/// of a family rather than a canonical choice. Each column is checked to be
/// an eigenvector with a positive Rayleigh quotient before `S` is formed,
/// and the Sylvester residual of the result is certified.
pub fn symmetrizer_from_eigenbasis(a: &DenseMatrix, v: &DenseMatrix, z: &[f64]) -> Result<DenseMatrix> {
    let n = a.rows();
    if !a.is_square() || v.shape() != (n, n) || z.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "A {:?}, V {:?}, Z of length {}",
            a.shape(),
            v.shape(),
            z.len()
        )));
    }
    if let Some(k) = z.iter().position(|&zi| !(zi > 0.0)) {
        return Err(Error::NonPositive {
            index: k,
            value: z[k],
        });
    }
    let a_norm = a.frobenius_norm();
    for j in 0..n {
        let col = v.column(j);
        let norm2: f64 = col.iter().map(|x| x * x).sum();
        if norm2 == 0.0 {
            return Err(Error::SingularEigenbasis);
        }
        let av = a.mul_vec(&col);
        let lambda = col.iter().zip(&av).map(|(x, y)| x * y).sum::<f64>() / norm2;
        let residual = av
            .iter()
            .zip(&col)
            .map(|(y, x)| (y - lambda * x).powi(2))
            .sum::<f64>()
            .sqrt();
        let tolerance = rel_tol(EIGEN_TOL, a_norm * norm2.sqrt());
        if residual > tolerance || !(lambda > 0.0) {
            return Err(Error::ResidualTooLarge {
                residual,
                tolerance,
            });
        }
    }
    let v_inv = v.inverse().map_err(|_| Error::SingularEigenbasis)?;
    let s = (&v_inv.transpose().scale_columns(z) * &v_inv).symmetric_part();
    let residual = sylvester_residual(a, &s)?;
    let tolerance = rel_tol(EIGEN_TOL, a_norm * s.frobenius_norm().max(1.0));
    if residual > tolerance {
        return Err(Error::ResidualTooLarge {
            residual,
            tolerance,
        });
    }
    Ok(s)
}
