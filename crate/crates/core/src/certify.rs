//! Residual checks for coefficient/symmetrizer pairs.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// `||A^T S - S A||_F`.
pub fn sylvester_residual(a: &DenseMatrix, s: &DenseMatrix) -> Result<f64> {
    if !a.is_square() || a.shape() != s.shape() {
        return Err(Error::DimensionMismatch(format!(
            "sylvester residual needs equal square shapes, got {:?} and {:?}",
            a.shape(),
            s.shape()
        )));
    }
    let at_s = &a.transpose() * s;
    let s_a = s * a;
    Ok((&at_s - &s_a).frobenius_norm())
}

/// Largest symplectic pairing `|(X^T Y - Y^T X)_ij|` between columns of
/// the stacked frame `(X; Y)`. Zero exactly when the frame spans a
/// Lagrangian subspace.
pub fn lagrangian_frame_check(x: &DenseMatrix, y: &DenseMatrix) -> Result<f64> {
    if !x.is_square() || x.shape() != y.shape() {
        return Err(Error::DimensionMismatch(format!(
            "frame blocks must be equal square shapes, got {:?} and {:?}",
            x.shape(),
            y.shape()
        )));
    }
    let xty = &x.transpose() * y;
    Ok((&xty - &xty.transpose()).max_abs())
}
