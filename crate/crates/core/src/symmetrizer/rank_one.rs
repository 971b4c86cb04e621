use super::DiagonalSymmetrizer;
use crate::certify::sylvester_residual;
use crate::error::{Error, Result};
use crate::matrix::{rel_tol, DenseMatrix};

const RESIDUAL_TOL: f64 = 1e-12;
/// Distance to a pole below which the expanded polynomial is evaluated.
const POLE_GUARD: f64 = 1e-8;

fn check_lengths(d: &[f64], a: &[f64], b: &[f64]) -> Result<()> {
    if d.len() != a.len() || d.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "d, a, b have lengths {}, {}, {}",
            d.len(),
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// `diag(d) + a b^T`.
pub fn rank_one_matrix(d: &[f64], a: &[f64], b: &[f64]) -> Result<DenseMatrix> {
    check_lengths(d, a, b)?;
    let n = d.len();
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = a[i] * b[j];
        }
        m[(i, i)] += d[i];
    }
    Ok(m)
}

/// Validates the hypotheses `0 < d_1 < ... < d_n` ordering and
/// `a_i b_i > 0`.
pub(crate) fn check_hypotheses(d: &[f64], a: &[f64], b: &[f64]) -> Result<()> {
    check_lengths(d, a, b)?;
    for i in 0..d.len() {
        if !(a[i] * b[i] > 0.0) {
            return Err(Error::SignViolation {
                row: i,
                col: i,
                lower: a[i],
                upper: b[i],
            });
        }
    }
    if let Some(index) = d.windows(2).position(|w| !(w[0] < w[1])) {
        return Err(Error::NotSorted { index });
    }
    Ok(())
}

/// `S = diag(b_i / a_i)`, which symmetrizes `diag(d) + a b^T`.
pub fn rank_one_symmetrizer(d: &[f64], a: &[f64], b: &[f64]) -> Result<DiagonalSymmetrizer> {
    check_hypotheses(d, a, b)?;
    let s: Vec<f64> = a.iter().zip(b).map(|(ai, bi)| bi / ai).collect();
    let dense = rank_one_matrix(d, a, b)?;
    let residual = sylvester_residual(&dense, &DenseMatrix::from_diag(&s))?;
    let tolerance = rel_tol(RESIDUAL_TOL, dense.frobenius_norm());
    if residual > tolerance {
        return Err(Error::ResidualTooLarge {
            residual,
            tolerance,
        });
    }
    Ok(DiagonalSymmetrizer {
        s,
        residual,
        consistency_violation: 0.0,
    })
}

/// `det(lambda I - diag(d) - a b^T)`.
///
/// Uses `(1 - sum a_i b_i / (lambda - d_i)) prod (lambda - d_i)` away from
/// the poles and the expanded form
/// `prod (lambda - d_i) - sum_i a_i b_i prod_{j != i} (lambda - d_j)` near
/// them, so the function is total.
pub fn char_poly_rank_one(d: &[f64], a: &[f64], b: &[f64], lambda: f64) -> f64 {
    debug_assert!(d.len() == a.len() && d.len() == b.len());
    let near_pole = d
        .iter()
        .any(|&di| (lambda - di).abs() <= POLE_GUARD * di.abs().max(1.0));
    if near_pole {
        return char_poly_expanded(d, a, b, lambda);
    }
    let secular: f64 = 1.0
        - a.iter()
            .zip(b)
            .zip(d)
            .map(|((ai, bi), di)| ai * bi / (lambda - di))
            .sum::<f64>();
    secular * d.iter().map(|di| lambda - di).product::<f64>()
}

pub(crate) fn char_poly_expanded(d: &[f64], a: &[f64], b: &[f64], lambda: f64) -> f64 {
    let n = d.len();
    let full: f64 = d.iter().map(|di| lambda - di).product();
    let correction: f64 = (0..n)
        .map(|i| {
            let rest: f64 = (0..n).filter(|&j| j != i).map(|j| lambda - d[j]).product();
            a[i] * b[i] * rest
        })
        .sum();
    full - correction
}
