//! The S-Oja-Brockett flow `dX/dt = A X B - X B X^T S A X`, its potential
//! and metric, and Euler integrators with fixed or line-searched steps.
//!
//! With `S A` symmetric the flow is the negative gradient of
//! `g(X) = 1/4 tr[(S A X B X^T)^2] - 1/2 tr(S A^2 X B^2 X^T)` under the
//! metric `<W1, W2> = tr(S A W1 B W2^T)`.

mod integrate;
mod linesearch;
mod report;

pub use integrate::{
    integrate, is_full_rank, FlowState, IntegrateConfig, Snapshot, StepMode, StepRecord, StopReason, Trajectory,
};
pub use linesearch::{
    cubic_audit, optimal_gamma, potential_change, smallest_positive_root, AuditSample, CubicCoefficients, LineSearch,
};
pub use report::{eigenpair_rows, eigenpairs_at, extract_eigenpairs, trajectory_csv, trajectory_csv_header, Eigenpair};

use crate::certify::sylvester_residual;
use crate::eigh::{spd_inv_sqrt, spd_sqrt, SYMMETRY_TOL};
use crate::error::{Error, Result};
use crate::matrix::{rel_tol, DenseMatrix};

/// Relative bound on `||A^T S - S A||_F` accepted by [`FlowProblem::new`].
pub const SYLVESTER_TOL: f64 = 1e-9;

/// Fixed data of one flow: `A` (`N x N`), positive weights `B = diag(b)`
/// (`M <= N`), and an SPD symmetrizer `S` of `A`.
#[derive(Debug, Clone)]
pub struct FlowProblem {
    a: DenseMatrix,
    b: Vec<f64>,
    s: DenseMatrix,
    sqrt_s: DenseMatrix,
    sqrt_s_inv: DenseMatrix,
    sa: DenseMatrix,
    sa2: DenseMatrix,
    a_norm: f64,
}

impl FlowProblem {
    pub fn new(a: DenseMatrix, b: Vec<f64>, s: DenseMatrix) -> Result<Self> {
        let n = a.rows();
        if !a.is_square() || s.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "A is {:?}, S is {:?}",
                a.shape(),
                s.shape()
            )));
        }
        if b.is_empty() || b.len() > n {
            return Err(Error::DimensionMismatch(format!(
                "B must have between 1 and {} entries, got {}",
                n,
                b.len()
            )));
        }
        if let Some(k) = b.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::NonPositive { index: k, value: b[k] });
        }
        s.check_symmetric(SYMMETRY_TOL)?;
        let a_norm = a.frobenius_norm();
        let residual = sylvester_residual(&a, &s)?;
        let tolerance = rel_tol(SYLVESTER_TOL, a_norm);
        if residual > tolerance {
            return Err(Error::ResidualTooLarge {
                residual,
                tolerance,
            });
        }
        let s = s.symmetric_part();
        let sqrt_s = spd_sqrt(&s)?;
        let sqrt_s_inv = spd_inv_sqrt(&s)?;
        let sa = (&s * &a).symmetric_part();
        let sa2 = (&sa * &a).symmetric_part();
        Ok(Self {
            a,
            b,
            s,
            sqrt_s,
            sqrt_s_inv,
            sa,
            sa2,
            a_norm,
        })
    }

    /// Errors unless `b_1 > b_2 > ... > b_M`, the ordering under which the
    /// limit of `diag(L)` is sorted descending.
    pub fn require_sorting_weights(&self) -> Result<()> {
        if let Some(index) = self.b.windows(2).position(|w| !(w[0] > w[1])) {
            return Err(Error::NotSorted { index });
        }
        Ok(())
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn s(&self) -> &DenseMatrix {
        &self.s
    }

    pub fn sqrt_s(&self) -> &DenseMatrix {
        &self.sqrt_s
    }

    pub fn sqrt_s_inv(&self) -> &DenseMatrix {
        &self.sqrt_s_inv
    }

    /// `S A`, symmetric.
    pub fn sa(&self) -> &DenseMatrix {
        &self.sa
    }

    /// `S A^2`, symmetric.
    pub fn sa2(&self) -> &DenseMatrix {
        &self.sa2
    }

    pub fn a_norm(&self) -> f64 {
        self.a_norm
    }

    /// `N`.
    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    /// `M`.
    pub fn width(&self) -> usize {
        self.b.len()
    }

    /// `sqrt(S) A sqrt(S)^{-1}`, symmetrized.
    pub fn symmetrized_a(&self) -> DenseMatrix {
        (&(&self.sqrt_s * &self.a) * &self.sqrt_s_inv).symmetric_part()
    }

    pub(crate) fn check_shape(&self, x: &DenseMatrix) -> Result<()> {
        if x.shape() != (self.dim(), self.width()) {
            return Err(Error::DimensionMismatch(format!(
                "expected {}x{} state, got {}x{}",
                self.dim(),
                self.width(),
                x.rows(),
                x.cols()
            )));
        }
        Ok(())
    }

    /// `L = X^T S A X`.
    pub fn l_matrix(&self, x: &DenseMatrix) -> DenseMatrix {
        (&x.transpose() * &(&self.sa * x)).symmetric_part()
    }

    pub(crate) fn field_unchecked(&self, x: &DenseMatrix) -> DenseMatrix {
        let axb = (&self.a * x).scale_columns(&self.b);
        let xb = x.scale_columns(&self.b);
        &axb - &(&xb * &self.l_matrix(x))
    }

    pub(crate) fn potential_unchecked(&self, x: &DenseMatrix) -> f64 {
        // tr[(S A X B X^T)^2] = tr[(L B)^2], tr(S A^2 X B^2 X^T) = sum b_i^2 (X^T S A^2 X)_ii
        let lb = self.l_matrix(x).scale_columns(&self.b);
        let quartic = lb.trace_of_product(&lb);
        let k = &x.transpose() * &(&self.sa2 * x);
        let quadratic: f64 = self.b.iter().enumerate().map(|(i, bi)| bi * bi * k[(i, i)]).sum();
        0.25 * quartic - 0.5 * quadratic
    }

    pub(crate) fn metric_unchecked(&self, w1: &DenseMatrix, w2: &DenseMatrix) -> f64 {
        let left = (&self.sa * w1).scale_columns(&self.b);
        left.as_slice().iter().zip(w2.as_slice()).map(|(a, b)| a * b).sum()
    }
}

/// `A X B - X B X^T S A X`.
pub fn vector_field(problem: &FlowProblem, x: &DenseMatrix) -> Result<DenseMatrix> {
    problem.check_shape(x)?;
    Ok(problem.field_unchecked(x))
}

/// `g(X) = 1/4 tr[(S A X B X^T)^2] - 1/2 tr(S A^2 X B^2 X^T)`.
pub fn potential(problem: &FlowProblem, x: &DenseMatrix) -> Result<f64> {
    problem.check_shape(x)?;
    Ok(problem.potential_unchecked(x))
}

/// `tr(S A W1 B W2^T)`.
pub fn metric_inner(problem: &FlowProblem, w1: &DenseMatrix, w2: &DenseMatrix) -> Result<f64> {
    problem.check_shape(w1)?;
    problem.check_shape(w2)?;
    Ok(problem.metric_unchecked(w1, w2))
}

/// `X + gamma V(X)`.
pub fn euler_step_fixed(problem: &FlowProblem, x: &DenseMatrix, gamma: f64) -> Result<DenseMatrix> {
    let v = vector_field(problem, x)?;
    Ok(x.axpy(gamma, &v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn ex1() -> FlowProblem {
        FlowProblem::new(presets::ex1_a(), vec![3.0, 2.0, 1.0], presets::ex1_s()).unwrap()
    }

    /// `A X B - X B X^T S A X` evaluated with explicit loops over the full
    /// `N x N` products, sharing nothing with the library path.
    fn field_by_loops(a: &DenseMatrix, b: &[f64], s: &DenseMatrix, x: &DenseMatrix) -> DenseMatrix {
        let (n, m) = x.shape();
        let mut sa = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    sa[i][j] += s[(i, k)] * a[(k, j)];
                }
            }
        }
        let mut out = DenseMatrix::zeros(n, m);
        for i in 0..n {
            for j in 0..m {
                let mut first = 0.0;
                for k in 0..n {
                    first += a[(i, k)] * x[(k, j)];
                }
                first *= b[j];
                let mut second = 0.0;
                for p in 0..m {
                    // (X B)_{ip} (X^T S A X)_{pj}
                    let mut l = 0.0;
                    for q in 0..n {
                        for r in 0..n {
                            l += x[(q, p)] * sa[q][r] * x[(r, j)];
                        }
                    }
                    second += x[(i, p)] * b[p] * l;
                }
                out[(i, j)] = first - second;
            }
        }
        out
    }

    #[test]
    fn zero_state() {
        let p = ex1();
        let z = DenseMatrix::zeros(3, 3);
        assert_eq!(vector_field(&p, &z).unwrap(), z);
        assert_eq!(potential(&p, &z).unwrap(), 0.0);
        assert_eq!(metric_inner(&p, &z, &z).unwrap(), 0.0);
    }

    #[test]
    fn first_euler_step_matches_loop_evaluation() {
        let p = ex1();
        let x1 = presets::ex1_x1();
        let v = vector_field(&p, &x1).unwrap();
        let v_ref = field_by_loops(p.a(), p.b(), p.s(), &x1);
        assert!((&v - &v_ref).frobenius_norm() <= 1e-12 * v_ref.frobenius_norm());
        let x2 = euler_step_fixed(&p, &x1, 0.01).unwrap();
        let x2_ref = x1.axpy(0.01, &v_ref);
        assert!((&x2 - &x2_ref).frobenius_norm() <= 1e-13 * x2_ref.frobenius_norm());
        assert_eq!(euler_step_fixed(&p, &x1, 0.0).unwrap(), x1);
    }

    #[test]
    fn saddle_first_step() {
        let p = FlowProblem::new(presets::saddle_a(), vec![3.0, 2.0, 1.0], presets::saddle_s_half()).unwrap();
        let x1 = presets::saddle_x1_b3();
        let v_ref = field_by_loops(p.a(), p.b(), p.s(), &x1);
        let x2 = euler_step_fixed(&p, &x1, 0.001).unwrap();
        assert!((&x2 - &x1.axpy(0.001, &v_ref)).frobenius_norm() <= 1e-13 * x1.frobenius_norm());
    }

    #[test]
    fn equilibrium_at_scaled_eigenvectors() {
        // A symmetric: eigenvectors with X^T X = I make L diagonal
        let a = DenseMatrix::from_rows(&[[4.0, 1.0, 0.0], [1.0, 3.0, 0.5], [0.0, 0.5, 1.0]]).unwrap();
        let eig = crate::eigh::jacobi_eigh(&a).unwrap();
        let p = FlowProblem::new(a, vec![2.0, 1.0], DenseMatrix::identity(3)).unwrap();
        let x = eig.eigenvectors.block(0, 0, 3, 2);
        assert!(vector_field(&p, &x).unwrap().frobenius_norm() < 1e-14);
    }

    #[test]
    fn oja_special_case_potential() {
        let p = FlowProblem::new(DenseMatrix::identity(3), vec![1.0], DenseMatrix::identity(3)).unwrap();
        let x = DenseMatrix::from_rows(&[[0.6], [0.0], [0.8]]).unwrap();
        // |x| = 1: 1/4 - 1/2
        assert!((potential(&p, &x).unwrap() + 0.25).abs() < 1e-15);
        let y = x.scale(2.0);
        // |x|^2 = 4: 1/4 * 16 - 1/2 * 4
        assert!((potential(&p, &y).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn metric_reduces_to_frobenius() {
        let p = FlowProblem::new(DenseMatrix::identity(2), vec![1.0, 1.0], DenseMatrix::identity(2)).unwrap();
        let w1 = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let w2 = DenseMatrix::from_rows(&[[0.5, -1.0], [2.0, 0.25]]).unwrap();
        let expected = 0.5 - 2.0 + 6.0 + 1.0;
        assert_eq!(metric_inner(&p, &w1, &w2).unwrap(), expected);
    }

    #[test]
    fn shape_and_input_errors() {
        let p = ex1();
        assert!(vector_field(&p, &DenseMatrix::zeros(3, 2)).is_err());
        assert!(FlowProblem::new(presets::ex1_a(), vec![1.0], DenseMatrix::identity(3)).is_err());
        assert!(FlowProblem::new(presets::ex1_a(), vec![1.0, -1.0], presets::ex1_s()).is_err());
        assert!(FlowProblem::new(presets::ex1_a(), vec![1.0; 4], presets::ex1_s()).is_err());
        let unsorted = FlowProblem::new(presets::ex1_a(), vec![1.0, 2.0], presets::ex1_s()).unwrap();
        assert!(unsorted.require_sorting_weights().is_err());
        assert!(ex1().require_sorting_weights().is_ok());
    }

    #[test]
    fn symmetrized_matrix_is_similar() {
        let p = ex1();
        let at = p.symmetrized_a();
        let eig = crate::eigh::jacobi_eigh(&at).unwrap();
        for (got, want) in eig.eigenvalues.iter().zip(presets::EX1_EIGENVALUES) {
            assert!((got - want).abs() < 1e-12);
        }
    }
}
