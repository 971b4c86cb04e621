use super::linesearch::{cubic_audit, line_search_with_field, AuditSample};
use super::FlowProblem;
use crate::eigh::jacobi_eigh;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Normalized Gram determinant below which `X0` counts as rank deficient.
const RANK_TOL: f64 = 1e-12;
const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepMode {
    Fixed(f64),
    /// Exact line search along the field at every step.
    Variable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrateConfig {
    pub mode: StepMode,
    pub max_iters: usize,
    /// Stop once `||V||_F <= tol_abs + tol_rel * ||A||_F * ||X||_F`.
    pub tol_abs: f64,
    pub tol_rel: f64,
    /// Snapshot every `stride` iterations; the first and last states are
    /// always kept.
    pub stride: usize,
    /// Compare the line-search cubic against finite differences at every
    /// variable step.
    pub audit: bool,
}

impl Default for IntegrateConfig {
    fn default() -> Self {
        Self {
            mode: StepMode::Variable,
            max_iters: 100_000,
            tol_abs: 1e-10,
            tol_rel: 1e-10,
            stride: 100,
            audit: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub iteration: usize,
    /// Step that produced this state (0 for the initial state).
    pub gamma: f64,
    pub potential: f64,
    pub l: DenseMatrix,
    pub offdiag_max: f64,
    pub field_norm: f64,
}

/// One accepted variable step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub iteration: usize,
    pub gamma: f64,
    pub root: f64,
    pub halvings: u32,
    pub potential_before: f64,
    pub potential_after: f64,
    pub predicted_change: f64,
    pub realized_change: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    ResidualSmall,
    MaxIterations,
    /// The line search could not produce a decrease.
    Diverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub x: DenseMatrix,
    pub iteration: usize,
    pub gamma_last: f64,
    pub l: DenseMatrix,
    pub potential: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub final_state: FlowState,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub field_norm: f64,
    /// Variable mode only.
    pub steps: Vec<StepRecord>,
    /// Variable mode with `audit` only; one entry per step.
    pub audits: Vec<Vec<AuditSample>>,
}

impl Trajectory {
    pub fn iterations(&self) -> usize {
        self.final_state.iteration
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.final_state.l.diagonal()
    }

    pub fn offdiag_max(&self) -> f64 {
        offdiag_max(&self.final_state.l)
    }
}

pub(crate) fn offdiag_max(l: &DenseMatrix) -> f64 {
    let m = l.rows();
    let mut out: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                out = out.max(l[(i, j)].abs());
            }
        }
    }
    out
}

/// `det(X^T X) / prod ||x_i||^2`, 1 for orthogonal columns and 0 for
/// dependent ones.
pub(crate) fn normalized_gram_determinant(x: &DenseMatrix) -> Result<f64> {
    let norms: Vec<f64> = (0..x.cols())
        .map(|j| x.column(j).iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    if norms.iter().any(|&n| n == 0.0) {
        return Ok(0.0);
    }
    let inv: Vec<f64> = norms.iter().map(|n| 1.0 / n).collect();
    let xn = x.scale_columns(&inv);
    let gram = (&xn.transpose() * &xn).symmetric_part();
    Ok(jacobi_eigh(&gram)?.eigenvalues.iter().product())
}

/// Full column rank in the sense used for initial states.
pub fn is_full_rank(x: &DenseMatrix) -> bool {
    matches!(normalized_gram_determinant(x), Ok(g) if g > RANK_TOL)
}

fn snapshot(problem: &FlowProblem, x: &DenseMatrix, iteration: usize, gamma: f64, field_norm: f64) -> Snapshot {
    let l = problem.l_matrix(x);
    Snapshot {
        iteration,
        gamma,
        potential: problem.potential_unchecked(x),
        offdiag_max: offdiag_max(&l),
        l,
        field_norm,
    }
}

/// Runs Euler steps from `x0` until the field is small or `max_iters` steps
/// have been taken.
pub fn integrate(problem: &FlowProblem, x0: &DenseMatrix, config: &IntegrateConfig) -> Result<Trajectory> {
    let v0 = super::vector_field(problem, x0)?;
    if let StepMode::Fixed(g) = config.mode {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::NonPositive { index: 0, value: g });
        }
    }
    let gram = normalized_gram_determinant(x0)?;
    if !(gram > RANK_TOL) {
        return Err(Error::NotFullRank(format!(
            "normalized Gram determinant {gram:e} of the initial state"
        )));
    }
    let stride = config.stride.max(1);
    let x0_norm = x0.frobenius_norm();
    let limit = DIVERGENCE_FACTOR * x0_norm;

    let mut x = x0.clone();
    let mut v = v0;
    let mut iteration = 0;
    let mut gamma_last = 0.0;
    let mut steps = Vec::new();
    let mut audits = Vec::new();
    let mut snapshots = Vec::new();
    let mut field_norm = v.frobenius_norm();
    let mut last_snapshot = None;

    let stop_reason = loop {
        let threshold = config.tol_abs + config.tol_rel * problem.a_norm() * x.frobenius_norm();
        if iteration % stride == 0 {
            snapshots.push(snapshot(problem, &x, iteration, gamma_last, field_norm));
            last_snapshot = Some(iteration);
        }
        if field_norm <= threshold {
            break StopReason::ResidualSmall;
        }
        if iteration >= config.max_iters {
            break StopReason::MaxIterations;
        }
        match config.mode {
            StepMode::Fixed(gamma) => {
                x = x.axpy(gamma, &v);
                gamma_last = gamma;
            }
            StepMode::Variable => {
                let search = match line_search_with_field(problem, &x, v, 0.0) {
                    Ok(s) => s,
                    Err(e) => {
                        log::warn!("line search stalled at iteration {iteration}: {e}");
                        break StopReason::Diverged;
                    }
                };
                if config.audit {
                    audits.push(cubic_audit(problem, &x, &search));
                }
                steps.push(StepRecord {
                    iteration,
                    gamma: search.gamma,
                    root: search.root,
                    halvings: search.halvings,
                    potential_before: search.potential_before,
                    potential_after: search.potential_after,
                    predicted_change: search.predicted_change,
                    realized_change: search.realized_change,
                });
                x = search.next;
                gamma_last = search.gamma;
            }
        }
        iteration += 1;
        let norm = x.frobenius_norm();
        if !norm.is_finite() || norm > limit {
            return Err(Error::DivergenceDetected { iteration, norm });
        }
        v = problem.field_unchecked(&x);
        field_norm = v.frobenius_norm();
    };

    if last_snapshot != Some(iteration) {
        snapshots.push(snapshot(problem, &x, iteration, gamma_last, field_norm));
    }
    let l = problem.l_matrix(&x);
    let potential = problem.potential_unchecked(&x);
    Ok(Trajectory {
        snapshots,
        final_state: FlowState {
            x,
            iteration,
            gamma_last,
            l,
            potential,
        },
        converged: stop_reason == StopReason::ResidualSmall,
        stop_reason,
        field_norm,
        steps,
        audits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn ex1() -> FlowProblem {
        FlowProblem::new(presets::ex1_a(), vec![3.0, 2.0, 1.0], presets::ex1_s()).unwrap()
    }

    #[test]
    fn fixed_step_converges_on_example() {
        let p = ex1();
        let cfg = IntegrateConfig {
            mode: StepMode::Fixed(0.01),
            max_iters: 200_000,
            ..Default::default()
        };
        let t = integrate(&p, &presets::ex1_x1(), &cfg).unwrap();
        assert!(t.converged);
        for (got, want) in t.eigenvalues().iter().zip(presets::EX1_EIGENVALUES) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
        assert!(t.offdiag_max() < 1e-6);
        assert!(t.steps.is_empty());
        assert_eq!(t.snapshots[0].iteration, 0);
        assert_eq!(t.snapshots.last().unwrap().iteration, t.iterations());
    }

    #[test]
    fn variable_step_descends_and_converges() {
        let p = ex1();
        let cfg = IntegrateConfig {
            mode: StepMode::Variable,
            audit: true,
            ..Default::default()
        };
        let t = integrate(&p, &presets::ex1_x1(), &cfg).unwrap();
        assert!(t.converged);
        assert_eq!(t.steps.len(), t.iterations());
        assert_eq!(t.audits.len(), t.iterations());
        for s in &t.steps {
            assert!(s.predicted_change < 0.0);
            assert!(s.realized_change < 0.0);
            assert_eq!(s.halvings, 0);
            assert!(s.potential_after <= s.potential_before + 1e-12 * s.potential_before.abs());
        }
        for (got, want) in t.eigenvalues().iter().zip(presets::EX1_EIGENVALUES) {
            assert!((got - want).abs() < 1e-6);
        }
    }

    #[test]
    fn stops_at_max_iterations() {
        let cfg = IntegrateConfig {
            mode: StepMode::Fixed(0.01),
            max_iters: 5,
            stride: 2,
            ..Default::default()
        };
        let t = integrate(&ex1(), &presets::ex1_x1(), &cfg).unwrap();
        assert_eq!(t.stop_reason, StopReason::MaxIterations);
        assert!(!t.converged);
        assert_eq!(t.iterations(), 5);
        let its: Vec<usize> = t.snapshots.iter().map(|s| s.iteration).collect();
        assert_eq!(its, vec![0, 2, 4, 5]);
    }

    #[test]
    fn rejects_rank_deficient_start() {
        let x = DenseMatrix::from_rows(&[[1.0, 2.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert!(matches!(
            integrate(&ex1(), &x, &IntegrateConfig::default()),
            Err(Error::NotFullRank(_))
        ));
    }

    #[test]
    fn large_fixed_step_diverges() {
        let cfg = IntegrateConfig {
            mode: StepMode::Fixed(5.0),
            max_iters: 1000,
            ..Default::default()
        };
        assert!(matches!(
            integrate(&ex1(), &presets::ex1_x1(), &cfg),
            Err(Error::DivergenceDetected { .. })
        ));
    }

    #[test]
    fn gram_determinant() {
        assert!((normalized_gram_determinant(&DenseMatrix::identity(3)).unwrap() - 1.0).abs() < 1e-15);
        let x = DenseMatrix::from_rows(&[[1.0, 1.0], [0.0, 1e-9]]).unwrap();
        assert!(normalized_gram_determinant(&x).unwrap() < RANK_TOL);
    }
}
