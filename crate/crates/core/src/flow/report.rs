use super::integrate::Trajectory;
use super::FlowProblem;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::textio::format_value;
use std::fmt::Write;

/// One eigenpair read off a converged state.
///
/// Columns of `X` are eigenvectors of `A`, and columns of `sqrt(S) X` are
/// eigenvectors of the symmetrized matrix; both are reported together with
/// their residuals against `A` and against `sqrt(S) A sqrt(S)^{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    /// `L_ii`.
    pub lambda: f64,
    /// Unit column of `X`.
    pub vector: Vec<f64>,
    /// `||A x - lambda x||_2`.
    pub residual: f64,
    /// Unit column of `sqrt(S) X`.
    pub sqrt_s_vector: Vec<f64>,
    /// `||A y - lambda y||_2` for `y` the unit column of `sqrt(S) X`.
    pub sqrt_s_residual: f64,
    /// `||A~ y - lambda y||_2`.
    pub symmetrized_residual: f64,
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        v
    } else {
        v.into_iter().map(|x| x / n).collect()
    }
}

fn residual(a: &DenseMatrix, v: &[f64], lambda: f64) -> f64 {
    a.mul_vec(v)
        .iter()
        .zip(v)
        .map(|(av, x)| (av - lambda * x).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Eigenpairs of the state `x` without any convergence check.
pub fn eigenpairs_at(problem: &FlowProblem, x: &DenseMatrix) -> Vec<Eigenpair> {
    let l = problem.l_matrix(x);
    let y = problem.sqrt_s() * x;
    let at = problem.symmetrized_a();
    (0..x.cols())
        .map(|i| {
            let lambda = l[(i, i)];
            let vector = unit(x.column(i));
            let sqrt_s_vector = unit(y.column(i));
            Eigenpair {
                lambda,
                residual: residual(problem.a(), &vector, lambda),
                sqrt_s_residual: residual(problem.a(), &sqrt_s_vector, lambda),
                symmetrized_residual: residual(&at, &sqrt_s_vector, lambda),
                vector,
                sqrt_s_vector,
            }
        })
        .collect()
}

pub fn extract_eigenpairs(problem: &FlowProblem, trajectory: &Trajectory) -> Result<Vec<Eigenpair>> {
    if !trajectory.converged {
        return Err(Error::NotConverged);
    }
    Ok(eigenpairs_at(problem, &trajectory.final_state.x))
}

fn l_label(i: usize, j: usize, m: usize) -> String {
    if m < 10 {
        format!("L_{}{}", i + 1, j + 1)
    } else {
        format!("L_{}_{}", i + 1, j + 1)
    }
}

/// `iter,gamma,potential,L_11,...,L_MM,offdiag_max` with all `M^2` entries of
/// `L` in row-major order.
pub fn trajectory_csv_header(m: usize) -> String {
    let mut cols = vec!["iter".to_string(), "gamma".into(), "potential".into()];
    for i in 0..m {
        for j in 0..m {
            cols.push(l_label(i, j, m));
        }
    }
    cols.push("offdiag_max".into());
    cols.join(",")
}

pub fn trajectory_csv(trajectory: &Trajectory) -> String {
    let m = trajectory.final_state.l.rows();
    let mut out = trajectory_csv_header(m);
    out.push('\n');
    for s in &trajectory.snapshots {
        let _ = write!(out, "{},{},{}", s.iteration, format_value(s.gamma), format_value(s.potential));
        for v in s.l.as_slice() {
            out.push(',');
            out.push_str(&format_value(*v));
        }
        let _ = writeln!(out, ",{}", format_value(s.offdiag_max));
    }
    out
}

/// `lambda,residual,components...`, one row per eigenpair.
pub fn eigenpair_rows(pairs: &[Eigenpair]) -> String {
    let mut out = String::new();
    for p in pairs {
        out.push_str(&format_value(p.lambda));
        out.push(',');
        out.push_str(&format_value(p.residual));
        for c in &p.vector {
            out.push(',');
            out.push_str(&format_value(*c));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{integrate, IntegrateConfig};
    use crate::presets;

    #[test]
    fn header_layout() {
        assert_eq!(
            trajectory_csv_header(2),
            "iter,gamma,potential,L_11,L_12,L_21,L_22,offdiag_max"
        );
        assert!(trajectory_csv_header(10).contains("L_10_10"));
    }

    #[test]
    fn equilibrium_pairs_have_rounding_residuals() {
        let a = DenseMatrix::from_rows(&[[4.0, 1.0, 0.0], [1.0, 3.0, 0.5], [0.0, 0.5, 1.0]]).unwrap();
        let eig = crate::eigh::jacobi_eigh(&a).unwrap();
        let p = FlowProblem::new(a, vec![2.0, 1.0], DenseMatrix::identity(3)).unwrap();
        let pairs = eigenpairs_at(&p, &eig.eigenvectors.block(0, 0, 3, 2));
        for (pair, want) in pairs.iter().zip(&eig.eigenvalues) {
            assert!((pair.lambda - want).abs() < 1e-13);
            assert!(pair.residual < 1e-13);
            assert!(pair.symmetrized_residual < 1e-13);
        }
    }

    #[test]
    fn example_eigenpairs_after_convergence() {
        let p = FlowProblem::new(presets::ex1_a(), vec![3.0, 2.0, 1.0], presets::ex1_s()).unwrap();
        let t = integrate(&p, &presets::ex1_x1(), &IntegrateConfig::default()).unwrap();
        let pairs = extract_eigenpairs(&p, &t).unwrap();
        for pair in &pairs {
            assert!(pair.residual <= 1e-6, "{pair:?}");
            assert!(pair.symmetrized_residual <= 1e-6);
        }
        let csv = trajectory_csv(&t);
        assert_eq!(csv.lines().count(), t.snapshots.len() + 1);
        let rows = eigenpair_rows(&pairs);
        assert_eq!(rows.lines().next().unwrap().split(',').count(), 5);
    }

    #[test]
    fn unconverged_is_an_error() {
        let p = FlowProblem::new(presets::ex1_a(), vec![3.0, 2.0, 1.0], presets::ex1_s()).unwrap();
        let cfg = IntegrateConfig {
            max_iters: 1,
            ..Default::default()
        };
        let t = integrate(&p, &presets::ex1_x1(), &cfg).unwrap();
        assert_eq!(extract_eigenpairs(&p, &t), Err(Error::NotConverged));
    }
}
