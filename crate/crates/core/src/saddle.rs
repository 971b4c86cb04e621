//! Saddle-point block matrices `[[P, Q^T], [-Q, R]]`, their scalar-shifted
//! symmetrizers `S_eps = [[P - eps I, Q^T], [Q, eps I - R]]`, and the
//! positive-definiteness certificates for `S_eps`.

use crate::certify::sylvester_residual;
use crate::eigh::{jacobi_eigh, pd_threshold, SYMMETRY_TOL};
use crate::error::{Error, Result};
use crate::matrix::{rel_tol, DenseMatrix};

/// Relative tolerance for the rank certificate on `Q Q^T`.
const RANK_TOL: f64 = 1e-10;
/// Relative tolerance for positive definiteness of the Schur complement.
const SCHUR_TOL: f64 = 1e-10;

/// Validated `(P, Q, R)` with `P` SPD (`n x n`), `Q` of full row rank
/// (`m x n`, `m <= n`) and `R` symmetric PSD (`m x m`).
#[derive(Debug, Clone, PartialEq)]
pub struct SaddlePointBlocks {
    p: DenseMatrix,
    q: DenseMatrix,
    r: DenseMatrix,
}

impl SaddlePointBlocks {
    pub fn new(p: DenseMatrix, q: DenseMatrix, r: DenseMatrix) -> Result<Self> {
        let n = p.rows();
        let m = q.rows();
        if !p.is_square() || q.cols() != n || r.shape() != (m, m) || m > n {
            return Err(Error::BlockShapeMismatch(format!(
                "P {:?}, Q {:?}, R {:?}",
                p.shape(),
                q.shape(),
                r.shape()
            )));
        }
        p.check_symmetric(SYMMETRY_TOL)?;
        r.check_symmetric(SYMMETRY_TOL)?;
        let p_min = jacobi_eigh(&p)?.min();
        if n > 0 && p_min <= pd_threshold(&p) {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: p_min,
            });
        }
        if m > 0 {
            let r_min = jacobi_eigh(&r)?.min();
            if r_min < -rel_tol(SYMMETRY_TOL, r.frobenius_norm()) {
                return Err(Error::NotPositiveDefinite {
                    min_eigenvalue: r_min,
                });
            }
            let gram = jacobi_eigh(&(&q * &q.transpose()))?;
            if !(gram.min() > RANK_TOL * gram.max()) {
                return Err(Error::NotFullRank(format!(
                    "Q Q^T has eigenvalues in [{:e}, {:e}]",
                    gram.min(),
                    gram.max()
                )));
            }
        }
        Ok(Self { p, q, r })
    }

    pub fn p(&self) -> &DenseMatrix {
        &self.p
    }

    pub fn q(&self) -> &DenseMatrix {
        &self.q
    }

    pub fn r(&self) -> &DenseMatrix {
        &self.r
    }

    pub fn n(&self) -> usize {
        self.p.rows()
    }

    pub fn m(&self) -> usize {
        self.q.rows()
    }

    pub fn lambda_min_p(&self) -> f64 {
        jacobi_eigh(&self.p).map(|e| e.min()).unwrap_or(f64::NAN)
    }

    /// Zero when `m = 0`.
    pub fn lambda_max_r(&self) -> f64 {
        if self.m() == 0 {
            return 0.0;
        }
        jacobi_eigh(&self.r).map(|e| e.max()).unwrap_or(f64::NAN)
    }

    /// `sqrt(lambda_max(Q Q^T))`; zero when `m = 0`.
    pub fn sigma_max_q(&self) -> f64 {
        if self.m() == 0 {
            return 0.0;
        }
        let gram = &self.q * &self.q.transpose();
        jacobi_eigh(&gram).map(|e| e.max().max(0.0).sqrt()).unwrap_or(f64::NAN)
    }
}

fn shifted(m: &DenseMatrix, shift: f64) -> DenseMatrix {
    let mut out = m.clone();
    for i in 0..m.rows() {
        out[(i, i)] += shift;
    }
    out
}

/// `[[P, Q^T], [-Q, R]]`.
pub fn assemble_saddle(blocks: &SaddlePointBlocks) -> DenseMatrix {
    assemble_a_delta(blocks, 0.0)
}

/// `[[P + delta I, Q^T], [-Q, delta I + R]]`.
pub fn assemble_a_delta(blocks: &SaddlePointBlocks, delta: f64) -> DenseMatrix {
    let (n, m) = (blocks.n(), blocks.m());
    let mut out = DenseMatrix::zeros(n + m, n + m);
    out.set_block(0, 0, &shifted(&blocks.p, delta));
    out.set_block(0, n, &blocks.q.transpose());
    out.set_block(n, 0, &-&blocks.q);
    out.set_block(n, n, &shifted(&blocks.r, delta));
    out
}

/// `[[P - eps I, Q^T], [Q, eps I - R]]`, symmetric by construction.
pub fn assemble_s_epsilon(blocks: &SaddlePointBlocks, epsilon: f64) -> DenseMatrix {
    let (n, m) = (blocks.n(), blocks.m());
    let mut out = DenseMatrix::zeros(n + m, n + m);
    out.set_block(0, 0, &shifted(&blocks.p, -epsilon));
    out.set_block(0, n, &blocks.q.transpose());
    out.set_block(n, 0, &blocks.q);
    out.set_block(n, n, &shifted(&-&blocks.r, epsilon));
    out
}

/// Range of shifts for which the sufficient conditions certify `S_eps`
/// positive definite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonWindow {
    pub exists: bool,
    pub eps_minus: f64,
    pub eps_plus: f64,
    pub lambda_min_p: f64,
    pub lambda_max_r: f64,
    pub sigma_max_q: f64,
}

impl EpsilonWindow {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.eps_minus + self.eps_plus)
    }

    pub fn width(&self) -> f64 {
        self.eps_plus - self.eps_minus
    }

    pub fn contains(&self, epsilon: f64) -> bool {
        self.exists && self.eps_minus < epsilon && epsilon < self.eps_plus
    }
}

/// The window exists iff `2 sigma_max(Q) <= lambda_min(P) - lambda_max(R)`;
/// its endpoints are the roots of
/// `sigma^2 = (lambda_min(P) - eps)(eps - lambda_max(R))`. When it does not
/// exist both endpoints are set to the midpoint of `lambda_min(P)` and
/// `lambda_max(R)`.
pub fn epsilon_window(blocks: &SaddlePointBlocks) -> EpsilonWindow {
    let lp = blocks.lambda_min_p();
    let lr = blocks.lambda_max_r();
    let sigma = blocks.sigma_max_q();
    let center = 0.5 * (lp + lr);
    let exists = 2.0 * sigma <= lp - lr;
    let half = if exists {
        0.5 * ((lp - 2.0 * sigma - lr) * (lp + 2.0 * sigma - lr)).max(0.0).sqrt()
    } else {
        0.0
    };
    EpsilonWindow {
        exists,
        eps_minus: center - half,
        eps_plus: center + half,
        lambda_min_p: lp,
        lambda_max_r: lr,
        sigma_max_q: sigma,
    }
}

/// Outcome of the positive-definiteness conditions for `S_eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct PdReport {
    pub epsilon: f64,
    /// `P - eps I > 0`.
    pub cond_i: bool,
    /// `eps I - R > 0`.
    pub cond_ii: bool,
    /// `Q (P - eps I)^{-1} Q^T < eps I - R`.
    pub cond_iii: bool,
    /// `lambda_min(P) > eps`.
    pub cond_iv: bool,
    /// `eps > lambda_max(R)`.
    pub cond_v: bool,
    /// `sigma_max(Q)^2 < (lambda_min(P) - eps)(eps - lambda_max(R))`.
    pub cond_vi: bool,
    pub schur_min_eigenvalue: f64,
    pub s_min_eigenvalue: f64,
    /// `P - eps I > 0` and the Schur complement `W_eps > 0`.
    pub pd_via_schur: bool,
    /// Smallest eigenvalue of the assembled `S_eps` is positive.
    pub pd_direct: bool,
}

impl PdReport {
    pub fn verdicts_agree(&self) -> bool {
        self.pd_via_schur == self.pd_direct
    }

    pub fn necessary_and_sufficient(&self) -> bool {
        self.cond_i && self.cond_ii && self.cond_iii
    }

    pub fn sufficient(&self) -> bool {
        self.cond_iv && self.cond_v && self.cond_vi
    }

    pub fn is_positive_definite(&self) -> bool {
        self.pd_direct
    }
}

/// `W_eps = eps I - R - Q (P - eps I)^{-1} Q^T`.
pub fn schur_complement(blocks: &SaddlePointBlocks, epsilon: f64) -> Result<DenseMatrix> {
    let p_shift = shifted(&blocks.p, -epsilon);
    let solved = p_shift.solve(&blocks.q.transpose())?;
    let correction = &blocks.q * &solved;
    Ok((&shifted(&-&blocks.r, epsilon) - &correction).symmetric_part())
}

fn min_eig(m: &DenseMatrix) -> Result<f64> {
    if m.rows() == 0 {
        return Ok(f64::INFINITY);
    }
    Ok(jacobi_eigh(m)?.min())
}

pub fn check_pd_conditions(blocks: &SaddlePointBlocks, epsilon: f64) -> Result<PdReport> {
    let p_eig = jacobi_eigh(blocks.p())?;
    let guard = 1e-12 * blocks.p().frobenius_norm();
    if let Some(&eigenvalue) = p_eig.eigenvalues.iter().find(|&&l| (l - epsilon).abs() < guard) {
        return Err(Error::EpsilonAtEigenvalue {
            epsilon,
            eigenvalue,
        });
    }
    let lp = p_eig.min();
    let lr = blocks.lambda_max_r();
    let sigma = blocks.sigma_max_q();

    let p_shift = shifted(blocks.p(), -epsilon);
    let r_shift = shifted(&-blocks.r(), epsilon);
    let cond_i = min_eig(&p_shift)? > pd_threshold(&p_shift);
    let cond_ii = blocks.m() == 0 || min_eig(&r_shift)? > pd_threshold(&r_shift);

    let w = schur_complement(blocks, epsilon)?;
    let schur_min = min_eig(&w)?;
    let schur_scale = r_shift.frobenius_norm().max(w.frobenius_norm());
    let cond_iii = blocks.m() == 0 || schur_min > rel_tol(SCHUR_TOL, schur_scale);

    let cond_iv = lp - epsilon > 0.0;
    let cond_v = epsilon - lr > 0.0;
    let cond_vi = sigma * sigma < (lp - epsilon) * (epsilon - lr);

    let s = assemble_s_epsilon(blocks, epsilon);
    let s_min = min_eig(&s)?;
    Ok(PdReport {
        epsilon,
        cond_i,
        cond_ii,
        cond_iii,
        cond_iv,
        cond_v,
        cond_vi,
        schur_min_eigenvalue: schur_min,
        s_min_eigenvalue: s_min,
        pd_via_schur: cond_i && cond_iii,
        pd_direct: s_min > pd_threshold(&s),
    })
}

/// The closed-form interval `[lambda_-(eps), lambda_+(eps)]` for the
/// eigenvalues of `S_eps`, next to the extremes found by Jacobi.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalReport {
    pub epsilon: f64,
    pub radicand: f64,
    /// `None` when the radicand is negative.
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub oracle_min: f64,
    pub oracle_max: f64,
    /// Both oracle extremes lie in the closed-form interval.
    pub contained: bool,
}

pub fn eigenvalue_interval(blocks: &SaddlePointBlocks, epsilon: f64) -> Result<IntervalReport> {
    let lp = blocks.lambda_min_p();
    let lr = blocks.lambda_max_r();
    let sigma = blocks.sigma_max_q();
    let cond_iv = lp - epsilon > 0.0;
    let cond_v = epsilon - lr > 0.0;
    let cond_vi = sigma * sigma < (lp - epsilon) * (epsilon - lr);
    if !(cond_iv && cond_v && cond_vi) {
        return Err(Error::ConditionsNotMet(format!(
            "sufficient conditions at eps={}: (iv)={} (v)={} (vi)={}",
            epsilon, cond_iv, cond_v, cond_vi
        )));
    }
    let center = 0.5 * (lp - lr);
    let radicand = (lr + lp).powi(2) + 4.0 * sigma * sigma - 4.0 * epsilon * lp + epsilon * (lr - epsilon);
    let (lower, upper) = if radicand >= 0.0 {
        let h = 0.5 * radicand.sqrt();
        (Some(center - h), Some(center + h))
    } else {
        (None, None)
    };
    let eig = jacobi_eigh(&assemble_s_epsilon(blocks, epsilon))?;
    let (oracle_min, oracle_max) = (eig.min(), eig.max());
    let contained = match (lower, upper) {
        (Some(lo), Some(hi)) => lo <= oracle_min && oracle_max <= hi,
        _ => false,
    };
    if !contained {
        log::info!(
            "closed-form interval {:?}..{:?} does not contain S_eps spectrum [{}, {}]",
            lower,
            upper,
            oracle_min,
            oracle_max
        );
    }
    Ok(IntervalReport {
        epsilon,
        radicand,
        lower,
        upper,
        oracle_min,
        oracle_max,
        contained,
    })
}

/// `||A_delta^T S_eps - S_eps A_delta||_F`.
pub fn perturbed_sylvester_residual(blocks: &SaddlePointBlocks, delta: f64, epsilon: f64) -> Result<f64> {
    let a = assemble_a_delta(blocks, delta);
    let s = assemble_s_epsilon(blocks, epsilon);
    sylvester_residual(&a, &s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigh::spd_sqrt;
    use crate::presets;

    #[test]
    fn assembles_example_matrix() {
        let blocks = presets::saddle_blocks();
        assert_eq!(assemble_saddle(&blocks), presets::saddle_a());
    }

    #[test]
    fn empty_constraint_block() {
        let p = DenseMatrix::from_diag(&[1.0, 2.0]);
        let blocks =
            SaddlePointBlocks::new(p.clone(), DenseMatrix::zeros(0, 2), DenseMatrix::zeros(0, 0)).unwrap();
        assert_eq!(assemble_saddle(&blocks), p);
    }

    #[test]
    fn rejects_rank_deficient_q() {
        let res = SaddlePointBlocks::new(
            DenseMatrix::identity(2).scale(2.0),
            DenseMatrix::zeros(1, 2),
            DenseMatrix::zeros(1, 1),
        );
        assert!(matches!(res, Err(Error::NotFullRank(_))));
        let shape = SaddlePointBlocks::new(
            DenseMatrix::identity(2),
            DenseMatrix::identity(3),
            DenseMatrix::zeros(3, 3),
        );
        assert!(matches!(shape, Err(Error::BlockShapeMismatch(_))));
        let nonsym_r = SaddlePointBlocks::new(
            DenseMatrix::identity(2).scale(3.0),
            DenseMatrix::identity(2),
            DenseMatrix::from_rows(&[[1.0, 0.5], [0.0, 1.0]]).unwrap(),
        );
        assert!(matches!(nonsym_r, Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn s_half_matches_reference_matrix() {
        let s = assemble_s_epsilon(&presets::saddle_blocks(), 0.5);
        assert!((&s - &presets::saddle_s_half()).max_abs() <= 1e-16);
        let r = spd_sqrt(&s).unwrap();
        assert!((&(&r * &r) - &s).frobenius_norm() <= 1e-10 * s.frobenius_norm());
    }

    #[test]
    fn kkt_form_at_zero_shift() {
        let p = DenseMatrix::from_diag(&[2.0, 3.0]);
        let q = DenseMatrix::from_rows(&[[1.0, 1.0]]).unwrap();
        let blocks = SaddlePointBlocks::new(p.clone(), q.clone(), DenseMatrix::zeros(1, 1)).unwrap();
        let s0 = assemble_s_epsilon(&blocks, 0.0);
        let mut kkt = DenseMatrix::zeros(3, 3);
        kkt.set_block(0, 0, &p);
        kkt.set_block(0, 2, &q.transpose());
        kkt.set_block(2, 0, &q);
        assert_eq!(s0, kkt);
    }

    #[test]
    fn saddle_window() {
        let w = epsilon_window(&presets::saddle_blocks());
        assert!(w.exists);
        assert!((w.lambda_min_p - 1.0).abs() < 1e-15);
        assert!((w.lambda_max_r - 0.25).abs() < 1e-15);
        assert!((w.sigma_max_q.powi(2) - 1.0 / 16.0).abs() < 1e-15);
        // 0.625 +- sqrt(0.25 * 1.25) / 2
        let half = 0.5 * (0.25f64 * 1.25).sqrt();
        assert!((w.eps_minus - (0.625 - half)).abs() < 1e-14);
        assert!((w.eps_plus - (0.625 + half)).abs() < 1e-14);
        assert!(w.contains(0.5));
    }

    #[test]
    fn degenerate_window() {
        // lambda_min(P) - lambda_max(R) = 1, sigma = 1/2
        let blocks = SaddlePointBlocks::new(
            DenseMatrix::from_diag(&[1.0, 2.0]),
            DenseMatrix::from_rows(&[[0.5, 0.0]]).unwrap(),
            DenseMatrix::zeros(1, 1),
        )
        .unwrap();
        let w = epsilon_window(&blocks);
        assert!(w.exists);
        assert_eq!(w.eps_minus, 0.5);
        assert_eq!(w.eps_plus, 0.5);
    }

    #[test]
    fn pd_conditions_example() {
        let rep = check_pd_conditions(&presets::saddle_blocks(), 0.5).unwrap();
        assert!(rep.cond_i && rep.cond_ii && rep.cond_iii);
        assert!(rep.cond_iv && rep.cond_v && rep.cond_vi);
        assert!(rep.pd_direct && rep.pd_via_schur);

        let rep = check_pd_conditions(&presets::saddle_blocks(), 0.125).unwrap();
        assert!(!rep.cond_ii && !rep.cond_v);
        assert!(!rep.pd_direct);
        assert!(rep.s_min_eigenvalue < 0.0);
        assert!(rep.verdicts_agree());

        assert!(matches!(
            check_pd_conditions(&presets::saddle_blocks(), 2.0),
            Err(Error::EpsilonAtEigenvalue { .. })
        ));
    }

    #[test]
    fn small_coupling_is_pd() {
        // lambda_min(P) = 2, eps = 1: need sigma^2 < 1
        let blocks = SaddlePointBlocks::new(
            DenseMatrix::from_diag(&[2.0, 4.0]),
            DenseMatrix::from_rows(&[[0.9, 0.1]]).unwrap(),
            DenseMatrix::zeros(1, 1),
        )
        .unwrap();
        let rep = check_pd_conditions(&blocks, 1.0).unwrap();
        assert!(rep.cond_vi && rep.pd_direct && rep.pd_via_schur);
    }

    #[test]
    fn interval_block_diagonal() {
        let blocks = SaddlePointBlocks::new(
            DenseMatrix::from_diag(&[2.0, 3.0]),
            DenseMatrix::from_rows(&[[1e-9, 0.0]]).unwrap(),
            DenseMatrix::zeros(1, 1),
        )
        .unwrap();
        let rep = eigenvalue_interval(&blocks, 0.5).unwrap();
        assert!((rep.oracle_min - 0.5).abs() < 1e-12);
        assert!((rep.oracle_max - 2.5).abs() < 1e-12);
        // radicand = 4 + 0 - 4 + 0.5 * (-0.5) < 0
        assert!(rep.radicand < 0.0);
        assert!(rep.lower.is_none() && !rep.contained);
    }

    #[test]
    fn interval_requires_sufficient_conditions() {
        assert!(matches!(
            eigenvalue_interval(&presets::saddle_blocks(), 0.2),
            Err(Error::ConditionsNotMet(_))
        ));
    }

    #[test]
    fn perturbed_identity_on_example() {
        let r = perturbed_sylvester_residual(&presets::saddle_blocks(), 0.0, 0.5).unwrap();
        assert!(r <= 1e-13);
    }
}
