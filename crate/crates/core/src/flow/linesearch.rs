//! Exact line search along the flow direction.
//!
//! Along `X(t) = X + t V` the potential `phi(t) = g(X(t))` is a quartic, so
//! `phi'(t)` is a cubic `c3 t^3 + c2 t^2 + c1 t + c0`. Writing
//! `P = X^T S A X`, `Q = X^T S A V`, `R = V^T S A V`, `H = Q + Q^T` and
//! `Qk = X^T S A^2 V`, `Rk = V^T S A^2 V`:
//!
//! ```text
//! c3 = tr(R B R B)
//! c2 = 3/2 tr(H B R B)
//! c1 = tr(P B R B) + 1/2 tr(H B H B) - tr(Rk B^2)
//! c0 = tr(P B Q B) - tr(Qk B^2)        (= -<V, V>)
//! ```
//!
//! The step is the smallest positive root of the cubic, which is the first
//! stationary point of `phi` and therefore strictly decreases `g`.

use super::FlowProblem;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

const ROOT_MAX_ITERS: usize = 50;
const ROOT_TOL: f64 = 1e-14;
const MAX_HALVINGS: u32 = 60;
const AUDIT_SPACINGS: i32 = 10;

/// Coefficients of `phi'(t) = c[3] t^3 + c[2] t^2 + c[1] t + c[0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicCoefficients(pub [f64; 4]);

impl CubicCoefficients {
    pub fn eval(&self, t: f64) -> f64 {
        let [c0, c1, c2, c3] = self.0;
        ((c3 * t + c2) * t + c1) * t + c0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let [_, c1, c2, c3] = self.0;
        (3.0 * c3 * t + 2.0 * c2) * t + c1
    }

    /// `phi(t) - phi(0)`, the exact change of the potential along the line.
    pub fn integral(&self, t: f64) -> f64 {
        let [c0, c1, c2, c3] = self.0;
        (((0.25 * c3 * t + c2 / 3.0) * t + 0.5 * c1) * t + c0) * t
    }
}

fn btb(x: &DenseMatrix, y: &DenseMatrix, b: &[f64]) -> f64 {
    // tr(X B Y B)
    x.scale_columns(b).trace_of_product(&y.scale_columns(b))
}

/// Line-search cubic for direction `v` at `x`.
pub(crate) fn cubic_coefficients(problem: &FlowProblem, x: &DenseMatrix, v: &DenseMatrix) -> CubicCoefficients {
    let b = problem.b();
    let b2: Vec<f64> = b.iter().map(|v| v * v).collect();
    let xt = x.transpose();
    let vt = v.transpose();
    let sa_x = problem.sa() * x;
    let sa_v = problem.sa() * v;
    let sa2_v = problem.sa2() * v;
    let p = &xt * &sa_x;
    let q = &xt * &sa_v;
    let r = &vt * &sa_v;
    let h = &q + &q.transpose();
    let qk = &xt * &sa2_v;
    let rk = &vt * &sa2_v;
    let tr_b2 = |m: &DenseMatrix| -> f64 { b2.iter().enumerate().map(|(i, w)| w * m[(i, i)]).sum() };

    let c3 = btb(&r, &r, b);
    let c2 = 1.5 * btb(&h, &r, b);
    let c1 = btb(&p, &r, b) + 0.5 * btb(&h, &h, b) - tr_b2(&rk);
    let c0 = btb(&p, &q, b) - tr_b2(&qk);
    CubicCoefficients([c0, c1, c2, c3])
}

/// Smallest `t > 0` with `c3 t^3 + c2 t^2 + c1 t + c0 = 0`.
///
/// The positive axis is split at the critical points of the cubic into
/// monotone pieces; the first piece with a sign change holds the root,
/// which is found by Newton iteration safeguarded by bisection.
pub fn smallest_positive_root(c: &CubicCoefficients) -> Option<f64> {
    let [c0, c1, c2, c3] = c.0;
    let lead = c3.abs().max(c2.abs()).max(c1.abs());
    if lead == 0.0 {
        return None;
    }
    // Cauchy bound on root magnitude, using the highest nonzero coefficient
    let coeffs = [c0, c1, c2, c3];
    let top = (0..4).rev().find(|&k| coeffs[k] != 0.0)?;
    if top == 0 {
        return None;
    }
    let bound = 1.0 + (0..top).map(|k| (coeffs[k] / coeffs[top]).abs()).fold(0.0, f64::max);

    let mut breaks = vec![0.0];
    let (qa, qb, qc) = (3.0 * c3, 2.0 * c2, c1);
    let mut crit: Vec<f64> = if qa != 0.0 {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let t = -0.5 * (qb + qb.signum() * sq);
            let mut r = Vec::new();
            if t != 0.0 {
                r.push(qc / t);
            }
            r.push(t / qa);
            r
        } else {
            Vec::new()
        }
    } else if qb != 0.0 {
        vec![-qc / qb]
    } else {
        Vec::new()
    };
    crit.retain(|&t| t > 0.0 && t < bound);
    crit.sort_by(f64::total_cmp);
    breaks.extend(crit);
    breaks.push(bound);

    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (flo, fhi) = (c.eval(lo), c.eval(hi));
        if flo == 0.0 && lo > 0.0 {
            return Some(lo);
        }
        if fhi == 0.0 {
            return Some(hi);
        }
        if flo.signum() != fhi.signum() {
            return Some(polish(c, lo, hi, flo));
        }
    }
    None
}

/// Narrows `[lo, hi]` (sign change, `f(lo) = flo`) to a bracket whose ends
/// are within a factor of two of each other, probing outward from `lo` in
/// doubling offsets that start at `first`.
fn shrink_bracket(c: &CubicCoefficients, lo: f64, hi: f64, flo: f64, first: f64) -> (f64, f64) {
    let mut offset = first.max(lo.abs() * f64::EPSILON).max(f64::MIN_POSITIVE);
    let mut left = lo;
    loop {
        let probe = lo + offset;
        if probe >= hi {
            return (left, hi);
        }
        let f = c.eval(probe);
        if f == 0.0 || f.signum() != flo.signum() {
            return (left, probe);
        }
        left = probe;
        offset *= 2.0;
    }
}

fn polish(c: &CubicCoefficients, lo: f64, hi: f64, flo: f64) -> f64 {
    // every root is at least |c0| / (|c0| + max |c_k|) in magnitude
    let [c0, c1, c2, c3] = c.0;
    let lower = c0.abs() / (c0.abs() + c1.abs().max(c2.abs()).max(c3.abs()));
    let (mut lo, mut hi) = shrink_bracket(c, lo, hi, flo, lower);
    let rising = flo < 0.0;
    let mut t = 0.5 * (lo + hi);
    let mut dx_old = hi - lo;
    let mut dx = dx_old;
    let mut f = c.eval(t);
    let mut d = c.derivative(t);
    for _ in 0..ROOT_MAX_ITERS {
        // Newton unless it leaves the bracket or fails to halve the step
        let out = ((t - hi) * d - f) * ((t - lo) * d - f) > 0.0;
        if out || (2.0 * f).abs() > (dx_old * d).abs() {
            dx_old = dx;
            dx = 0.5 * (hi - lo);
            t = lo + dx;
        } else {
            dx_old = dx;
            dx = f / d;
            t -= dx;
        }
        if dx.abs() <= ROOT_TOL * t.abs() {
            break;
        }
        f = c.eval(t);
        d = c.derivative(t);
        if f == 0.0 {
            break;
        }
        if (f < 0.0) == rising {
            lo = t;
        } else {
            hi = t;
        }
    }
    t
}

/// Result of one line search.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSearch {
    /// Accepted step.
    pub gamma: f64,
    /// Smallest positive root of the cubic, before any halving.
    pub root: f64,
    pub coeffs: CubicCoefficients,
    /// Number of halvings needed before a decrease was confirmed.
    pub halvings: u32,
    pub potential_before: f64,
    pub potential_after: f64,
    /// `phi(gamma) - phi(0)` from the exact quartic.
    pub predicted_change: f64,
    /// `g(next) - g(x)` for the rounded state actually stored, see
    /// [`potential_change`].
    pub realized_change: f64,
    pub field: DenseMatrix,
    /// `x + gamma V`.
    pub next: DenseMatrix,
}

/// `g(y) - g(x)` evaluated as the quartic along `D = y - x` at `t = 1`.
///
/// Near a minimizer the change is far below the rounding error of `g`
/// itself; the quartic is built from products involving `D` only, so its
/// accuracy is relative to the size of the change.
pub fn potential_change(problem: &FlowProblem, x: &DenseMatrix, y: &DenseMatrix) -> Result<f64> {
    problem.check_shape(x)?;
    problem.check_shape(y)?;
    Ok(realized_change(problem, x, y))
}

fn realized_change(problem: &FlowProblem, x: &DenseMatrix, y: &DenseMatrix) -> f64 {
    let d = y - x;
    cubic_coefficients(problem, x, &d).integral(1.0)
}

/// Accepts a step when both the quartic along the field and the quartic
/// along the stored increment decrease, and the direct evaluation does not
/// contradict them beyond rounding.
fn decrease_confirmed(predicted: f64, realized: f64, before: f64, after: f64) -> bool {
    let rounding = 8.0 * f64::EPSILON * before.abs().max(after.abs());
    predicted < 0.0 && realized < 0.0 && after <= before + rounding
}

/// Optimal Euler step at `x`. Fails with `ZeroField` when `||V||_F` is below
/// `stop_tol`.
pub fn optimal_gamma(problem: &FlowProblem, x: &DenseMatrix, stop_tol: f64) -> Result<LineSearch> {
    let v = super::vector_field(problem, x)?;
    line_search_with_field(problem, x, v, stop_tol)
}

pub(crate) fn line_search_with_field(
    problem: &FlowProblem,
    x: &DenseMatrix,
    v: DenseMatrix,
    stop_tol: f64,
) -> Result<LineSearch> {
    let norm = v.frobenius_norm();
    if norm < stop_tol || norm == 0.0 {
        return Err(Error::ZeroField { norm });
    }
    let coeffs = cubic_coefficients(problem, x, &v);
    let root = smallest_positive_root(&coeffs).ok_or(Error::BracketFailure {
        lo: 0.0,
        hi: f64::INFINITY,
    })?;
    let before = problem.potential_unchecked(x);
    let mut gamma = root;
    let mut halvings = 0;
    loop {
        let next = x.axpy(gamma, &v);
        let after = problem.potential_unchecked(&next);
        let predicted = coeffs.integral(gamma);
        let realized = realized_change(problem, x, &next);
        if decrease_confirmed(predicted, realized, before, after) {
            if halvings > 0 {
                log::warn!(
                    "line search: root {:e} needed {} halvings (gamma {:e})",
                    root,
                    halvings,
                    gamma
                );
            }
            return Ok(LineSearch {
                gamma,
                root,
                coeffs,
                halvings,
                potential_before: before,
                potential_after: after,
                predicted_change: predicted,
                realized_change: realized,
                field: v,
                next,
            });
        }
        if halvings >= MAX_HALVINGS {
            return Err(Error::BracketFailure { lo: gamma, hi: root });
        }
        gamma *= 0.5;
        halvings += 1;
    }
}

/// One comparison between the analytic `phi'(t)` and a five-point finite
/// difference of `phi(t) = g(X + t V)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditSample {
    pub gamma: f64,
    pub analytic: f64,
    pub finite_difference: f64,
    /// `|fd - analytic| / max(|analytic|, |c0|)`.
    pub rel_error: f64,
    /// A priori rounding bound on the finite difference, relative to the
    /// same scale.
    pub rounding_bound: f64,
}

impl AuditSample {
    /// The finite difference can resolve the derivative to `1e-8` of its
    /// scale.
    pub fn resolvable(&self) -> bool {
        self.rounding_bound <= 1e-8
    }
}

/// Five-point central difference of `phi` at `gamma` with spacing `h` and
/// the a priori rounding bound on it.
fn five_point(phi: &impl Fn(f64) -> f64, gamma: f64, h: f64) -> (f64, f64) {
    let f = [phi(gamma - 2.0 * h), phi(gamma - h), phi(gamma + h), phi(gamma + 2.0 * h)];
    let fd = (f[0] - 8.0 * f[1] + 8.0 * f[2] - f[3]) / (12.0 * h);
    let mass = f[0].abs() + 8.0 * f[1].abs() + 8.0 * f[2].abs() + f[3].abs();
    (fd, 4.0 * f64::EPSILON * mass / (12.0 * h))
}

/// Compares the cubic against finite differences at `0, t/4, t/2, 3t/2, 2t`
/// where `t` is the smallest positive root.
///
/// The five-point stencil is exact for quartics, so only rounding separates
/// it from the true derivative and the spacing is free; it is picked from
/// `t/4 * 4^k` to minimize the rounding bound.
pub fn cubic_audit(problem: &FlowProblem, x: &DenseMatrix, search: &LineSearch) -> Vec<AuditSample> {
    let v = &search.field;
    let phi = |t: f64| problem.potential_unchecked(&x.axpy(t, v));
    let t = search.root;
    let scale_floor = search.coeffs.0[0].abs();
    [0.0, 0.25 * t, 0.5 * t, 1.5 * t, 2.0 * t]
        .into_iter()
        .map(|gamma| {
            let (fd, bound) = (0..AUDIT_SPACINGS)
                .map(|k| five_point(&phi, gamma, 0.25 * t * 4f64.powi(k)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            let analytic = search.coeffs.eval(gamma);
            let scale = analytic.abs().max(scale_floor).max(f64::MIN_POSITIVE);
            AuditSample {
                gamma,
                analytic,
                finite_difference: fd,
                rel_error: (fd - analytic).abs() / scale,
                rounding_bound: bound / scale,
            }
        })
        .collect()
}
