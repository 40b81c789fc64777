//! Inequality certificates evaluated against traces and sample grids, plus
//! log-log rate-slope fitting.
//!
//! Each check reports the number of points inspected, the number of
//! violations, and the worst (most negative) slack together with a witness
//! when a violation exists. Tolerances are relative wherever the underlying
//! inequality is non-strict; no check uses exact floating equality.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{IterateRecord, Objective};
use crate::objectives::quartic_gradient;
use crate::optimizers::RuleKind;

/// Relative slack tolerance for value-level inequalities.
pub const REL_TOL: f64 = 1e-10;
/// Absolute slack tolerance for stepsize- and Hessian-level inequalities.
pub const ABS_TOL: f64 = 1e-12;

/// Location of the worst slack: a sample point or a trace index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    X(Vec<f64>),
    T(usize),
}

/// Outcome of one certificate check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_name: String,
    pub n_points: usize,
    pub n_violations: usize,
    /// Most negative slack observed (positive when the inequality held with
    /// room to spare everywhere).
    pub worst_margin: f64,
    /// Present iff `n_violations > 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

struct SlackTracker {
    n_points: usize,
    n_violations: usize,
    worst_margin: f64,
    worst_witness: Option<Witness>,
}

impl SlackTracker {
    fn new() -> Self {
        SlackTracker {
            n_points: 0,
            n_violations: 0,
            worst_margin: f64::INFINITY,
            worst_witness: None,
        }
    }

    fn observe(&mut self, slack: f64, tol: f64, witness: Witness) {
        self.n_points += 1;
        if slack < self.worst_margin {
            self.worst_margin = slack;
            self.worst_witness = Some(witness);
        }
        if slack < -tol {
            self.n_violations += 1;
        }
    }

    fn finish(self, check_name: &str) -> CheckReport {
        CheckReport {
            check_name: check_name.to_string(),
            n_points: self.n_points,
            n_violations: self.n_violations,
            worst_margin: if self.n_points == 0 {
                0.0
            } else {
                self.worst_margin
            },
            witness: if self.n_violations > 0 {
                self.worst_witness
            } else {
                None
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("check applies only to traces produced by the {expected} rule, got {got}")]
    InapplicableRule {
        expected: &'static str,
        got: &'static str,
    },
    #[error("trace record t={0} has no distance-to-optimum value")]
    MissingDistance(usize),
    #[error("best-value gap is non-positive at t={0}; slope of its log is undefined")]
    NonPositiveGap(usize),
    #[error("rate-slope window must contain at least two distinct iterations ≥ 1")]
    WindowTooSmall,
}

/// Evenly spaced scalar grid of `n ≥ 2` points covering `[lo, hi]`.
pub fn sample_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && hi > lo);
    let step = (hi - lo) / ((n - 1) as f64);
    (0..n).map(|i| lo + step * i as f64).collect()
}

/// Certificate `‖∇f(x)‖²/(2L) ≤ f(x) − f⋆` for an objective whose gradient
/// is Lipschitz with constant `l` on the sampled region.
pub fn check_lemma_a1(
    obj: &dyn Objective,
    l: f64,
    f_star: f64,
    sample_xs: &[Vec<f64>],
) -> CheckReport {
    let mut tracker = SlackTracker::new();
    for x in sample_xs {
        let f = obj.value(x);
        let gsq: f64 = obj.gradient(x).iter().map(|v| v * v).sum();
        let gap = f - f_star;
        let slack = gap - gsq / (2.0 * l);
        let tol = REL_TOL * 1.0f64.max(gap.abs());
        tracker.observe(slack, tol, Witness::X(x.clone()));
    }
    tracker.finish("lemma_a1")
}

/// [`check_lemma_a1`] evaluated on the rows of a trace instead of fresh
/// sample points: each record carries the value and gradient norm needed.
pub fn check_lemma_a1_trace(trace: &[IterateRecord], l: f64, f_star: f64) -> CheckReport {
    let mut tracker = SlackTracker::new();
    for rec in trace {
        let gap = rec.f_val - f_star;
        let slack = gap - rec.grad_norm * rec.grad_norm / (2.0 * l);
        let tol = REL_TOL * 1.0f64.max(gap.abs());
        tracker.observe(slack, tol, Witness::T(rec.t));
    }
    tracker.finish("lemma_a1")
}

/// Certificate `‖∇f(x)‖²/(2(L0 + L1‖∇f(x)‖)) ≤ f(x) − f⋆` for objectives
/// whose local gradient-Lipschitz constant is bounded by `L0 + L1‖∇f(x)‖`.
pub fn check_lemma_a2(
    obj: &dyn Objective,
    l0: f64,
    l1: f64,
    f_star: f64,
    sample_xs: &[Vec<f64>],
) -> CheckReport {
    let mut tracker = SlackTracker::new();
    for x in sample_xs {
        let f = obj.value(x);
        let gsq: f64 = obj.gradient(x).iter().map(|v| v * v).sum();
        let gn = gsq.sqrt();
        let gap = f - f_star;
        let slack = gap - gsq / (2.0 * (l0 + l1 * gn));
        let tol = REL_TOL * 1.0f64.max(gap.abs());
        tracker.observe(slack, tol, Witness::X(x.clone()));
    }
    tracker.finish("lemma_a2")
}

/// [`check_lemma_a2`] evaluated on the rows of a trace.
pub fn check_lemma_a2_trace(
    trace: &[IterateRecord],
    l0: f64,
    l1: f64,
    f_star: f64,
) -> CheckReport {
    let mut tracker = SlackTracker::new();
    for rec in trace {
        let gap = rec.f_val - f_star;
        let gsq = rec.grad_norm * rec.grad_norm;
        let slack = gap - gsq / (2.0 * (l0 + l1 * rec.grad_norm));
        let tol = REL_TOL * 1.0f64.max(gap.abs());
        tracker.observe(slack, tol, Witness::T(rec.t));
    }
    tracker.finish("lemma_a2")
}

/// Certificate that every step of an exact-floor (Polyak) run stayed above
/// the guaranteed lower bound `min{1/(4L0), 1/(4L1‖∇f(x_t)‖)}`.
///
/// Only records that actually took a step (`stepsize > 0`) are inspected:
/// zero-stepsize records are either the trailing no-step row, a replicated
/// stationary tail, or a value already at its floor, none of which the bound
/// addresses.
pub fn check_prop_3_1(
    trace: &[IterateRecord],
    rule: RuleKind,
    l0: f64,
    l1: f64,
) -> Result<CheckReport, VerifyError> {
    if rule != RuleKind::Polyak {
        return Err(VerifyError::InapplicableRule {
            expected: "polyak",
            got: rule.as_str(),
        });
    }
    let mut tracker = SlackTracker::new();
    for rec in trace {
        if rec.stepsize > 0.0 {
            let bound = (1.0 / (4.0 * l0)).min(1.0 / (4.0 * l1 * rec.grad_norm));
            tracker.observe(rec.stepsize - bound, ABS_TOL, Witness::T(rec.t));
        }
    }
    Ok(tracker.finish("prop_3_1"))
}

/// Certificate that every step of an exact-floor run on an `l`-smooth
/// objective stayed above `1/(2l)`.
pub fn check_prop_3_2(
    trace: &[IterateRecord],
    rule: RuleKind,
    l: f64,
) -> Result<CheckReport, VerifyError> {
    if rule != RuleKind::Polyak {
        return Err(VerifyError::InapplicableRule {
            expected: "polyak",
            got: rule.as_str(),
        });
    }
    let mut tracker = SlackTracker::new();
    for rec in trace {
        if rec.stepsize > 0.0 {
            tracker.observe(rec.stepsize - 1.0 / (2.0 * l), ABS_TOL, Witness::T(rec.t));
        }
    }
    Ok(tracker.finish("prop_3_2"))
}

/// Which consecutive record pairs the distance check applies to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MonotoneMask {
    /// Every pair.
    All,
    /// Only pairs whose leading record satisfies
    /// `f(x_t) − f⋆ ≥ sigma_sq/√horizon` — the region where the
    /// horizon-normalized rule provably contracts the distance.
    SuboptimalRegion {
        f_star: f64,
        sigma_sq: f64,
        horizon: usize,
    },
}

/// Certificate that `‖x_t − x⋆‖²` never increases (by more than relative
/// tolerance) between consecutive applicable records.
pub fn check_distance_monotone(
    trace: &[IterateRecord],
    mask: MonotoneMask,
) -> Result<CheckReport, VerifyError> {
    let mut tracker = SlackTracker::new();
    for pair in trace.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let da = a.dist_to_opt_sq.ok_or(VerifyError::MissingDistance(a.t))?;
        let db = b.dist_to_opt_sq.ok_or(VerifyError::MissingDistance(b.t))?;
        let applicable = match mask {
            MonotoneMask::All => true,
            MonotoneMask::SuboptimalRegion {
                f_star,
                sigma_sq,
                horizon,
            } => a.f_val - f_star >= sigma_sq / (horizon as f64).sqrt(),
        };
        if applicable {
            let slack = da - db;
            let tol = REL_TOL * 1.0f64.max(da);
            tracker.observe(slack, tol, Witness::T(a.t));
        }
    }
    Ok(tracker.finish("distance_monotone"))
}

/// Certificate `|f″(x)| ≤ (L1/2)|f′(x)| + L0/2` for the scalar quartic with
/// constants `l0`, `l1`, checked pointwise on `sample_xs`.
pub fn check_hessian_certificate(l0: f64, l1: f64, sample_xs: &[f64]) -> CheckReport {
    let mut tracker = SlackTracker::new();
    for &x in sample_xs {
        let fpp = (l0 * l1 * l1 / 6.0) * (x * x) + l0 / 2.0;
        let fp = quartic_gradient(l0, l1, x);
        let rhs = (l1 / 2.0) * fp.abs() + l0 / 2.0;
        tracker.observe(rhs - fpp.abs(), ABS_TOL, Witness::X(vec![x]));
    }
    tracker.finish("hessian")
}

/// Best-so-far value curve: `(t, min_{s≤t} f(x_s))` for every trace row.
pub fn best_curve(trace: &[IterateRecord]) -> Vec<(usize, f64)> {
    let mut best = f64::INFINITY;
    trace
        .iter()
        .map(|r| {
            best = best.min(r.f_val);
            (r.t, best)
        })
        .collect()
}

/// Least-squares slope of `log(f_best(t) − f_star)` against `log t` over
/// `window = (t_lo, t_hi)` inclusive. Errors if the gap is non-positive
/// anywhere in the window (its log is undefined) or if fewer than two
/// distinct iterations `t ≥ 1` fall inside the window.
pub fn fit_rate_slope(
    trace: &[IterateRecord],
    f_star: f64,
    window: (usize, usize),
) -> Result<f64, VerifyError> {
    let mut pts = Vec::new();
    for (t, fb) in best_curve(trace) {
        if t >= 1 && t >= window.0 && t <= window.1 {
            let gap = fb - f_star;
            if gap <= 0.0 {
                return Err(VerifyError::NonPositiveGap(t));
            }
            pts.push(((t as f64).ln(), gap.ln()));
        }
    }
    least_squares_slope(&pts)
}

/// Like [`fit_rate_slope`] but clamps the gap at `floor` instead of erroring,
/// matching the plotting convention for log-scale curves that reach the
/// floating-point floor.
pub fn fit_rate_slope_clamped(
    trace: &[IterateRecord],
    f_star: f64,
    window: (usize, usize),
    floor: f64,
) -> Result<f64, VerifyError> {
    assert!(floor > 0.0);
    let mut pts = Vec::new();
    for (t, fb) in best_curve(trace) {
        if t >= 1 && t >= window.0 && t <= window.1 {
            let gap = (fb - f_star).max(floor);
            pts.push(((t as f64).ln(), gap.ln()));
        }
    }
    least_squares_slope(&pts)
}

fn least_squares_slope(pts: &[(f64, f64)]) -> Result<f64, VerifyError> {
    let n = pts.len() as f64;
    if pts.len() < 2 || pts.iter().all(|p| p.0 == pts[0].0) {
        return Err(VerifyError::WindowTooSmall);
    }
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in pts {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{run, RunOverrides};
    use crate::objectives::{Quadratic, QuarticSynthetic};
    use crate::optimizers::StepsizeRule;

    fn grid_points(lo: f64, hi: f64, n: usize) -> Vec<Vec<f64>> {
        sample_grid(lo, hi, n).into_iter().map(|x| vec![x]).collect()
    }

    #[test]
    fn lemma_a1_is_tight_on_the_unit_quadratic() {
        let q = Quadratic::isotropic(1.0, 1);
        // At x=3: f−f⋆ = 4.5, ‖g‖²/(2L) = 9/2 — equality.
        let rep = check_lemma_a1(&q, 1.0, 0.0, &[vec![3.0]]);
        assert_eq!(rep.n_violations, 0);
        assert_eq!(rep.worst_margin, 0.0);
        let rep = check_lemma_a1(&q, 1.0, 0.0, &grid_points(-10.0, 10.0, 101));
        assert_eq!(rep.n_violations, 0);
        assert!(rep.witness.is_none());
    }

    #[test]
    fn lemma_a1_on_quartic_with_box_constant() {
        let q = QuarticSynthetic::new(1.0, 1.0, 1.0);
        let l_box = q.box_lipschitz(5.0);
        let rep = check_lemma_a1(&q, l_box, 1.0, &grid_points(-5.0, 5.0, 101));
        assert_eq!(rep.n_points, 101);
        assert_eq!(rep.n_violations, 0);
    }

    #[test]
    fn lemma_a1_flags_a_wrong_constant() {
        let q = Quadratic::isotropic(1.0, 1);
        // Claiming L=0.25 on a curvature-1 quadratic breaks the bound.
        let rep = check_lemma_a1(&q, 0.25, 0.0, &grid_points(-10.0, 10.0, 21));
        assert!(rep.n_violations > 0);
        assert!(rep.witness.is_some());
        assert!(rep.worst_margin < 0.0);
    }

    #[test]
    fn lemma_a2_on_quartic() {
        let q = QuarticSynthetic::new(1.0, 1.0, 1.0);
        let rep = check_lemma_a2(&q, 1.0, 1.0, 1.0, &[vec![5.0]]);
        assert_eq!(rep.n_violations, 0);
        // slack = 1075/72 − (7225/81)/(2(1 + 85/9)) = 1075/72 − 7225/1692
        let expect = 1075.0 / 72.0 - 7225.0 / 1692.0;
        assert!((rep.worst_margin - expect).abs() <= 1e-10 * expect);
        // optimum: 0 ≤ 0, slack 0
        let rep0 = check_lemma_a2(&q, 1.0, 1.0, 1.0, &[vec![0.0]]);
        assert_eq!(rep0.n_violations, 0);
        assert_eq!(rep0.worst_margin, 0.0);
        let sweep = check_lemma_a2(&q, 1.0, 1.0, 1.0, &grid_points(-5.0, 5.0, 201));
        assert_eq!(sweep.n_points, 201);
        assert_eq!(sweep.n_violations, 0);
    }

    #[test]
    fn prop_3_1_holds_on_a_polyak_run_and_rejects_other_rules() {
        let q = QuarticSynthetic::new(1.0, 1.0, 1.0);
        let mut rule = StepsizeRule::polyak(1.0);
        let res = run(&q, &mut rule, &[5.0], 100, &RunOverrides::default()).unwrap();
        let rep = check_prop_3_1(&res.trace, RuleKind::Polyak, 1.0, 1.0).unwrap();
        assert!(rep.n_points > 0);
        assert_eq!(rep.n_violations, 0);

        let err = check_prop_3_1(&res.trace, RuleKind::Gd, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, VerifyError::InapplicableRule { .. }));
    }

    #[test]
    fn prop_3_2_holds_for_polyak_on_a_quadratic() {
        let q = Quadratic::isotropic(2.0, 1);
        let mut rule = StepsizeRule::polyak(0.0);
        let res = run(&q, &mut rule, &[7.0], 50, &RunOverrides::default()).unwrap();
        let rep = check_prop_3_2(&res.trace, RuleKind::Polyak, 2.0).unwrap();
        assert_eq!(rep.n_violations, 0);
        // Polyak on an exact quadratic is the tight case: η = 1/(2L) every step.
        assert!(rep.worst_margin.abs() <= 1e-12);
    }

    #[test]
    fn distance_monotone_for_polyak_and_violations_for_naive() {
        let q = QuarticSynthetic::new(1.0, 1.0, 1.0);
        let mut polyak = StepsizeRule::polyak(1.0);
        let res = run(&q, &mut polyak, &[5.0], 1000, &RunOverrides::default()).unwrap();
        let rep = check_distance_monotone(&res.trace, MonotoneMask::All).unwrap();
        assert_eq!(rep.n_violations, 0);

        let mut naive = StepsizeRule::naive_lower_bound(0.0);
        let res = run(&q, &mut naive, &[5.0], 1000, &RunOverrides::default()).unwrap();
        let rep = check_distance_monotone(&res.trace, MonotoneMask::All).unwrap();
        assert!(rep.n_violations > 0, "naive rule should overshoot near the optimum");
        assert!(matches!(rep.witness, Some(Witness::T(_))));
    }

    #[test]
    fn distance_monotone_masked_region_for_the_horizon_rule() {
        let q = QuarticSynthetic::new(1.0, 1.0, 1.0);
        let mut ips = StepsizeRule::inexact_polyak(0.0, 1000);
        let res = run(&q, &mut ips, &[5.0], 1000, &RunOverrides::default()).unwrap();
        let rep = check_distance_monotone(
            &res.trace,
            MonotoneMask::SuboptimalRegion {
                f_star: 1.0,
                sigma_sq: 1.0,
                horizon: 1000,
            },
        )
        .unwrap();
        assert_eq!(rep.n_violations, 0);
        assert!(rep.n_points > 0);
        assert!(rep.n_points < res.trace.len() - 1, "mask should exclude the tail");
    }

    #[test]
    fn distance_monotone_requires_distances() {
        let trace = vec![IterateRecord {
            t: 0,
            f_val: 1.0,
            grad_norm: 1.0,
            stepsize: 0.1,
            dist_to_opt_sq: None,
        }; 2];
        assert!(matches!(
            check_distance_monotone(&trace, MonotoneMask::All),
            Err(VerifyError::MissingDistance(_))
        ));
    }

    #[test]
    fn hessian_certificate_sweeps() {
        // tight at x=0
        let rep = check_hessian_certificate(1.0, 1.0, &[0.0]);
        assert_eq!(rep.n_violations, 0);
        assert_eq!(rep.worst_margin, 0.0);
        let rep = check_hessian_certificate(1.0, 1.0, &sample_grid(-20.0, 20.0, 501));
        assert_eq!(rep.n_points, 501);
        assert_eq!(rep.n_violations, 0);
        let rep = check_hessian_certificate(1.0, 1000.0, &sample_grid(-0.1, 0.1, 501));
        assert_eq!(rep.n_violations, 0);
    }

    fn synthetic_trace(gaps: impl Iterator<Item = (usize, f64)>, f_star: f64) -> Vec<IterateRecord> {
        gaps.map(|(t, gap)| IterateRecord {
            t,
            f_val: f_star + gap,
            grad_norm: 1.0,
            stepsize: 0.1,
            dist_to_opt_sq: None,
        })
        .collect()
    }

    #[test]
    fn rate_slope_recovers_exact_power_laws() {
        let inv_t = synthetic_trace((1..=1000).map(|t| (t, 1.0 / t as f64)), 2.0);
        let s = fit_rate_slope(&inv_t, 2.0, (1, 1000)).unwrap();
        assert!((s + 1.0).abs() <= 1e-9, "got {s}");
        let inv_sqrt = synthetic_trace((1..=1000).map(|t| (t, 1.0 / (t as f64).sqrt())), 0.0);
        let s = fit_rate_slope(&inv_sqrt, 0.0, (1, 1000)).unwrap();
        assert!((s + 0.5).abs() <= 1e-9, "got {s}");
    }

    #[test]
    fn rate_slope_rejects_exhausted_gaps_but_clamped_variant_does_not() {
        let trace = synthetic_trace([(1, 1.0), (2, 0.5), (3, 0.0), (4, 0.0)].into_iter(), 1.0);
        assert_eq!(
            fit_rate_slope(&trace, 1.0, (1, 4)),
            Err(VerifyError::NonPositiveGap(3))
        );
        let s = fit_rate_slope_clamped(&trace, 1.0, (1, 4), 1e-16).unwrap();
        assert!(s < -1.0);
    }

    #[test]
    fn rate_slope_window_must_have_two_points() {
        let trace = synthetic_trace([(1, 1.0)].into_iter(), 0.0);
        assert_eq!(
            fit_rate_slope(&trace, 0.0, (1, 1)),
            Err(VerifyError::WindowTooSmall)
        );
    }

    #[test]
    fn polyak_rate_on_quartic_is_at_least_linear_in_log_log() {
        let q = QuarticSynthetic::new(1.0, 1.0, 1.0);
        let mut rule = StepsizeRule::polyak(1.0);
        let res = run(&q, &mut rule, &[5.0], 100, &RunOverrides::default()).unwrap();
        // Slope over the early window where the gap is still well above the
        // floating-point floor of f⋆.
        let s = fit_rate_slope(&res.trace, 1.0, (5, 20)).unwrap();
        assert!(s <= -0.9, "got {s}");
    }

    #[test]
    fn best_curve_is_monotone_prefix_min() {
        let trace = synthetic_trace(
            [(0, 5.0), (1, 7.0), (2, 3.0), (3, 4.0)].into_iter(),
            0.0,
        );
        let bc = best_curve(&trace);
        assert_eq!(
            bc,
            vec![(0, 5.0), (1, 5.0), (2, 3.0), (3, 3.0)]
        );
    }
}
