//! The seven stepsize rules, each a pure policy from iterate statistics (and
//! rule-internal state) to a step coefficient.

use thiserror::Error;

use crate::core::{IterateStats, StepsizeError, StepsizePolicy};

/// Which family a rule instance belongs to (hyperparameters erased).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Gd,
    ClippedGd,
    Polyak,
    NaiveLowerBound,
    DecSps,
    AdaSps,
    InexactPolyak,
}

impl RuleKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RuleKind::Gd => "gd",
            RuleKind::ClippedGd => "clipped_gd",
            RuleKind::Polyak => "polyak",
            RuleKind::NaiveLowerBound => "naive_lower_bound",
            RuleKind::DecSps => "dec_sps",
            RuleKind::AdaSps => "ada_sps",
            RuleKind::InexactPolyak => "inexact_polyak",
        }
    }
}

/// Invalid hyperparameter combinations, caught before a run starts.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuleValidationError {
    #[error("{rule}: {param} must be strictly positive, got {value}")]
    NonPositive {
        rule: &'static str,
        param: &'static str,
        value: f64,
    },
    #[error("{rule}: {param} must be finite, got {value}")]
    NonFinite {
        rule: &'static str,
        param: &'static str,
        value: f64,
    },
    #[error("inexact_polyak: horizon must be at least 1")]
    ZeroHorizon,
}

/// Constant stepsize: returns `eta` unconditionally.
pub fn gd_step(eta: f64) -> f64 {
    eta
}

/// Clipped stepsize `eta·min{1, clip/grad_norm}`; with zero gradient the
/// clip is inactive and plain `eta` is returned. `clip = ∞` recovers plain
/// gradient descent.
pub fn clipped_step(eta: f64, clip: f64, grad_norm: f64) -> f64 {
    // clip/0 = +∞, so the min picks 1 and the rule degrades to plain GD.
    eta * (clip / grad_norm).min(1.0)
}

/// Exact-floor stepsize `(f_val − f_star)/grad_norm_sq`.
///
/// With a zero gradient the quotient is undefined unless the value already
/// sits at the floor, in which case the step is 0.
pub fn polyak_step(f_val: f64, f_star: f64, grad_norm_sq: f64) -> Result<f64, StepsizeError> {
    let gap = f_val - f_star;
    if grad_norm_sq == 0.0 {
        return if gap <= 0.0 {
            Ok(0.0)
        } else {
            Err(StepsizeError::StationaryGradient)
        };
    }
    Ok(gap.max(0.0) / grad_norm_sq)
}

/// Same quotient as [`polyak_step`] but fed a lower bound `l_star ≤ f⋆`
/// instead of the exact minimum. Near the optimum the numerator stalls at
/// `f⋆ − l_star` while the denominator vanishes, so the step blows up and the
/// iterates never settle.
pub fn naive_lower_bound_step(
    f_val: f64,
    l_star: f64,
    grad_norm_sq: f64,
) -> Result<f64, StepsizeError> {
    polyak_step(f_val, l_star, grad_norm_sq)
}

/// One update of the decreasing-SPS recursion:
/// `η_t = min{(f_val − l_star)/grad_norm_sq, c_{t−1}·η_{t−1}} / c_t` with
/// `c_t = c0·√(t+1)`, seeded by `η_{−1} = eta_max`, `c_{−1} = c0`.
/// `prev_eta` carries `η_{t−1}` (`None` at t=0). The sequence is monotone
/// non-increasing.
pub fn decsps_step(
    f_val: f64,
    l_star: f64,
    grad_norm_sq: f64,
    t: usize,
    c0: f64,
    eta_max: f64,
    prev_eta: Option<f64>,
) -> Result<f64, StepsizeError> {
    let quotient = polyak_step(f_val, l_star, grad_norm_sq)?;
    let c_t = c0 * ((t + 1) as f64).sqrt();
    let c_prev = if t == 0 { c0 } else { c0 * (t as f64).sqrt() };
    let prev = prev_eta.unwrap_or(eta_max);
    Ok(quotient.min(c_prev * prev) / c_t)
}

/// One update of the accumulating-SPS rule: `accum` carries
/// `S_t = Σ_{s≤t}(f(x_s) − l_star)` (updated in place before the step is
/// formed); `η_t = (f_val − l_star)/(grad_norm_sq·√S_t)`.
pub fn adasps_step(
    f_val: f64,
    l_star: f64,
    grad_norm_sq: f64,
    accum: &mut f64,
) -> Result<f64, StepsizeError> {
    let gap = (f_val - l_star).max(0.0);
    *accum += gap;
    if grad_norm_sq == 0.0 {
        return if gap <= 0.0 {
            Ok(0.0)
        } else {
            Err(StepsizeError::StationaryGradient)
        };
    }
    if gap == 0.0 {
        // Value already at the floor: zero step regardless of the sum.
        return Ok(0.0);
    }
    Ok(gap / (grad_norm_sq * accum.sqrt()))
}

/// Horizon-normalized lower-bound stepsize
/// `(f_val − l_star)/(√horizon·grad_norm_sq)`. With `horizon = 1` this is
/// exactly [`naive_lower_bound_step`].
pub fn inexact_polyak_step(
    f_val: f64,
    l_star: f64,
    grad_norm_sq: f64,
    horizon: usize,
) -> Result<f64, StepsizeError> {
    let gap = f_val - l_star;
    if grad_norm_sq == 0.0 {
        return if gap <= 0.0 {
            Ok(0.0)
        } else {
            Err(StepsizeError::StationaryGradient)
        };
    }
    Ok(gap.max(0.0) / ((horizon as f64).sqrt() * grad_norm_sq))
}

/// A stepsize rule instance, carrying hyperparameters and any per-run state.
///
/// One instance drives one run; stateful rules must not be shared.
#[derive(Debug, Clone, PartialEq)]
pub enum StepsizeRule {
    Gd {
        eta: f64,
    },
    ClippedGd {
        eta: f64,
        clip: f64,
    },
    Polyak {
        f_star: f64,
    },
    NaiveLowerBound {
        l_star: f64,
    },
    DecSps {
        l_star: f64,
        c0: f64,
        eta_max: f64,
        prev_eta: Option<f64>,
    },
    AdaSps {
        l_star: f64,
        accum: f64,
    },
    InexactPolyak {
        l_star: f64,
        horizon: usize,
    },
}

impl StepsizeRule {
    pub fn gd(eta: f64) -> Self {
        StepsizeRule::Gd { eta }
    }

    pub fn clipped(eta: f64, clip: f64) -> Self {
        StepsizeRule::ClippedGd { eta, clip }
    }

    pub fn polyak(f_star: f64) -> Self {
        StepsizeRule::Polyak { f_star }
    }

    pub fn naive_lower_bound(l_star: f64) -> Self {
        StepsizeRule::NaiveLowerBound { l_star }
    }

    pub fn dec_sps(l_star: f64, c0: f64, eta_max: f64) -> Self {
        StepsizeRule::DecSps {
            l_star,
            c0,
            eta_max,
            prev_eta: None,
        }
    }

    pub fn ada_sps(l_star: f64) -> Self {
        StepsizeRule::AdaSps { l_star, accum: 0.0 }
    }

    pub fn inexact_polyak(l_star: f64, horizon: usize) -> Self {
        StepsizeRule::InexactPolyak { l_star, horizon }
    }

    pub fn kind(&self) -> RuleKind {
        match self {
            StepsizeRule::Gd { .. } => RuleKind::Gd,
            StepsizeRule::ClippedGd { .. } => RuleKind::ClippedGd,
            StepsizeRule::Polyak { .. } => RuleKind::Polyak,
            StepsizeRule::NaiveLowerBound { .. } => RuleKind::NaiveLowerBound,
            StepsizeRule::DecSps { .. } => RuleKind::DecSps,
            StepsizeRule::AdaSps { .. } => RuleKind::AdaSps,
            StepsizeRule::InexactPolyak { .. } => RuleKind::InexactPolyak,
        }
    }

    /// Check hyperparameters before a run. Value floors (`f_star`, `l_star`)
    /// must be finite; scale parameters strictly positive (`clip = ∞` is
    /// allowed and means "never clip").
    pub fn validate(&self) -> Result<(), RuleValidationError> {
        fn positive(
            rule: &'static str,
            param: &'static str,
            value: f64,
        ) -> Result<(), RuleValidationError> {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(RuleValidationError::NonPositive { rule, param, value })
            }
        }
        fn finite(
            rule: &'static str,
            param: &'static str,
            value: f64,
        ) -> Result<(), RuleValidationError> {
            if value.is_finite() {
                Ok(())
            } else {
                Err(RuleValidationError::NonFinite { rule, param, value })
            }
        }
        match *self {
            StepsizeRule::Gd { eta } => positive("gd", "eta", eta),
            StepsizeRule::ClippedGd { eta, clip } => {
                positive("clipped_gd", "eta", eta)?;
                if clip.is_nan() || clip <= 0.0 {
                    return Err(RuleValidationError::NonPositive {
                        rule: "clipped_gd",
                        param: "clip",
                        value: clip,
                    });
                }
                Ok(())
            }
            StepsizeRule::Polyak { f_star } => finite("polyak", "f_star", f_star),
            StepsizeRule::NaiveLowerBound { l_star } => {
                finite("naive_lower_bound", "l_star", l_star)
            }
            StepsizeRule::DecSps {
                l_star,
                c0,
                eta_max,
                ..
            } => {
                finite("dec_sps", "l_star", l_star)?;
                positive("dec_sps", "c0", c0)?;
                positive("dec_sps", "eta_max", eta_max)
            }
            StepsizeRule::AdaSps { l_star, .. } => finite("ada_sps", "l_star", l_star),
            StepsizeRule::InexactPolyak { l_star, horizon } => {
                finite("inexact_polyak", "l_star", l_star)?;
                if horizon == 0 {
                    return Err(RuleValidationError::ZeroHorizon);
                }
                Ok(())
            }
        }
    }
}

impl StepsizePolicy for StepsizeRule {
    fn stepsize(&mut self, stats: &IterateStats) -> Result<f64, StepsizeError> {
        match self {
            StepsizeRule::Gd { eta } => Ok(gd_step(*eta)),
            StepsizeRule::ClippedGd { eta, clip } => {
                Ok(clipped_step(*eta, *clip, stats.grad_norm))
            }
            StepsizeRule::Polyak { f_star } => {
                polyak_step(stats.f_val, *f_star, stats.grad_norm_sq)
            }
            StepsizeRule::NaiveLowerBound { l_star } => {
                naive_lower_bound_step(stats.f_val, *l_star, stats.grad_norm_sq)
            }
            StepsizeRule::DecSps {
                l_star,
                c0,
                eta_max,
                prev_eta,
            } => {
                let eta = decsps_step(
                    stats.f_val,
                    *l_star,
                    stats.grad_norm_sq,
                    stats.t,
                    *c0,
                    *eta_max,
                    *prev_eta,
                )?;
                *prev_eta = Some(eta);
                Ok(eta)
            }
            StepsizeRule::AdaSps { l_star, accum } => {
                adasps_step(stats.f_val, *l_star, stats.grad_norm_sq, accum)
            }
            StepsizeRule::InexactPolyak { l_star, horizon } => {
                inexact_polyak_step(stats.f_val, *l_star, stats.grad_norm_sq, *horizon)
            }
        }
    }
}
