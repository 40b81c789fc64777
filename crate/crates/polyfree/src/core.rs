//! Objective abstraction, run traces, and the descent loop shared by all
//! stepsize rules.

use thiserror::Error;

/// Smoothness constants an objective can report about itself.
///
/// `l` is a global gradient-Lipschitz constant when one exists; `l0`/`l1`
/// describe the gradient-dependent bound `L0 + L1·‖∇f(x)‖` on the local
/// Lipschitz constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessInfo {
    pub l: Option<f64>,
    pub l0: f64,
    pub l1: f64,
}

/// A differentiable objective function on ℝᵈ.
///
/// Implementations must be pure: two calls with bitwise-equal `x` return
/// bitwise-equal results.
pub trait Objective: Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    /// Analytic minimizer and minimum value, when known.
    fn optimum(&self) -> Option<(Vec<f64>, f64)> {
        None
    }

    /// Smoothness constants, when known.
    fn smoothness(&self) -> Option<SmoothnessInfo> {
        None
    }
}

/// One row of a run trace.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateRecord {
    pub t: usize,
    pub f_val: f64,
    pub grad_norm: f64,
    /// Step coefficient applied to leave this iterate; 0 when no step was
    /// taken (final record, stationary tail, divergence cutoff).
    pub stepsize: f64,
    /// `‖x_t − x⋆‖²` when the optimum is known.
    pub dist_to_opt_sq: Option<f64>,
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    /// All requested steps executed with finite values.
    Completed,
    /// The value or a gradient component became non-finite; partial trace.
    DivergedNonFinite,
    /// The value exceeded the divergence bound; partial trace.
    DivergedBound,
    /// The gradient norm fell below the stationarity threshold; the
    /// remaining records replicate the fixed point.
    StationaryStop,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::DivergedNonFinite => "diverged_nonfinite",
            RunStatus::DivergedBound => "diverged_bound",
            RunStatus::StationaryStop => "stationary_stop",
        }
    }

    /// Whether the run is usable for selection (did not diverge).
    pub fn converged(&self) -> bool {
        matches!(self, RunStatus::Completed | RunStatus::StationaryStop)
    }
}

/// Outcome of a run: full trace plus best-iterate bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub trace: Vec<IterateRecord>,
    /// Smallest index attaining the minimum observed value.
    pub best_index: usize,
    pub best_f: f64,
    pub best_x: Vec<f64>,
    pub status: RunStatus,
}

impl RunResult {
    pub fn final_f(&self) -> f64 {
        self.trace.last().map(|r| r.f_val).unwrap_or(f64::NAN)
    }
}

/// Early-stopping constants, overridable per run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOverrides {
    /// A run stops with `DivergedBound` once `f` exceeds this.
    pub divergence_bound: f64,
    /// A run stops with `StationaryStop` once `‖∇f‖` falls below this.
    pub stationarity_threshold: f64,
}

impl Default for RunOverrides {
    fn default() -> Self {
        RunOverrides {
            divergence_bound: 1e30,
            stationarity_threshold: 1e-14,
        }
    }
}

/// Per-iterate statistics handed to a stepsize policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateStats {
    pub t: usize,
    pub f_val: f64,
    pub grad_norm: f64,
    pub grad_norm_sq: f64,
}

/// Raised by a policy when the stepsize is undefined at the current iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StepsizeError {
    /// Zero gradient while the value still sits above the rule's floor.
    #[error("stepsize undefined: zero gradient away from the value floor")]
    StationaryGradient,
}

/// A stepsize policy: maps the current iterate's statistics (plus any
/// rule-internal state) to a step coefficient.
pub trait StepsizePolicy {
    fn stepsize(&mut self, stats: &IterateStats) -> Result<f64, StepsizeError>;
}

/// Precondition failures for [`run`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error("x0 has length {got} but the objective has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("iteration count must be at least 1")]
    ZeroIterations,
    #[error("objective is non-finite at x0")]
    NonFiniteStart,
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Run `t_max` steps of `x_{t+1} = x_t − η_t·∇f(x_t)` from `x0`, recording
/// every visited iterate (the trace has `t_max + 1` rows on a full run).
///
/// The best iterate (smallest value seen, earliest index on ties) is tracked
/// for every rule so that best-so-far curves are comparable across methods.
pub fn run(
    obj: &dyn Objective,
    policy: &mut dyn StepsizePolicy,
    x0: &[f64],
    t_max: usize,
    overrides: &RunOverrides,
) -> Result<RunResult, RunError> {
    if x0.len() != obj.dim() {
        return Err(RunError::DimensionMismatch {
            expected: obj.dim(),
            got: x0.len(),
        });
    }
    if t_max == 0 {
        return Err(RunError::ZeroIterations);
    }

    let optimum = obj.optimum();
    let mut x = x0.to_vec();
    let mut trace: Vec<IterateRecord> = Vec::with_capacity(t_max + 1);
    let mut best: Option<(usize, f64, Vec<f64>)> = None;
    let mut status = RunStatus::Completed;
    let mut t = 0usize;

    loop {
        let f = obj.value(&x);
        let g = obj.gradient(&x);
        if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
            status = RunStatus::DivergedNonFinite;
            break;
        }
        let grad_norm_sq: f64 = g.iter().map(|v| v * v).sum();
        let grad_norm = grad_norm_sq.sqrt();
        let dist = optimum.as_ref().map(|(xs, _)| dist_sq(&x, xs));

        match &mut best {
            Some((bi, bf, bx)) => {
                if f < *bf {
                    *bi = t;
                    *bf = f;
                    bx.clone_from(&x);
                }
            }
            None => best = Some((t, f, x.clone())),
        }

        if f > overrides.divergence_bound {
            trace.push(IterateRecord {
                t,
                f_val: f,
                grad_norm,
                stepsize: 0.0,
                dist_to_opt_sq: dist,
            });
            status = RunStatus::DivergedBound;
            break;
        }

        if grad_norm < overrides.stationarity_threshold {
            for tt in t..=t_max {
                trace.push(IterateRecord {
                    t: tt,
                    f_val: f,
                    grad_norm,
                    stepsize: 0.0,
                    dist_to_opt_sq: dist.clone(),
                });
            }
            status = RunStatus::StationaryStop;
            break;
        }

        if t == t_max {
            trace.push(IterateRecord {
                t,
                f_val: f,
                grad_norm,
                stepsize: 0.0,
                dist_to_opt_sq: dist,
            });
            break;
        }

        let stats = IterateStats {
            t,
            f_val: f,
            grad_norm,
            grad_norm_sq,
        };
        let eta = match policy.stepsize(&stats) {
            Ok(eta) => eta,
            Err(StepsizeError::StationaryGradient) => {
                for tt in t..=t_max {
                    trace.push(IterateRecord {
                        t: tt,
                        f_val: f,
                        grad_norm,
                        stepsize: 0.0,
                        dist_to_opt_sq: dist.clone(),
                    });
                }
                status = RunStatus::StationaryStop;
                break;
            }
        };
        trace.push(IterateRecord {
            t,
            f_val: f,
            grad_norm,
            stepsize: eta,
            dist_to_opt_sq: dist,
        });
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= eta * gi;
        }
        t += 1;
    }

    let (best_index, best_f, best_x) = best.ok_or(RunError::NonFiniteStart)?;
    Ok(RunResult {
        trace,
        best_index,
        best_f,
        best_x,
        status,
    })
}
