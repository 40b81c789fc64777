//! JSON config schema and validation.
//!
//! An experiment file looks like:
//!
//! ```json
//! {
//!   "t": 1000,
//!   "runs": [
//!     {
//!       "label": "polyak-l1-10",
//!       "objective": { "kind": "quartic", "l0": 1.0, "l1": 10.0,
//!                      "f_star": 1.0, "x0": [5.0] },
//!       "rule": { "kind": "polyak", "f_star": 1.0 },
//!       "verify": ["prop_3_1", "distance_monotone"]
//!     }
//!   ]
//! }
//! ```
//!
//! Infinite clip thresholds are written as the string `"inf"`.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::core::{Objective, RunOverrides};
use crate::objectives::{Quadratic, QuarticSynthetic};
use crate::optimizers::StepsizeRule;

/// An `f64` that round-trips `+∞` through JSON as the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipValue(pub f64);

impl Serialize for ClipValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() && self.0 > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for ClipValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(ClipValue(v)),
            Raw::Text(s) if s == "inf" => Ok(ClipValue(f64::INFINITY)),
            Raw::Text(s) => Err(D::Error::custom(format!(
                "expected a number or the string \"inf\", got \"{s}\""
            ))),
        }
    }
}

/// Objective description. `x0` is the start point and must match `dim`
/// (which defaults to `x0`'s length).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    /// Quartic-plus-quadratic bowl with smoothness knobs `l0`, `l1` and
    /// minimum value `f_star` at the origin.
    Quartic {
        l0: f64,
        l1: f64,
        f_star: f64,
        x0: Vec<f64>,
    },
    /// Isotropic quadratic `½·curvature·‖x‖²` with minimum 0 at the origin.
    Quadratic { curvature: f64, x0: Vec<f64> },
}

impl ObjectiveSpec {
    pub fn x0(&self) -> &[f64] {
        match self {
            ObjectiveSpec::Quartic { x0, .. } => x0,
            ObjectiveSpec::Quadratic { x0, .. } => x0,
        }
    }

    pub fn f_star(&self) -> f64 {
        match self {
            ObjectiveSpec::Quartic { f_star, .. } => *f_star,
            ObjectiveSpec::Quadratic { .. } => 0.0,
        }
    }

    pub fn build(&self) -> Box<dyn Objective + Send + Sync> {
        match self {
            ObjectiveSpec::Quartic { l0, l1, f_star, x0 } => Box::new(QuarticSynthetic::with_dim(
                *l0,
                *l1,
                *f_star,
                x0.len(),
            )),
            ObjectiveSpec::Quadratic { curvature, x0 } => {
                Box::new(Quadratic::isotropic(*curvature, x0.len()))
            }
        }
    }
}

/// Stepsize rule description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleSpec {
    Gd {
        eta: f64,
    },
    ClippedGd {
        eta: f64,
        clip: ClipValue,
    },
    Polyak {
        f_star: f64,
    },
    NaiveLowerBound {
        l_star: f64,
    },
    DecSps {
        l_star: f64,
        #[serde(default = "default_c0")]
        c0: f64,
        #[serde(default = "default_eta_max")]
        eta_max: f64,
    },
    AdaSps {
        l_star: f64,
    },
    InexactPolyak {
        l_star: f64,
    },
}

fn default_c0() -> f64 {
    1.0
}

fn default_eta_max() -> f64 {
    10.0
}

impl RuleSpec {
    pub fn kind_str(&self) -> &'static str {
        match self {
            RuleSpec::Gd { .. } => "gd",
            RuleSpec::ClippedGd { .. } => "clipped_gd",
            RuleSpec::Polyak { .. } => "polyak",
            RuleSpec::NaiveLowerBound { .. } => "naive_lower_bound",
            RuleSpec::DecSps { .. } => "dec_sps",
            RuleSpec::AdaSps { .. } => "ada_sps",
            RuleSpec::InexactPolyak { .. } => "inexact_polyak",
        }
    }

    /// Value floor referenced by the rule, when it has one.
    pub fn floor(&self) -> Option<f64> {
        match self {
            RuleSpec::Gd { .. } | RuleSpec::ClippedGd { .. } => None,
            RuleSpec::Polyak { f_star } => Some(*f_star),
            RuleSpec::NaiveLowerBound { l_star }
            | RuleSpec::DecSps { l_star, .. }
            | RuleSpec::AdaSps { l_star }
            | RuleSpec::InexactPolyak { l_star } => Some(*l_star),
        }
    }

    /// Instantiate a fresh per-run rule. `horizon` is the run's iteration
    /// budget, consumed by the horizon-normalized rule.
    pub fn build(&self, horizon: usize) -> StepsizeRule {
        match self {
            RuleSpec::Gd { eta } => StepsizeRule::gd(*eta),
            RuleSpec::ClippedGd { eta, clip } => StepsizeRule::clipped(*eta, clip.0),
            RuleSpec::Polyak { f_star } => StepsizeRule::polyak(*f_star),
            RuleSpec::NaiveLowerBound { l_star } => StepsizeRule::naive_lower_bound(*l_star),
            RuleSpec::DecSps {
                l_star,
                c0,
                eta_max,
            } => StepsizeRule::dec_sps(*l_star, *c0, *eta_max),
            RuleSpec::AdaSps { l_star } => StepsizeRule::ada_sps(*l_star),
            RuleSpec::InexactPolyak { l_star } => StepsizeRule::inexact_polyak(*l_star, horizon),
        }
    }
}

/// Early-stopping overrides (both optional; defaults are 1e30 and 1e−14).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverridesSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divergence_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stationarity_threshold: Option<f64>,
}

impl OverridesSpec {
    pub fn is_default(&self) -> bool {
        *self == OverridesSpec::default()
    }

    pub fn resolve(&self) -> RunOverrides {
        let d = RunOverrides::default();
        RunOverrides {
            divergence_bound: self.divergence_bound.unwrap_or(d.divergence_bound),
            stationarity_threshold: self
                .stationarity_threshold
                .unwrap_or(d.stationarity_threshold),
        }
    }
}

/// Certificate checks attachable to a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckName {
    #[serde(rename = "lemma_a1")]
    LemmaA1,
    #[serde(rename = "lemma_a2")]
    LemmaA2,
    #[serde(rename = "prop_3_1")]
    Prop31,
    #[serde(rename = "distance_monotone")]
    DistanceMonotone,
    #[serde(rename = "hessian")]
    Hessian,
}

/// One configured run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub label: String,
    pub objective: ObjectiveSpec,
    pub rule: RuleSpec,
    /// Iteration budget; falls back to the experiment-level `t`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(default, skip_serializing_if = "OverridesSpec::is_default")]
    pub overrides: OverridesSpec,
    /// Certificates evaluated on the finished trace and recorded in the
    /// report.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub verify: Vec<CheckName>,
}

/// Top-level experiment file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Default iteration budget for runs that do not set their own.
    #[serde(default = "default_t")]
    pub t: usize,
    pub runs: Vec<RunConfig>,
}

fn default_t() -> usize {
    1000
}

/// A config rejection, naming the offending field.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid config field `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            field: field.into(),
            message: message.into(),
        }
    }
}

fn label_ok(label: &str) -> bool {
    !label.is_empty()
        && label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

fn validate_objective(field: &str, spec: &ObjectiveSpec) -> Result<(), ConfigError> {
    let x0 = spec.x0();
    if x0.is_empty() {
        return Err(ConfigError::new(format!("{field}.x0"), "must be non-empty"));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(ConfigError::new(format!("{field}.x0"), "must be finite"));
    }
    match spec {
        ObjectiveSpec::Quartic { l0, l1, f_star, .. } => {
            if !(*l0 > 0.0 && l0.is_finite()) {
                return Err(ConfigError::new(
                    format!("{field}.l0"),
                    "must be strictly positive",
                ));
            }
            if !(*l1 > 0.0 && l1.is_finite()) {
                return Err(ConfigError::new(
                    format!("{field}.l1"),
                    "must be strictly positive",
                ));
            }
            if !f_star.is_finite() {
                return Err(ConfigError::new(format!("{field}.f_star"), "must be finite"));
            }
        }
        ObjectiveSpec::Quadratic { curvature, .. } => {
            if !(*curvature > 0.0 && curvature.is_finite()) {
                return Err(ConfigError::new(
                    format!("{field}.curvature"),
                    "must be strictly positive",
                ));
            }
        }
    }
    Ok(())
}

fn validate_run(field: &str, run: &RunConfig, default_t: usize) -> Result<(), ConfigError> {
    if !label_ok(&run.label) {
        return Err(ConfigError::new(
            format!("{field}.label"),
            "must be non-empty and use only [A-Za-z0-9._-] (it names the trace file)",
        ));
    }
    validate_objective(&format!("{field}.objective"), &run.objective)?;
    let t = run.t.unwrap_or(default_t);
    if t == 0 {
        return Err(ConfigError::new(format!("{field}.t"), "must be at least 1"));
    }
    run.rule
        .build(t)
        .validate()
        .map_err(|e| ConfigError::new(format!("{field}.rule"), e.to_string()))?;
    // A value floor above the objective's true minimum would make the
    // Polyak-family quotients negative near the optimum.
    if let Some(floor) = run.rule.floor() {
        let f_star = run.objective.f_star();
        if floor > f_star {
            return Err(ConfigError::new(
                format!("{field}.rule"),
                format!("value floor {floor} exceeds the objective minimum {f_star}"),
            ));
        }
    }
    if let Some(b) = run.overrides.divergence_bound {
        if !(b > 0.0) {
            return Err(ConfigError::new(
                format!("{field}.overrides.divergence_bound"),
                "must be strictly positive",
            ));
        }
    }
    if let Some(s) = run.overrides.stationarity_threshold {
        if !(s >= 0.0) {
            return Err(ConfigError::new(
                format!("{field}.overrides.stationarity_threshold"),
                "must be non-negative",
            ));
        }
    }
    Ok(())
}

/// Validate a whole experiment file.
pub fn validate(config: &ExperimentConfig) -> Result<(), ConfigError> {
    if config.t == 0 {
        return Err(ConfigError::new("t", "must be at least 1"));
    }
    let mut seen = std::collections::BTreeSet::new();
    for (i, run) in config.runs.iter().enumerate() {
        let field = format!("runs[{i}]");
        validate_run(&field, run, config.t)?;
        if !seen.insert(run.label.clone()) {
            return Err(ConfigError::new(
                format!("{field}.label"),
                format!("duplicate label \"{}\"", run.label),
            ));
        }
    }
    Ok(())
}
