//! Named certificate checks: shared between the per-run `verify` list in an
//! experiment config and the standalone `verify` CLI subcommand.

use serde::Deserialize;

use crate::core::IterateRecord;
use crate::optimizers::RuleKind;
use crate::verify::{
    check_distance_monotone, check_hessian_certificate, check_lemma_a1_trace,
    check_lemma_a2_trace, check_prop_3_1, sample_grid, CheckReport, MonotoneMask,
};

use super::config::{CheckName, ConfigError, ObjectiveSpec, RuleSpec, RunConfig};
use super::HarnessError;

fn parse_rule_kind(s: &str) -> Result<RuleKind, ConfigError> {
    Ok(match s {
        "gd" => RuleKind::Gd,
        "clipped_gd" => RuleKind::ClippedGd,
        "polyak" => RuleKind::Polyak,
        "naive_lower_bound" => RuleKind::NaiveLowerBound,
        "dec_sps" => RuleKind::DecSps,
        "ada_sps" => RuleKind::AdaSps,
        "inexact_polyak" => RuleKind::InexactPolyak,
        other => {
            return Err(ConfigError::new(
                "params.rule",
                format!("unknown rule kind \"{other}\""),
            ))
        }
    })
}

fn rule_kind_of(spec: &RuleSpec) -> RuleKind {
    // Build with a dummy horizon just to read the kind off the instance.
    spec.build(1).kind()
}

/// Parameters for one standalone check, parsed from the CLI's `--params`
/// JSON object.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckRequest {
    /// Gradient-Lipschitz constant for `lemma_a1`.
    #[serde(default)]
    pub l: Option<f64>,
    #[serde(default)]
    pub l0: Option<f64>,
    #[serde(default)]
    pub l1: Option<f64>,
    #[serde(default)]
    pub f_star: Option<f64>,
    /// Producing rule kind, for the trace-applicability checks.
    #[serde(default)]
    pub rule: Option<String>,
    /// Floor slack `f⋆ − l⋆` for the masked distance check.
    #[serde(default)]
    pub sigma_sq: Option<f64>,
    /// Iteration budget of the producing run, for the masked distance check.
    #[serde(default)]
    pub t: Option<usize>,
    /// Sample-grid bounds and size for the Hessian sweep.
    #[serde(default)]
    pub lo: Option<f64>,
    #[serde(default)]
    pub hi: Option<f64>,
    #[serde(default)]
    pub n: Option<usize>,
}

fn need<T: Copy>(v: Option<T>, name: &str) -> Result<T, ConfigError> {
    v.ok_or_else(|| ConfigError::new(format!("params.{name}"), "required for this check"))
}

/// Evaluate the check called `name` against `trace` with `params` (a JSON
/// object; see [`CheckRequest`] for the recognized keys).
pub fn run_named_check(
    name: &str,
    trace: &[IterateRecord],
    params: &str,
) -> Result<CheckReport, HarnessError> {
    let req: CheckRequest = serde_json::from_str(params)
        .map_err(|e| ConfigError::new("params", format!("not a valid params object: {e}")))?;
    let report = match name {
        "lemma_a1" => check_lemma_a1_trace(trace, need(req.l, "l")?, need(req.f_star, "f_star")?),
        "lemma_a2" => check_lemma_a2_trace(
            trace,
            need(req.l0, "l0")?,
            need(req.l1, "l1")?,
            need(req.f_star, "f_star")?,
        ),
        "prop_3_1" => {
            let rule = parse_rule_kind(need(req.rule.as_deref(), "rule")?)?;
            check_prop_3_1(trace, rule, need(req.l0, "l0")?, need(req.l1, "l1")?)?
        }
        "distance_monotone" => {
            let rule = parse_rule_kind(need(req.rule.as_deref(), "rule")?)?;
            let mask = if rule == RuleKind::InexactPolyak {
                MonotoneMask::SuboptimalRegion {
                    f_star: need(req.f_star, "f_star")?,
                    sigma_sq: need(req.sigma_sq, "sigma_sq")?,
                    horizon: need(req.t, "t")?,
                }
            } else {
                MonotoneMask::All
            };
            check_distance_monotone(trace, mask)?
        }
        "hessian" => {
            let lo = req.lo.unwrap_or(-5.0);
            let hi = req.hi.unwrap_or(5.0);
            let n = req.n.unwrap_or(501);
            if !(hi > lo) || n < 2 {
                return Err(ConfigError::new("params", "need hi > lo and n ≥ 2").into());
            }
            check_hessian_certificate(
                need(req.l0, "l0")?,
                need(req.l1, "l1")?,
                &sample_grid(lo, hi, n),
            )
        }
        other => {
            return Err(ConfigError::new(
                "check",
                format!(
                    "unknown check \"{other}\"; expected one of lemma_a1, lemma_a2, prop_3_1, \
                     distance_monotone, hessian"
                ),
            )
            .into())
        }
    };
    Ok(report)
}

/// Evaluate one config-attached check for a finished run.
pub fn run_config_check(
    check: CheckName,
    run: &RunConfig,
    t_max: usize,
    trace: &[IterateRecord],
) -> Result<CheckReport, HarnessError> {
    let radius = run
        .objective
        .x0()
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let (l0, l1) = match &run.objective {
        ObjectiveSpec::Quartic { l0, l1, .. } => (*l0, *l1),
        ObjectiveSpec::Quadratic { curvature, .. } => (*curvature, 0.0),
    };
    let f_star = run.objective.f_star();
    let report = match check {
        CheckName::LemmaA1 => {
            // Gradient-Lipschitz constant over the box reached from x0.
            let l = match &run.objective {
                ObjectiveSpec::Quartic { l0, l1, .. } => {
                    l0 / 2.0 + (l0 * l1 * l1 / 6.0) * (radius * radius)
                }
                ObjectiveSpec::Quadratic { curvature, .. } => *curvature,
            };
            check_lemma_a1_trace(trace, l, f_star)
        }
        CheckName::LemmaA2 => check_lemma_a2_trace(trace, l0, l1, f_star),
        CheckName::Prop31 => check_prop_3_1(trace, rule_kind_of(&run.rule), l0, l1)?,
        CheckName::DistanceMonotone => {
            let mask = match &run.rule {
                RuleSpec::InexactPolyak { l_star } => MonotoneMask::SuboptimalRegion {
                    f_star,
                    sigma_sq: f_star - l_star,
                    horizon: t_max,
                },
                _ => MonotoneMask::All,
            };
            check_distance_monotone(trace, mask)?
        }
        CheckName::Hessian => {
            if matches!(run.objective, ObjectiveSpec::Quadratic { .. }) {
                return Err(ConfigError::new(
                    "verify",
                    "hessian check applies only to the quartic objective",
                )
                .into());
            }
            let r = radius.max(1.0);
            check_hessian_certificate(l0, l1, &sample_grid(-r, r, 501))
        }
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{run, RunOverrides};
    use crate::objectives::QuarticSynthetic;
    use crate::optimizers::StepsizeRule;

    fn polyak_trace() -> Vec<IterateRecord> {
        let obj = QuarticSynthetic::new(1.0, 1.0, 1.0);
        let mut rule = StepsizeRule::polyak(1.0);
        run(&obj, &mut rule, &[5.0], 100, &RunOverrides::default())
            .unwrap()
            .trace
    }

    #[test]
    fn named_checks_dispatch_and_validate_params() {
        let trace = polyak_trace();
        let rep = run_named_check(
            "prop_3_1",
            &trace,
            r#"{"rule":"polyak","l0":1.0,"l1":1.0}"#,
        )
        .unwrap();
        assert_eq!(rep.check_name, "prop_3_1");
        assert_eq!(rep.n_violations, 0);

        let rep = run_named_check(
            "lemma_a2",
            &trace,
            r#"{"l0":1.0,"l1":1.0,"f_star":1.0}"#,
        )
        .unwrap();
        assert_eq!(rep.n_violations, 0);

        let rep = run_named_check("distance_monotone", &trace, r#"{"rule":"polyak"}"#).unwrap();
        assert_eq!(rep.n_violations, 0);

        let rep = run_named_check("hessian", &trace, r#"{"l0":1.0,"l1":1.0}"#).unwrap();
        assert_eq!(rep.n_points, 501);
        assert_eq!(rep.n_violations, 0);

        assert!(run_named_check("prop_3_1", &trace, r#"{"l0":1.0}"#).is_err());
        assert!(run_named_check("nope", &trace, "{}").is_err());
        assert!(run_named_check("lemma_a1", &trace, "[]").is_err());
    }
}
