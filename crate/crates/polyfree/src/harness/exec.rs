//! Experiment execution: fan runs out over a worker pool, gather results in
//! config order, persist CSV traces and the JSON report.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core::{run, RunResult};
use crate::verify::CheckReport;

use super::checks::run_config_check;
use super::config::{validate, ExperimentConfig, RunConfig};
use super::csvio::write_trace_csv;
use super::HarnessError;

/// Worker-pool size: `POLYFREE_WORKERS` when set, otherwise available cores.
pub fn worker_count() -> usize {
    std::env::var("POLYFREE_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| super::config::ConfigError::new("POLYFREE_WORKERS", e.to_string()))?;
    Ok(pool.install(f))
}

/// In-memory outcome of one configured run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: RunConfig,
    pub t_max: usize,
    pub result: RunResult,
    pub checks: Vec<CheckReport>,
}

fn execute_one(cfg: &RunConfig, default_t: usize) -> Result<RunOutcome, HarnessError> {
    let t_max = cfg.t.unwrap_or(default_t);
    let obj = cfg.objective.build();
    let mut rule = cfg.rule.build(t_max);
    let overrides = cfg.overrides.resolve();
    let result = run(obj.as_ref(), &mut rule, cfg.objective.x0(), t_max, &overrides)?;
    let mut checks = Vec::with_capacity(cfg.verify.len());
    for &check in &cfg.verify {
        checks.push(run_config_check(check, cfg, t_max, &result.trace)?);
    }
    Ok(RunOutcome {
        config: cfg.clone(),
        t_max,
        result,
        checks,
    })
}

/// Validate and execute every run of an experiment, in parallel. Outcomes
/// come back in config order regardless of scheduling.
pub fn execute(config: &ExperimentConfig) -> Result<Vec<RunOutcome>, HarnessError> {
    validate(config)?;
    with_pool(|| {
        config
            .runs
            .par_iter()
            .map(|cfg| execute_one(cfg, config.t))
            .collect::<Result<Vec<_>, _>>()
    })?
}

/// One run's row in the persisted report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub label: String,
    pub config: RunConfig,
    /// Iteration budget actually used (after the experiment default).
    pub t: usize,
    pub status: String,
    pub best_f: f64,
    pub best_index: usize,
    pub final_f: f64,
    /// Trace file name, relative to the report's directory.
    pub trace_csv: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckReport>,
}

/// The persisted experiment report (`report.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub t: usize,
    pub runs: Vec<RunReport>,
}

/// Serialize any value as pretty JSON with a trailing newline —
/// byte-deterministic for identical input.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, HarnessError> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Execute an experiment and persist one CSV per run plus `report.json`
/// under `out_dir` (created if absent).
pub fn run_experiment(
    config: &ExperimentConfig,
    out_dir: &Path,
) -> Result<ExperimentReport, HarnessError> {
    let outcomes = execute(config)?;
    fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let mut runs = Vec::with_capacity(outcomes.len());
    for outcome in &outcomes {
        let trace_csv = format!("{}.csv", outcome.config.label);
        write_trace_csv(&out_dir.join(&trace_csv), &outcome.result.trace)?;
        runs.push(RunReport {
            label: outcome.config.label.clone(),
            config: outcome.config.clone(),
            t: outcome.t_max,
            status: outcome.result.status.as_str().to_string(),
            best_f: outcome.result.best_f,
            best_index: outcome.result.best_index,
            final_f: outcome.result.final_f(),
            trace_csv,
            checks: outcome.checks.clone(),
        });
    }
    let report = ExperimentReport {
        t: config.t,
        runs,
    };
    let path = out_dir.join("report.json");
    fs::write(&path, to_json_bytes(&report)?).map_err(|e| HarnessError::io(&path, e))?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{ObjectiveSpec, OverridesSpec, RuleSpec};

    fn config() -> ExperimentConfig {
        ExperimentConfig {
            t: 200,
            runs: vec![RunConfig {
                label: "polyak".into(),
                objective: ObjectiveSpec::Quartic {
                    l0: 1.0,
                    l1: 1.0,
                    f_star: 1.0,
                    x0: vec![5.0],
                },
                rule: RuleSpec::Polyak { f_star: 1.0 },
                t: None,
                overrides: OverridesSpec::default(),
                verify: vec![
                    crate::harness::config::CheckName::Prop31,
                    crate::harness::config::CheckName::DistanceMonotone,
                ],
            }],
        }
    }

    #[test]
    fn execute_runs_and_attaches_checks() {
        let outcomes = execute(&config()).unwrap();
        assert_eq!(outcomes.len(), 1);
        let o = &outcomes[0];
        assert_eq!(o.result.trace.len(), 201);
        assert_eq!(o.checks.len(), 2);
        assert!(o.checks.iter().all(|c| c.n_violations == 0));
    }

    #[test]
    fn empty_experiment_is_a_valid_report() {
        let dir = tempfile::tempdir().unwrap();
        let report = run_experiment(
            &ExperimentConfig { t: 10, runs: vec![] },
            dir.path(),
        )
        .unwrap();
        assert!(report.runs.is_empty());
        let text = fs::read_to_string(dir.path().join("report.json")).unwrap();
        let back: ExperimentReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn report_round_trips_and_traces_exist() {
        let dir = tempfile::tempdir().unwrap();
        let report = run_experiment(&config(), dir.path()).unwrap();
        assert_eq!(report.runs.len(), 1);
        assert_eq!(report.runs[0].trace_csv, "polyak.csv");
        let trace = super::super::csvio::read_trace_csv(&dir.path().join("polyak.csv")).unwrap();
        assert_eq!(trace.len(), 201);
        let text = fs::read_to_string(dir.path().join("report.json")).unwrap();
        let back: ExperimentReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
    }
}
