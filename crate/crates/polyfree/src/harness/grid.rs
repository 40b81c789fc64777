//! Cartesian hyperparameter grid search with a deterministic selection rule.
//!
//! Every cell is a full run of the base config with the axis values patched
//! in. Selection: lowest best-so-far value after the full budget, diverged
//! cells excluded; ties break toward the smaller learning rate, then the
//! smaller clip threshold.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core::{run, RunResult};

use super::config::{validate, ClipValue, ConfigError, ExperimentConfig, RuleSpec, RunConfig};
use super::csvio::format_f64;
use super::exec::to_json_bytes;
use super::HarnessError;

/// Which rule hyperparameter an axis sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridParam {
    Eta,
    Clip,
}

impl GridParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            GridParam::Eta => "eta",
            GridParam::Clip => "clip",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub param: GridParam,
    pub values: Vec<ClipValue>,
}

/// A grid file: the base run plus one or more axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Default iteration budget (same meaning as the experiment-level `t`).
    #[serde(default = "default_t")]
    pub t: usize,
    pub base: RunConfig,
    pub axes: Vec<GridAxis>,
}

fn default_t() -> usize {
    1000
}

/// One evaluated cell, in axis-index (row-major) order.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOutcome {
    /// One value per axis, in axis order.
    pub values: Vec<f64>,
    pub result: RunResult,
}

/// The winning cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// `(axis param name, value)` pairs in axis order.
    pub params: Vec<(String, ClipValue)>,
    pub best_f: f64,
}

fn patch_rule(rule: &RuleSpec, param: GridParam, value: f64) -> Result<RuleSpec, ConfigError> {
    let mut patched = rule.clone();
    match (&mut patched, param) {
        (RuleSpec::Gd { eta }, GridParam::Eta) => *eta = value,
        (RuleSpec::ClippedGd { eta, .. }, GridParam::Eta) => *eta = value,
        (RuleSpec::ClippedGd { clip, .. }, GridParam::Clip) => *clip = ClipValue(value),
        _ => {
            return Err(ConfigError::new(
                "axes",
                format!(
                    "axis `{}` does not apply to rule `{}`",
                    param.as_str(),
                    rule.kind_str()
                ),
            ))
        }
    }
    Ok(patched)
}

fn validate_grid(grid: &GridSpec) -> Result<(), ConfigError> {
    if grid.axes.is_empty() {
        return Err(ConfigError::new("axes", "must be non-empty"));
    }
    for (i, axis) in grid.axes.iter().enumerate() {
        if axis.values.is_empty() {
            return Err(ConfigError::new(
                format!("axes[{i}].values"),
                "must be non-empty",
            ));
        }
    }
    for (i, axis) in grid.axes.iter().enumerate() {
        for (j, v) in axis.values.iter().enumerate() {
            patch_rule(&grid.base.rule, axis.param, v.0)
                .map_err(|e| ConfigError::new(format!("axes[{i}]"), e.message))?;
            if v.0.is_nan() || v.0 <= 0.0 {
                return Err(ConfigError::new(
                    format!("axes[{i}].values[{j}]"),
                    "must be strictly positive",
                ));
            }
        }
    }
    Ok(())
}

fn cells(grid: &GridSpec) -> Vec<Vec<f64>> {
    let mut acc: Vec<Vec<f64>> = vec![vec![]];
    for axis in &grid.axes {
        let mut next = Vec::with_capacity(acc.len() * axis.values.len());
        for prefix in &acc {
            for v in &axis.values {
                let mut cell = prefix.clone();
                cell.push(v.0);
                next.push(cell);
            }
        }
        acc = next;
    }
    acc
}

/// Evaluate every cell of the grid (in parallel) and return outcomes in
/// row-major axis order plus the selected cell.
pub fn evaluate_grid(grid: &GridSpec) -> Result<(Vec<GridOutcome>, Selection), HarnessError> {
    validate_grid(grid)?;
    // Validate the base run itself by embedding it in a one-run experiment.
    validate(&ExperimentConfig {
        t: grid.t,
        runs: vec![grid.base.clone()],
    })?;

    let all_cells = cells(grid);
    let t_max = grid.base.t.unwrap_or(grid.t);
    let overrides = grid.base.overrides.resolve();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(super::exec::worker_count())
        .build()
        .map_err(|e| ConfigError::new("POLYFREE_WORKERS", e.to_string()))?;
    let outcomes: Vec<GridOutcome> = pool.install(|| {
        all_cells
            .par_iter()
            .map(|cell| {
                let mut rule_spec = grid.base.rule.clone();
                for (axis, &v) in grid.axes.iter().zip(cell) {
                    rule_spec = patch_rule(&rule_spec, axis.param, v).expect("validated above");
                }
                let obj = grid.base.objective.build();
                let mut rule = rule_spec.build(t_max);
                let result = run(
                    obj.as_ref(),
                    &mut rule,
                    grid.base.objective.x0(),
                    t_max,
                    &overrides,
                )
                .expect("validated above");
                Ok(GridOutcome {
                    values: cell.clone(),
                    result,
                })
            })
            .collect::<Result<Vec<_>, HarnessError>>()
    })?;

    // Selection: argmin best_f over surviving cells; ties toward smaller
    // eta, then smaller clip — i.e. lexicographically smaller axis values
    // in (eta, clip) order.
    let order_index: Vec<usize> = {
        // eta axes first, then clip axes, preserving axis order within kind
        let mut idx: Vec<usize> = (0..grid.axes.len()).collect();
        idx.sort_by_key(|&i| match grid.axes[i].param {
            GridParam::Eta => 0,
            GridParam::Clip => 1,
        });
        idx
    };
    let mut winner: Option<&GridOutcome> = None;
    for o in &outcomes {
        if !o.result.status.converged() {
            continue;
        }
        let better = match winner {
            None => true,
            Some(w) => {
                let key = |g: &GridOutcome| {
                    let mut k = vec![g.result.best_f];
                    for &i in &order_index {
                        k.push(g.values[i]);
                    }
                    k
                };
                key(o) < key(w)
            }
        };
        if better {
            winner = Some(o);
        }
    }
    let winner = winner.ok_or(HarnessError::AllDiverged)?;
    let selection = Selection {
        params: grid
            .axes
            .iter()
            .zip(&winner.values)
            .map(|(axis, &v)| (axis.param.as_str().to_string(), ClipValue(v)))
            .collect(),
        best_f: winner.result.best_f,
    };
    Ok((outcomes, selection))
}

fn grid_csv(grid: &GridSpec, outcomes: &[GridOutcome]) -> String {
    let mut out = String::new();
    for axis in &grid.axes {
        out.push_str(axis.param.as_str());
        out.push(',');
    }
    out.push_str("status,best_f,best_index,final_f\n");
    for o in outcomes {
        for &v in &o.values {
            out.push_str(&format_f64(v));
            out.push(',');
        }
        out.push_str(o.result.status.as_str());
        out.push(',');
        out.push_str(&format_f64(o.result.best_f));
        out.push(',');
        out.push_str(&o.result.best_index.to_string());
        out.push(',');
        out.push_str(&format_f64(o.result.final_f()));
        out.push('\n');
    }
    out
}

/// Run a grid search and persist `grid.csv` (one row per cell, row-major
/// axis order) and `selection.json` under `out_dir`.
pub fn grid_search(grid: &GridSpec, out_dir: &Path) -> Result<Selection, HarnessError> {
    let (outcomes, selection) = evaluate_grid(grid)?;
    fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let csv_path = out_dir.join("grid.csv");
    fs::write(&csv_path, grid_csv(grid, &outcomes)).map_err(|e| HarnessError::io(&csv_path, e))?;
    let sel_path = out_dir.join("selection.json");
    fs::write(&sel_path, to_json_bytes(&selection)?).map_err(|e| HarnessError::io(&sel_path, e))?;
    Ok(selection)
}
