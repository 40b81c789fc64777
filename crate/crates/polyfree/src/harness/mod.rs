//! Experiment orchestration: JSON-configured runs, grid search, persistence
//! (CSV traces, JSON reports, SVG plots), and the CLI backend.
//!
//! All outputs are byte-deterministic: identical configs produce identical
//! artifacts on the same platform, regardless of worker count.

mod checks;
mod config;
mod csvio;
mod exec;
mod grid;
mod plot;

pub use checks::{run_named_check, CheckRequest};
pub use config::{
    validate, CheckName, ClipValue, ConfigError, ExperimentConfig, ObjectiveSpec, OverridesSpec,
    RuleSpec, RunConfig,
};
pub use csvio::{format_f64, read_trace_csv, write_trace_csv};
pub use exec::{execute, run_experiment, worker_count, ExperimentReport, RunOutcome, RunReport};
pub use grid::{evaluate_grid, grid_search, GridAxis, GridOutcome, GridParam, GridSpec, Selection};
pub use plot::emit_plot;

use thiserror::Error;

/// Errors surfaced by harness entry points.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed trace csv at line {line}: {message}")]
    MalformedCsv { line: usize, message: String },
    #[error("every grid cell diverged; nothing to select")]
    AllDiverged,
    #[error("no run in the report produced any plottable record")]
    NothingToPlot,
    #[error("verification: {0}")]
    Verify(#[from] crate::verify::VerifyError),
    #[error("{0}")]
    Run(#[from] crate::core::RunError),
}

impl HarnessError {
    fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// CLI exit code: 1 for validation/input problems, 2 when a grid had no
    /// surviving cell.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::AllDiverged => 2,
            _ => 1,
        }
    }
}
