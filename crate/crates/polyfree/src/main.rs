use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use polyfree::harness::{
    emit_plot, grid_search, read_trace_csv, run_experiment, run_named_check, ExperimentConfig,
    GridSpec, HarnessError,
};

/// Deterministic first-order optimization experiments: runs, grid search,
/// inequality certificates, and plots.
#[derive(Parser)]
#[command(name = "polyfree", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute every run in a JSON experiment config; writes one CSV trace
    /// per run plus report.json into the output directory.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a Cartesian hyperparameter grid; writes grid.csv and
    /// selection.json into the output directory.
    Grid {
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate one named certificate check against a trace CSV and print
    /// the report as JSON.
    Verify {
        trace: PathBuf,
        /// One of: lemma_a1, lemma_a2, prop_3_1, distance_monotone, hessian.
        #[arg(long)]
        check: String,
        /// JSON object with the check's parameters (e.g.
        /// '{"rule":"polyak","l0":1.0,"l1":1.0}').
        #[arg(long)]
        params: String,
    },
    /// Render a report.json (and its trace CSVs) to an SVG chart.
    Plot {
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(serde_json::from_str(&text)?)
}

fn dispatch(cmd: Cmd) -> Result<(), HarnessError> {
    match cmd {
        Cmd::Run { config, out } => {
            let cfg: ExperimentConfig = read_json(&config)?;
            let report = run_experiment(&cfg, &out)?;
            eprintln!(
                "wrote {} run(s) and report.json to {}",
                report.runs.len(),
                out.display()
            );
            Ok(())
        }
        Cmd::Grid { grid, out } => {
            let spec: GridSpec = read_json(&grid)?;
            let selection = grid_search(&spec, &out)?;
            let params: Vec<String> = selection
                .params
                .iter()
                .map(|(name, v)| format!("{name}={}", polyfree::harness::format_f64(v.0)))
                .collect();
            eprintln!(
                "selected {} with best_f={}",
                params.join(", "),
                polyfree::harness::format_f64(selection.best_f)
            );
            Ok(())
        }
        Cmd::Verify {
            trace,
            check,
            params,
        } => {
            let records = read_trace_csv(&trace)?;
            let report = run_named_check(&check, &records, &params)?;
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            print!("{text}");
            Ok(())
        }
        Cmd::Plot { report, out } => {
            let rep: polyfree::harness::ExperimentReport = read_json(&report)?;
            let dir = report
                .parent()
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("."));
            emit_plot(&rep, &dir, &out)?;
            eprintln!("wrote {}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
