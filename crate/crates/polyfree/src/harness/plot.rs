//! Deterministic SVG rendering of an experiment report: one log-scale panel
//! per rule family, one best-so-far gap curve per run.
//!
//! The y quantity is `f_best(t) − f⋆` (best-so-far, against the objective's
//! known minimum; against the rule's floor when no minimum is known),
//! clamped below at 1e−16 so curves that reach the floating-point floor stay
//! finite on the log scale.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::verify::best_curve;

use super::csvio::read_trace_csv;
use super::exec::{ExperimentReport, RunReport};
use super::HarnessError;

/// Log-scale floor for plotted gaps.
pub const PLOT_FLOOR: f64 = 1e-16;

const PANEL_W: f64 = 320.0;
const PANEL_H: f64 = 240.0;
const MARGIN_L: f64 = 56.0;
const MARGIN_R: f64 = 12.0;
const MARGIN_T: f64 = 28.0;
const MARGIN_B: f64 = 34.0;
const COLS: usize = 3;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

struct Line {
    label: String,
    points: Vec<(usize, f64)>, // (t, clamped gap)
}

struct Panel {
    title: String,
    lines: Vec<Line>,
}

fn px(v: f64) -> String {
    format!("{v:.2}")
}

fn gap_floor(run: &RunReport) -> f64 {
    // Known minimum of the configured objective; every supported objective
    // has one, but fall back to the rule's floor for robustness.
    run.config.objective.f_star()
}

fn render_panel(svg: &mut String, panel: &Panel, x0: f64, y0: f64) {
    let plot_w = PANEL_W - MARGIN_L - MARGIN_R;
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let left = x0 + MARGIN_L;
    let top = y0 + MARGIN_T;

    let t_max = panel
        .lines
        .iter()
        .flat_map(|l| l.points.iter().map(|p| p.0))
        .max()
        .unwrap_or(1)
        .max(1);
    let mut log_min = f64::INFINITY;
    let mut log_max = f64::NEG_INFINITY;
    for line in &panel.lines {
        for &(_, y) in &line.points {
            let ly = y.log10();
            log_min = log_min.min(ly);
            log_max = log_max.max(ly);
        }
    }
    let mut lo = log_min.floor();
    let mut hi = log_max.ceil();
    if !lo.is_finite() || !hi.is_finite() {
        lo = -1.0;
        hi = 1.0;
    }
    if hi - lo < 1.0 {
        hi = lo + 1.0;
    }

    let map_x = |t: usize| left + plot_w * (t as f64) / (t_max as f64);
    let map_y = |y: f64| top + plot_h * (hi - y.log10()) / (hi - lo);

    let _ = write!(
        svg,
        "<g class=\"panel\">\n<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n",
        px(left),
        px(top),
        px(plot_w),
        px(plot_h)
    );
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        px(x0 + PANEL_W / 2.0),
        px(y0 + 18.0),
        panel.title
    );

    // y ticks at integer decades, thinned to at most ~6 labels
    let span = (hi - lo) as i64;
    let step = ((span as f64) / 6.0).ceil().max(1.0) as i64;
    let mut d = lo as i64;
    while d <= hi as i64 {
        let y = top + plot_h * ((hi - d as f64) / (hi - lo));
        let _ = write!(
            svg,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#cccccc\" stroke-width=\"0.5\"/>\n",
            px(left),
            px(y),
            px(left + plot_w),
            px(y)
        );
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"9\" text-anchor=\"end\">1e{}</text>\n",
            px(left - 4.0),
            px(y + 3.0),
            d
        );
        d += step;
    }
    // x ticks at 0, T/2, T
    for t in [0, t_max / 2, t_max] {
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"9\" text-anchor=\"middle\">{}</text>\n",
            px(map_x(t)),
            px(top + plot_h + 12.0),
            t
        );
    }
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">iteration</text>\n",
        px(left + plot_w / 2.0),
        px(top + plot_h + 26.0)
    );

    for (i, line) in panel.lines.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts = String::new();
        for &(t, y) in &line.points {
            let _ = write!(pts, "{},{} ", px(map_x(t)), px(map_y(y)));
        }
        let _ = write!(
            svg,
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\" points=\"{}\"/>\n",
            color,
            pts.trim_end()
        );
        // legend entry
        let ly = top + 10.0 + 12.0 * i as f64;
        let _ = write!(
            svg,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
            px(left + plot_w - 70.0),
            px(ly),
            px(left + plot_w - 54.0),
            px(ly),
            color
        );
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"9\">{}</text>\n",
            px(left + plot_w - 50.0),
            px(ly + 3.0),
            line.label
        );
    }
    svg.push_str("</g>\n");
}

/// Render `report` (whose trace files live under `report_dir`) to an SVG at
/// `out_path`. One panel per rule family, in order of first appearance.
pub fn emit_plot(
    report: &ExperimentReport,
    report_dir: &Path,
    out_path: &Path,
) -> Result<(), HarnessError> {
    let mut panels: Vec<Panel> = Vec::new();
    for run in &report.runs {
        let trace = read_trace_csv(&report_dir.join(&run.trace_csv))?;
        if trace.is_empty() {
            continue;
        }
        let f_star = gap_floor(run);
        let points: Vec<(usize, f64)> = best_curve(&trace)
            .into_iter()
            .map(|(t, fb)| (t, (fb - f_star).max(PLOT_FLOOR)))
            .collect();
        let kind = run.config.rule.kind_str().to_string();
        let line = Line {
            label: run.label.clone(),
            points,
        };
        match panels.iter_mut().find(|p| p.title == kind) {
            Some(p) => p.lines.push(line),
            None => panels.push(Panel {
                title: kind,
                lines: vec![line],
            }),
        }
    }
    if panels.is_empty() {
        return Err(HarnessError::NothingToPlot);
    }

    let rows = panels.len().div_ceil(COLS);
    let width = PANEL_W * panels.len().min(COLS) as f64;
    let height = PANEL_H * rows as f64;
    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        px(width),
        px(height),
        px(width),
        px(height)
    );
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for (i, panel) in panels.iter().enumerate() {
        let x0 = PANEL_W * (i % COLS) as f64;
        let y0 = PANEL_H * (i / COLS) as f64;
        render_panel(&mut svg, panel, x0, y0);
    }
    svg.push_str("</svg>\n");
    fs::write(out_path, svg).map_err(|e| HarnessError::io(out_path, e))?;
    Ok(())
}
