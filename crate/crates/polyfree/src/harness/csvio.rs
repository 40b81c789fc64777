//! Deterministic CSV persistence for run traces.
//!
//! Columns are exactly `t,f_val,grad_norm,stepsize,dist_to_opt_sq`; the last
//! cell is empty when the optimum is unknown. Floats are written with the
//! shortest representation that parses back to the identical bits, so a
//! write/read round trip is lossless.

use std::fs;
use std::path::Path;

use crate::core::IterateRecord;

use super::HarnessError;

pub const TRACE_HEADER: &str = "t,f_val,grad_norm,stepsize,dist_to_opt_sq";

/// Shortest round-trip decimal form of `v` (infinities as `inf`/`-inf`).
pub fn format_f64(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{v}")
}

fn parse_f64(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

/// Render a trace as CSV text.
pub fn trace_to_csv(trace: &[IterateRecord]) -> String {
    let mut out = String::with_capacity(32 * (trace.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for rec in trace {
        out.push_str(&rec.t.to_string());
        out.push(',');
        out.push_str(&format_f64(rec.f_val));
        out.push(',');
        out.push_str(&format_f64(rec.grad_norm));
        out.push(',');
        out.push_str(&format_f64(rec.stepsize));
        out.push(',');
        if let Some(d) = rec.dist_to_opt_sq {
            out.push_str(&format_f64(d));
        }
        out.push('\n');
    }
    out
}

pub fn write_trace_csv(path: &Path, trace: &[IterateRecord]) -> Result<(), HarnessError> {
    fs::write(path, trace_to_csv(trace)).map_err(|e| HarnessError::io(path, e))
}

/// Parse a trace CSV written by [`write_trace_csv`].
pub fn read_trace_csv(path: &Path) -> Result<Vec<IterateRecord>, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_trace_csv(&text)
}

pub fn parse_trace_csv(text: &str) -> Result<Vec<IterateRecord>, HarnessError> {
    let bad = |line: usize, message: &str| HarnessError::MalformedCsv {
        line,
        message: message.to_string(),
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == TRACE_HEADER => {}
        _ => return Err(bad(1, "missing or unexpected header")),
    }
    let mut trace = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 5 {
            return Err(bad(idx + 1, "expected 5 columns"));
        }
        let t: usize = cells[0]
            .parse()
            .map_err(|_| bad(idx + 1, "bad iteration index"))?;
        let f_val = parse_f64(cells[1]).ok_or_else(|| bad(idx + 1, "bad f_val"))?;
        let grad_norm = parse_f64(cells[2]).ok_or_else(|| bad(idx + 1, "bad grad_norm"))?;
        let stepsize = parse_f64(cells[3]).ok_or_else(|| bad(idx + 1, "bad stepsize"))?;
        let dist_to_opt_sq = if cells[4].is_empty() {
            None
        } else {
            Some(parse_f64(cells[4]).ok_or_else(|| bad(idx + 1, "bad dist_to_opt_sq"))?)
        };
        trace.push(IterateRecord {
            t,
            f_val,
            grad_norm,
            stepsize,
            dist_to_opt_sq,
        });
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bitwise_lossless() {
        let trace = vec![
            IterateRecord {
                t: 0,
                f_val: 15.930555555555555,
                grad_norm: 9.444444444444445,
                stepsize: 0.1673875432525952,
                dist_to_opt_sq: Some(25.0),
            },
            IterateRecord {
                t: 1,
                f_val: 1.0 + f64::EPSILON,
                grad_norm: 1e-300,
                stepsize: 0.0,
                dist_to_opt_sq: None,
            },
        ];
        let text = trace_to_csv(&trace);
        let back = parse_trace_csv(&text).unwrap();
        assert_eq!(trace.len(), back.len());
        for (a, b) in trace.iter().zip(&back) {
            assert_eq!(a.t, b.t);
            assert_eq!(a.f_val.to_bits(), b.f_val.to_bits());
            assert_eq!(a.grad_norm.to_bits(), b.grad_norm.to_bits());
            assert_eq!(a.stepsize.to_bits(), b.stepsize.to_bits());
            assert_eq!(
                a.dist_to_opt_sq.map(f64::to_bits),
                b.dist_to_opt_sq.map(f64::to_bits)
            );
        }
    }

    #[test]
    fn header_is_exact() {
        let text = trace_to_csv(&[]);
        assert_eq!(text, "t,f_val,grad_norm,stepsize,dist_to_opt_sq\n");
        assert!(parse_trace_csv("nope\n").is_err());
    }

    #[test]
    fn malformed_rows_are_reported_with_line_numbers() {
        let text = "t,f_val,grad_norm,stepsize,dist_to_opt_sq\n0,1.0,2.0\n";
        match parse_trace_csv(text) {
            Err(HarnessError::MalformedCsv { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected malformed csv, got {other:?}"),
        }
    }

    #[test]
    fn decimal_format_uses_dot_and_no_separators() {
        assert_eq!(format_f64(1234567.25), "1234567.25");
        assert_eq!(format_f64(0.1), "0.1");
        assert_eq!(format_f64(f64::INFINITY), "inf");
    }
}
