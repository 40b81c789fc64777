//! End-to-end tests of the CLI subcommands and exit codes.

use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polyfree"))
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

const SMALL_CONFIG: &str = r#"{
  "t": 100,
  "runs": [
    {
      "label": "polyak",
      "objective": { "kind": "quartic", "l0": 1.0, "l1": 1.0, "f_star": 1.0, "x0": [5.0] },
      "rule": { "kind": "polyak", "f_star": 1.0 },
      "verify": ["prop_3_1", "distance_monotone"]
    },
    {
      "label": "clipped",
      "objective": { "kind": "quartic", "l0": 1.0, "l1": 10.0, "f_star": 1.0, "x0": [5.0] },
      "rule": { "kind": "clipped_gd", "eta": 0.1, "clip": 10.0 }
    }
  ]
}"#;

#[test]
fn run_plot_verify_happy_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    write(&cfg, SMALL_CONFIG);
    let out = dir.path().join("out");

    let status = bin().args(["run"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("report.json").is_file());
    assert!(out.join("polyak.csv").is_file());
    assert!(out.join("clipped.csv").is_file());

    let svg = dir.path().join("plot.svg");
    let status = bin()
        .args(["plot"])
        .arg(out.join("report.json"))
        .arg("--out")
        .arg(&svg)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let svg_text = fs::read_to_string(&svg).unwrap();
    assert_eq!(svg_text.matches("class=\"panel\"").count(), 2);

    let output = bin()
        .args(["verify"])
        .arg(out.join("polyak.csv"))
        .args(["--check", "prop_3_1", "--params", r#"{"rule":"polyak","l0":1.0,"l1":1.0}"#])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(report["check_name"], "prop_3_1");
    assert_eq!(report["n_violations"], 0);
}

#[test]
fn invalid_config_exits_1_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    write(
        &cfg,
        r#"{
  "t": 100,
  "runs": [
    {
      "label": "bad",
      "objective": { "kind": "quartic", "l0": 1.0, "l1": 0.0, "f_star": 1.0, "x0": [5.0] },
      "rule": { "kind": "gd", "eta": 0.1 }
    }
  ]
}"#,
    );
    let output = bin()
        .args(["run"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("runs[0].objective.l1"), "stderr: {stderr}");
}

#[test]
fn all_diverged_grid_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    write(
        &grid,
        r#"{
  "t": 100,
  "base": {
    "label": "g",
    "objective": { "kind": "quartic", "l0": 1.0, "l1": 1.0, "f_star": 1.0, "x0": [5.0] },
    "rule": { "kind": "gd", "eta": 0.1 }
  },
  "axes": [ { "param": "eta", "values": [1000000.0, 10000000.0] } ]
}"#,
    );
    let output = bin()
        .args(["grid"])
        .arg(&grid)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unknown_check_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    write(
        &trace,
        "t,f_val,grad_norm,stepsize,dist_to_opt_sq\n0,2.0,1.0,0.5,4.0\n1,1.5,0.5,0.0,2.0\n",
    );
    let output = bin()
        .args(["verify"])
        .arg(&trace)
        .args(["--check", "nonsense", "--params", "{}"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn missing_input_file_exits_1() {
    let output = bin()
        .args(["run", "/nonexistent/config.json", "--out", "/tmp/never"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn worker_override_does_not_change_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    write(&cfg, SMALL_CONFIG);
    let out1 = dir.path().join("o1");
    let out2 = dir.path().join("o2");
    assert!(bin()
        .env("POLYFREE_WORKERS", "1")
        .args(["run"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out1)
        .status()
        .unwrap()
        .success());
    assert!(bin()
        .env("POLYFREE_WORKERS", "4")
        .args(["run"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out2)
        .status()
        .unwrap()
        .success());
    for name in ["report.json", "polyak.csv", "clipped.csv"] {
        assert_eq!(
            fs::read(out1.join(name)).unwrap(),
            fs::read(out2.join(name)).unwrap(),
            "{name} differs across worker counts"
        );
    }
}
