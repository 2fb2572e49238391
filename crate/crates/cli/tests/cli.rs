use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use stit_core::stit::parse_tessellation;

fn stit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stit")).args(args).output().unwrap()
}

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let mut full = vec!["--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()];
    full.extend_from_slice(args);
    stit(&full)
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("out/summary.json")).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(stit(&["--help"]).status.code(), Some(0));
    assert_eq!(stit(&["--version"]).status.code(), Some(0));
    assert_eq!(stit(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(stit(&["simulate", "--config", "/nonexistent/run.toml"]).status.code(), Some(1));
}

#[test]
fn config_errors_name_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), "seed = 1\n[simulate]\nreplicatse = 3\n", &["simulate"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("replicatse"), "{err}");
}

#[test]
fn invalid_parameters_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), "t = -1.0\n", &["simulate"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(tmp.path(), "", &["variance-scan", "--replicates", "1"]);
    assert_eq!(out.status.code(), Some(1));
    // an outer probe overlapping the inner block
    let out = run(
        tmp.path(),
        "[beta]\nb_values = [1.0]\nouter = [{ lower = [0.0, 0.0], upper = [0.2, 0.2] }]\n",
        &["beta"],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn failed_assertion_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let single = "[measure]\nkind = \"discrete\"\natoms = [{ angle = 0.0, weight = 1.0 }]\n";
    assert_eq!(run(tmp.path(), single, &["check-assumptions"]).status.code(), Some(0));
    assert_eq!(summary(tmp.path())["passed"], Value::Bool(false));
    assert_eq!(run(tmp.path(), single, &["--assert", "check-assumptions"]).status.code(), Some(2));
    assert_eq!(run(tmp.path(), "", &["--assert", "check-assumptions"]).status.code(), Some(0));
}

#[test]
fn simulate_outputs_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), "seed = 5\nt = 2.0\n", &["simulate"]);
    assert!(out.status.success());
    let dir = tmp.path().join("out");
    let text = std::fs::read_to_string(dir.join("tessellation.txt")).unwrap();
    let rec = parse_tessellation(&text).unwrap();
    let (h, rows) = csv_rows(&dir.join("simulate.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][column(&h, "cells")], rec.cells.len().to_string());
    assert_eq!(rows[0][column(&h, "events")], rec.events.len().to_string());
    assert_eq!(rec.cells.len(), rec.events.len() + 1);
    assert_eq!(rec.seed, 5);
    let svg = std::fs::read_to_string(dir.join("tessellation.svg")).unwrap();
    assert_eq!(svg.matches("<line").count(), rec.events.len());
    assert_eq!(summary(tmp.path())["command"], "simulate");
}

#[test]
fn tiny_time_gives_the_bare_window() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run(tmp.path(), "t = 1e-12\n", &["simulate"]).status.success());
    let dir = tmp.path().join("out");
    let rec = parse_tessellation(&std::fs::read_to_string(dir.join("tessellation.txt")).unwrap()).unwrap();
    assert_eq!(rec.cells.len(), 1);
    let svg = std::fs::read_to_string(dir.join("tessellation.svg")).unwrap();
    assert!(svg.contains("<polygon") && !svg.contains("<line"));
}

#[test]
fn several_replicates_get_numbered_files() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run(tmp.path(), "dim = 3\n[simulate]\nreplicates = 3\n", &["simulate"]).status.success());
    let dir = tmp.path().join("out");
    for i in 0..3 {
        assert!(dir.join(format!("tessellation_{i:04}.txt")).exists());
    }
    let (_, rows) = csv_rows(&dir.join("simulate.csv"));
    assert_eq!(rows.len(), 3);
}

#[test]
fn functionals_csv_matches_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "seed = 2\n[functionals]\nreplicates = 4\nfunctionals = [\"boundary_mass\", \"vertex_count\", \"visible:count\"]\n";
    assert!(run(tmp.path(), cfg, &["--assert", "functionals"]).status.success());
    let (h, rows) = csv_rows(&tmp.path().join("out/functionals.csv"));
    let s = summary(tmp.path());
    for (f, name, params) in [
        ("boundary_mass", "boundary_mass", ""),
        ("vertex_count", "vertex_count", ""),
        ("visible:count", "visible", "count"),
    ] {
        let union: Vec<f64> = rows
            .iter()
            .filter(|r| {
                r[column(&h, "functional")] == name && r[column(&h, "params")] == params && r[column(&h, "region")] == "union"
            })
            .map(|r| r[column(&h, "value")].parse().unwrap())
            .collect();
        assert_eq!(union.len(), 4);
        let mean = union.iter().sum::<f64>() / 4.0;
        let reported = s["estimates"][f]["mean_union"].as_f64().unwrap();
        assert!((mean - reported).abs() <= 1e-12 * reported.abs().max(1.0), "{f}: {mean} vs {reported}");
    }
    assert!(!rows.iter().any(|r| r[column(&h, "value")] == "-0"));
}

#[test]
fn functionals_accept_a_single_replicate() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), "[functionals]\nreplicates = 1\n", &["--assert", "functionals"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn variance_scan_csv_matches_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "[variance_scan]\nreplicates = 30\nn_values = [1, 2, 4]\n";
    assert!(run(tmp.path(), cfg, &["variance-scan"]).status.success());
    let (h, rows) = csv_rows(&tmp.path().join("out/variance_scan.csv"));
    let s = summary(tmp.path());
    let reported: Vec<f64> = s["estimates"]["variances"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let from_csv: Vec<f64> = rows.iter().map(|r| r[column(&h, "variance")].parse().unwrap()).collect();
    assert_eq!(reported, from_csv);
    let ns: Vec<&str> = rows.iter().map(|r| r[column(&h, "n")].as_str()).collect();
    assert_eq!(ns, ["1", "2", "4"]);
    assert_eq!(s["replicates"], 30);
}

#[test]
fn beta_csv_matches_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "seed = 4\n[beta]\nreplicates = 200\nb_values = [1.0, 4.0]\n";
    assert!(run(tmp.path(), cfg, &["beta"]).status.success());
    let (h, rows) = csv_rows(&tmp.path().join("out/beta.csv"));
    let s = summary(tmp.path());
    let reported: Vec<f64> = s["estimates"]["values"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let from_csv: Vec<f64> = rows.iter().map(|r| r[column(&h, "value")].parse().unwrap()).collect();
    assert_eq!(reported, from_csv);
    for r in &rows {
        let v: f64 = r[column(&h, "value")].parse().unwrap();
        assert!((0.0..=1.0).contains(&v));
        assert_eq!(r[column(&h, "N")], "200");
    }
}

#[test]
fn seed_flag_overrides_config_and_changes_hash() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run(tmp.path(), "seed = 1\n", &["simulate"]).status.success());
    let a = summary(tmp.path());
    let first = std::fs::read(tmp.path().join("out/tessellation.txt")).unwrap();
    assert!(run(tmp.path(), "seed = 1\n", &["--seed", "9", "simulate"]).status.success());
    let b = summary(tmp.path());
    assert_eq!(b["seed"], 9);
    assert_ne!(a["plan_hash"], b["plan_hash"]);
    assert_ne!(first, std::fs::read(tmp.path().join("out/tessellation.txt")).unwrap());
}

#[test]
fn ergodic_scan_writes_trajectories() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "[ergodic_scan]\nreplicates = 10\nn_values = [1, 2]\n";
    assert!(run(tmp.path(), cfg, &["ergodic-scan"]).status.success());
    let (_, rows) = csv_rows(&tmp.path().join("out/trajectories.csv"));
    assert_eq!(rows.len(), 20);
    let (h, rows) = csv_rows(&tmp.path().join("out/ergodic_scan.csv"));
    assert_eq!(rows.len(), 2);
    // power functionals are not negated, only superadditive ones are
    assert!(rows.iter().all(|r| r[column(&h, "negated")] == "false"));
}
