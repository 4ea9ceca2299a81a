//! End-to-end runs of the `tfop` binary: exit codes, diagnostics and report
//! files.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tfop(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tfop")).args(args).current_dir(dir).output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn verify_exit_code_follows_the_records() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify");
    let o = tfop(&["verify", "--out", out.to_str().unwrap()], dir.path());
    let report: Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    let records = report["records"].as_array().unwrap();
    assert!(records.len() >= 40, "{} records", records.len());
    let failed: Vec<&str> = records.iter().filter(|r| r["pass"] == false).map(|r| r["name"].as_str().unwrap()).collect();
    let expected = if failed.is_empty() { 0 } else { 3 };
    assert_eq!(o.status.code(), Some(expected), "failed records: {failed:?}");
    let stdout = String::from_utf8_lossy(&o.stdout);
    for name in &failed {
        assert!(stdout.contains(&format!("FAIL {name}:")), "{name} missing from\n{stdout}");
    }
    assert!(stdout.contains(&format!("{} checks, {} failed", records.len(), failed.len())));
    for r in records {
        assert!(!r["anchor"].as_str().unwrap().is_empty(), "record without a description: {r}");
    }
}

#[test]
fn zero_phase_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "zero.json",
        r#"{"phase": {"kind": "quadratic", "matrix": [[0,0,0],[0,0,0],[0,0,0]], "linear": [0,0,0]}}"#,
    );
    for cmd in ["verify", "bound"] {
        let o = tfop(&[cmd, "--config", &cfg], dir.path());
        assert_eq!(o.status.code(), Some(2), "{cmd}: {}", stderr(&o));
        assert!(stderr(&o).contains("degenerate phase"), "{}", stderr(&o));
    }
}

#[test]
fn malformed_configs_are_configuration_errors() {
    let dir = tempfile::tempdir().unwrap();
    let syntax = write(dir.path(), "syntax.json", "{\n  \"seed\": 3,,\n}");
    let o = tfop(&["verify", "--config", &syntax], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let field = write(dir.path(), "field.json", r#"{"grid": {"half_width": 8, "points": 7}}"#);
    let o = tfop(&["bound", "--config", &field], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("grid.points"), "{}", stderr(&o));

    let unknown = write(dir.path(), "unknown.json", r#"{"sede": 3}"#);
    assert_eq!(tfop(&["norms", "--config", &unknown], dir.path()).status.code(), Some(1));
    assert_eq!(tfop(&["norms", "--config", "missing.json"], dir.path()).status.code(), Some(1));
}

#[test]
fn bound_report_has_every_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = tfop(&["bound", "--seed", "4"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    for field in ["lhs", "d", "amp_norm", "phase_norm", "ratio", "metadata"] {
        assert!(!report["data"][field].is_null(), "missing {field}");
    }
    assert_eq!(report["config"]["seed"], 4);
    assert_eq!(report["data"]["metadata"]["lhs_kind"], "weighted_singular_value");
}

#[test]
fn csv_reports_and_thread_cap() {
    let dir = tempfile::tempdir().unwrap();
    let o =
        Command::new(env!("CARGO_BIN_EXE_tfop")).args(["schatten", "--format", "csv"]).env("TFOP_THREADS", "1").output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("kind,name,anchor,value,tolerance,pass\n"));
    assert!(text.lines().any(|l| l.starts_with("data,")));
    let bad = Command::new(env!("CARGO_BIN_EXE_tfop"))
        .arg("norms")
        .env("TFOP_THREADS", "zero")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn report_runs_the_configured_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "k.json", r#"{"experiment": "kernel_identities", "seed": 5}"#);
    let o = tfop(&["report", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["config"]["experiment"], "kernel_identities");
}
