use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nulab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nulab"))
        .env_remove("NULAB_OUTPUT_DIR")
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn exponents_report_exact_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = nulab(dir.path(), &["--n", "3", "--p", "4", "--q", "2", "--s", "8", "exponents"]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(text.contains("\"s0\": 6"), "{text}");
    let doc: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["status"], "ok");
    assert_eq!(doc["command"], "exponents");
    let manifest: Value = serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["exit_code"], 0);
    assert_eq!(manifest["config_digest"], doc["config_digest"]);
}

#[test]
fn schema_errors_exit_two_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out");
    let out = nulab(&target, &["--n", "0", "--q", "2", "example", "blowup", "--id", "EX1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));
    assert!(!target.exists());

    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"command": "exponents", "bogus": 1}"#).unwrap();
    let out = nulab(&target, &["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!target.exists());
}

#[test]
fn computation_errors_exit_one_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    // EX1 needs q > n/2.
    let out = nulab(dir.path(), &["--n", "3", "--q", "1.2", "example", "eval", "--id", "EX1", "--r", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = report(dir.path());
    assert_eq!(doc["status"], "error");
    assert!(doc["diagnostic"]["message"].as_str().unwrap().len() > 0);
}

#[test]
fn blowup_csv_is_increasing() {
    let dir = tempfile::tempdir().unwrap();
    let out = nulab(dir.path(), &["--n", "3", "--q", "2", "example", "blowup", "--id", "EX1"]);
    assert!(out.status.success());
    let mut rdr = csv::Reader::from_path(dir.path().join("sweep.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "u").expect("u column");
    let values: Vec<f64> = rdr.records().map(|r| r.unwrap()[col].parse().unwrap()).collect();
    assert_eq!(values.len(), 29);
    assert!(values.windows(2).all(|w| w[1] > w[0]));
    let columns = std::fs::read_to_string(dir.path().join("COLUMNS.md")).unwrap();
    assert!(columns.contains("`u`"));
}

#[test]
fn environment_overrides_output_flag() {
    let dir = tempfile::tempdir().unwrap();
    let (flag, env) = (dir.path().join("flag"), dir.path().join("env"));
    let out = Command::new(env!("CARGO_BIN_EXE_nulab"))
        .env("NULAB_OUTPUT_DIR", &env)
        .arg("--out")
        .arg(&flag)
        .args(["--n", "3", "--p", "4", "--q", "2", "--s", "8", "exponents"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(env.join("report.json").exists());
    assert!(!flag.exists());
}

#[test]
fn config_file_supersedes_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"command": "exponents", "params": {"n": 4, "p": 4, "q": 3, "s": 8}}"#).unwrap();
    let out = nulab(dir.path(), &["--config", cfg.to_str().unwrap(), "--n", "3", "exponents"]);
    assert!(out.status.success());
    let doc = report(dir.path());
    assert_eq!(doc["result"]["params"]["n"], 4);
}

#[test]
fn report_bundle_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(nulab(a.path(), &["report"]).status.success());
    assert!(nulab(b.path(), &["report"]).status.success());
    let doc = report(a.path());
    let runs = doc["result"]["runs"].as_array().unwrap();
    assert!(runs.iter().all(|r| r["status"] == "ok"));
    for r in runs {
        let name = r["report"].as_str().unwrap();
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
    }
}
