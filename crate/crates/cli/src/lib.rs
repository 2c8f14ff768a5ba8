//! Command-line front end of the `nulab` library.
//!
//! Every run writes `report.json`, optionally `sweep.csv` with its
//! `COLUMNS.md`, and `manifest.json`. The report depends only on the
//! configuration, so repeated runs produce identical bytes; timing lives in
//! the manifest.

pub mod commands;
pub mod config;
pub mod output;

use std::path::Path;
use std::time::Duration;

use serde_json::{json, Value};

use config::{Command, Run, RunConfig, SCHEMA_VERSION};
use output::{to_json_bytes, Artifact, FileEntry};

/// Exit status of a run whose computation failed.
pub const EXIT_COMPUTATION: i32 = 1;
/// Exit status of a configuration rejected before any computation.
pub const EXIT_SCHEMA: i32 = 2;

pub struct Rendered {
    pub artifacts: Vec<Artifact>,
    pub exit_code: i32,
}

fn report_document(run: &Run, status: &str, result: Value, diagnostic: Option<Value>) -> Vec<u8> {
    let mut doc = json!({
        "schema_version": SCHEMA_VERSION,
        "command": run.command.name(),
        "config_digest": run.digest(),
        "status": status,
        "result": result,
    });
    if let Some(d) = diagnostic {
        doc["diagnostic"] = d;
    }
    to_json_bytes(&doc)
}

fn render_single(run: &Run, prefix: &str) -> Rendered {
    match commands::execute(run) {
        Ok(outcome) => {
            let mut artifacts = vec![Artifact {
                name: format!("{prefix}report.json"),
                bytes: report_document(run, "ok", outcome.result, None),
            }];
            if let Some(table) = outcome.table {
                artifacts.push(Artifact { name: format!("{prefix}sweep.csv"), bytes: table.to_csv() });
                artifacts.push(Artifact {
                    name: format!("{prefix}COLUMNS.md"),
                    bytes: table.columns_markdown(run.command.name()),
                });
            }
            Rendered { artifacts, exit_code: 0 }
        }
        Err(e) => {
            let diagnostic = json!({ "kind": e.kind(), "message": e.to_string() });
            Rendered {
                artifacts: vec![Artifact {
                    name: format!("{prefix}report.json"),
                    bytes: report_document(run, "error", Value::Null, Some(diagnostic)),
                }],
                exit_code: EXIT_COMPUTATION,
            }
        }
    }
}

fn slug(name: &str) -> String {
    name.replace(' ', "-")
}

/// Executes a validated run and returns every file it produces except the
/// manifest.
pub fn render(run: &Run) -> Rendered {
    let Command::Report(args) = &run.command else {
        return render_single(run, "");
    };
    let configs = if args.runs.is_empty() { default_suite() } else { args.runs.clone() };
    let mut artifacts = Vec::new();
    let mut entries = Vec::new();
    let mut failed = false;
    for (i, cfg) in configs.iter().enumerate() {
        let sub = match cfg.validate() {
            Ok(sub) => sub,
            Err(errs) => {
                failed = true;
                entries.push(json!({ "index": i, "command": cfg.command, "status": "invalid", "errors": errs }));
                continue;
            }
        };
        let prefix = format!("runs/{:02}-{}/", i, slug(sub.command.name()));
        let r = render_single(&sub, &prefix);
        failed |= r.exit_code != 0;
        let report = &r.artifacts[0];
        entries.push(json!({
            "index": i,
            "command": sub.command.name(),
            "config_digest": sub.digest(),
            "status": if r.exit_code == 0 { "ok" } else { "error" },
            "report": report.name,
            "report_sha256": output::sha256_hex(&report.bytes),
        }));
        artifacts.extend(r.artifacts);
    }
    let status = if failed { "error" } else { "ok" };
    let mut all = vec![Artifact {
        name: "report.json".into(),
        bytes: report_document(run, status, json!({ "runs": entries }), None),
    }];
    all.extend(artifacts);
    Rendered { artifacts: all, exit_code: if failed { EXIT_COMPUTATION } else { 0 } }
}

/// Cheap configurations covering every module.
pub fn default_suite() -> Vec<RunConfig> {
    let raw = json!([
        { "command": "exponents", "params": { "n": 3, "p": 4, "q": 2, "s": 8 } },
        { "command": "norm", "args": { "a": -1.0, "b": -2.0 } },
        { "command": "solve", "args": { "case": "poisson" }, "params": { "n": 3 }, "solver": { "cells": 1024 } },
        { "command": "example blowup", "args": { "kmax": 30, "example": { "id": "EX1" } }, "params": { "n": 3, "q": 2 } },
        { "command": "example membership", "args": { "s_list": [6.0, 7.2], "example": { "id": "EX1" } }, "params": { "n": 3, "q": 2 } },
        { "command": "verify harnack" },
        { "command": "verify holder", "args": { "case": "smooth" } },
        { "command": "verify moser-chain", "args": { "case": "smooth" } },
        { "command": "verify log-bound", "args": { "coefficient": "example", "example": { "id": "EX1" } }, "params": { "n": 3, "q": 2 } }
    ]);
    serde_json::from_value(raw).expect("default suite is well formed")
}

pub fn manifest(config: &RunConfig, digest: &str, files: &[FileEntry], exit_code: i32, wall: Duration) -> Vec<u8> {
    to_json_bytes(&json!({
        "schema_version": SCHEMA_VERSION,
        "tool": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "command": config.command,
        "config": config,
        "config_digest": digest,
        "exit_code": exit_code,
        "files": files,
        "wall_time_seconds": wall.as_secs_f64(),
    }))
}

/// Writes the artifacts and the manifest; returns the exit code.
pub fn execute_and_write(run: &Run, dir: &Path) -> std::io::Result<i32> {
    let start = std::time::Instant::now();
    let rendered = render(run);
    let files = output::write_all(dir, &rendered.artifacts)?;
    let config = run.to_config();
    let bytes = manifest(&config, &run.digest(), &files, rendered.exit_code, start.elapsed());
    output::write_all(dir, &[Artifact { name: "manifest.json".into(), bytes }])?;
    Ok(rendered.exit_code)
}
