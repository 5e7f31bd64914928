// SPDX-License-Identifier: Apache-2.0

//! `harnack-lab`: runs one pipeline described by a JSON config and writes
//! `report.json`, CSV artifacts and `meta.json` to the output directory.
//!
//! Exit codes: 0 success, 1 config error, 2 numerical failure, 3 hypothesis violation.

mod commands;
mod config;
mod names;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::Parser;
use serde_json::{json, Value};

use commands::{Failure, EXIT_CONFIG};

#[derive(Debug, Parser)]
#[command(name = "harnack-lab", version, about = "Degenerate elliptic, obstacle, boundary Harnack and majorant series pipelines")]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `out` key (default `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed recorded in `meta.json` for randomized runs.
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress the summary on stdout.
    #[arg(long)]
    quiet: bool,
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn run(args: &Args) -> Result<u8> {
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0);
    let clock = Instant::now();
    let text = std::fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let (cfg, cfg_out) = config::parse(&text)?;
    let out = args.out.clone().or(cfg_out).unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;

    let result = commands::run(&cfg, &out);
    let (report, code) = match result {
        Ok(mut r) => {
            r["command"] = json!(cfg.name());
            r["status"] = json!("ok");
            (r, 0)
        }
        Err(f) => (failure_report(cfg.name(), &f), f.code),
    };
    write_json(&out.join("report.json"), &report)?;
    let meta = json!({
        "tool": "harnack-lab",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cfg.name(),
        "config": args.config.display().to_string(),
        "seed": args.seed,
        "started_unix_ms": started as u64,
        "elapsed_ms": clock.elapsed().as_millis() as u64,
        "exit_code": code,
    });
    write_json(&out.join("meta.json"), &meta)?;

    if code != 0 {
        eprintln!("{}: {}", cfg.name(), report["error"]["message"].as_str().unwrap_or("failed"));
    } else if !args.quiet {
        println!("{}: ok, artifacts in {}", cfg.name(), out.display());
    }
    Ok(code)
}

fn failure_report(command: &str, f: &Failure) -> Value {
    json!({ "command": command, "status": "failed", "error": f.to_json() })
}
