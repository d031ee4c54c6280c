//! Scenario-driven command-line front end.
//!
//! ```text
//! exactme run <scenario> [--out DIR] [--threads N] [--strict]
//! exactme check <scenario>
//! exactme sweep <scenario> --param section.key --values v1,v2,...
//! ```
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure.

pub mod ini;
pub mod run;
pub mod scenario;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

pub use ini::Diagnostic;
pub use run::{run, RunOptions, RunReport, TaskReport, TaskStatus, EXIT_INVALID, EXIT_NUMERICAL, EXIT_OK};
pub use scenario::{parse_scenario, Scenario, Task};

#[derive(Debug, Parser)]
#[command(name = "exactme", version, about = "Exact master equation solver for Fano-Anderson open systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every task of a scenario.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        /// Treat warnings as failures.
        #[arg(long)]
        strict: bool,
    },
    /// Validate a scenario without running it.
    Check { scenario: PathBuf },
    /// Run a scenario once per value of one parameter.
    Sweep {
        scenario: PathBuf,
        /// `section.key` or `section.label.key`.
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Debug, Serialize)]
struct SweepEntry {
    value: String,
    directory: String,
    exit_code: i32,
}

fn read(path: &Path) -> Result<String, i32> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        EXIT_INVALID
    })
}

fn load(path: &Path, text: &str) -> Result<Scenario, i32> {
    parse_scenario(text).map_err(|diags| {
        for d in diags {
            eprintln!("{}: {d}", path.display());
        }
        EXIT_INVALID
    })
}

fn summarize(report: &RunReport) {
    for t in &report.tasks {
        let status = match t.status {
            TaskStatus::Ok => "ok",
            TaskStatus::Failed => "FAILED",
        };
        eprintln!("{:<22} {status:<6} {:>9.3}s {}", t.task, t.wall_time_s, t.error.as_deref().unwrap_or(""));
    }
    eprintln!("output: {}", report.output_directory);
}

/// Executes a parsed command line and returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Check { scenario } => read(&scenario).and_then(|text| load(&scenario, &text)).map(|s| {
            eprintln!("{}: ok ({} task(s), {} steps)", scenario.display(), s.tasks.len(), s.grid.n_steps);
            EXIT_OK
        }),
        Command::Run {
            scenario,
            out,
            threads,
            strict,
        } => read(&scenario).and_then(|text| load(&scenario, &text)).map(|s| {
            let report = run(&s, &RunOptions { out_dir: out, threads, strict });
            summarize(&report);
            report.exit_code
        }),
        Command::Sweep {
            scenario,
            param,
            values,
            out,
            threads,
            strict,
        } => read(&scenario).and_then(|text| sweep(&scenario, &text, &param, &values, out, threads, strict)),
    };
    result.unwrap_or_else(|code| code)
}

fn sweep(
    path: &Path,
    text: &str,
    param: &str,
    values: &[String],
    out: Option<PathBuf>,
    threads: Option<usize>,
    strict: bool,
) -> Result<i32, i32> {
    // Validate every variant before running any of them.
    let mut scenarios = Vec::new();
    for v in values {
        let variant = scenario::override_value(text, param, v).map_err(|d| {
            eprintln!("{}: {d}", path.display());
            EXIT_INVALID
        })?;
        scenarios.push(load(path, &variant)?);
    }
    let base = out.unwrap_or_else(|| scenarios[0].out_dir.clone());
    let mut entries = Vec::new();
    let mut code = EXIT_OK;
    for (v, s) in values.iter().zip(&scenarios) {
        let dir = base.join(format!("{param}={v}"));
        let report = run(
            s,
            &RunOptions {
                out_dir: Some(dir.clone()),
                threads,
                strict,
            },
        );
        summarize(&report);
        code = code.max(report.exit_code);
        entries.push(SweepEntry {
            value: v.clone(),
            directory: dir.display().to_string(),
            exit_code: report.exit_code,
        });
    }
    let json = serde_json::to_vec_pretty(&entries).expect("sweep summary serializes");
    if let Err(e) = fs::write(base.join("sweep.json"), json) {
        eprintln!("cannot write sweep summary: {e}");
        code = EXIT_NUMERICAL;
    }
    Ok(code)
}
