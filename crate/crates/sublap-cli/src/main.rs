//! `sublap` — numerical experiments for potential theory on the Heisenberg
//! group, one experiment per invocation.
//!
//! Exit status: 0 when every assertion of the experiment passed, 1 on a
//! numerical failure or runtime error (with a diagnostic JSON on stderr),
//! 2 on invalid usage or configuration.

mod config;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::{json, Value};

use experiments::Experiment;
use output::ExperimentResult;

/// Everything that can go wrong, split by exit status.
#[derive(Debug)]
pub enum Failure {
    /// Bad usage or configuration: exit 2, plain message.
    Config(String),
    /// Numerical or I/O failure while running: exit 1, diagnostic JSON.
    Runtime(String),
}

impl From<sublap::Error> for Failure {
    fn from(e: sublap::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "sublap",
    version,
    about = "Numerical potential theory on the Heisenberg group",
    after_help = experiment_listing()
)]
struct Cli {
    /// Experiment to run (kebab-case name).
    experiment: String,
    /// Optional config file of `key = value` lines (# starts a comment).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Inline override, applied after the config file (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory for summary.json, results.csv and plot data.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

fn experiment_listing() -> String {
    let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
    format!("Experiments:\n  {}", names.join("\n  "))
}

/// Honors TOOL_THREADS by sizing the global worker pool before any parallel
/// region runs; the numerical results are identical for every thread count.
fn init_threads() -> Result<(), Failure> {
    let raw = match std::env::var("TOOL_THREADS") {
        Ok(v) => v,
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(e) => return Err(Failure::Config(format!("TOOL_THREADS: {e}"))),
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| {
            Failure::Config(format!(
                "TOOL_THREADS must be a positive integer, got '{raw}'"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Runtime(format!("thread pool: {e}")))
}

fn run(cli: &Cli) -> Result<ExperimentResult, Failure> {
    let exp = Experiment::from_name(&cli.experiment)?;
    let cfg = config::Config::resolve(exp.defaults(), cli.config.as_deref(), &cli.set)?;
    exp.run(&cfg)
}

fn persist(cli: &Cli, res: &ExperimentResult, started: Instant) -> Result<(), Failure> {
    std::fs::create_dir_all(&cli.out).map_err(|e| {
        Failure::Runtime(format!("cannot create {}: {e}", cli.out.display()))
    })?;
    output::write_all(&cli.out, res)?;
    output::write_run_meta(
        &cli.out,
        started.elapsed().as_millis(),
        rayon::current_num_threads(),
    )
}

fn failed_diagnostic(res: &ExperimentResult) -> Value {
    let failed: Vec<Value> = res
        .assertions
        .iter()
        .filter(|a| !a.pass)
        .map(|a| {
            json!({
                "name": a.name,
                "value": output::json_number(a.value),
                "tolerance": output::json_number(a.tolerance),
            })
        })
        .collect();
    json!({ "experiment": res.experiment, "failed_assertions": failed })
}

fn report_failure(experiment: &str, failure: &Failure) -> ExitCode {
    match failure {
        Failure::Config(m) => {
            eprintln!("sublap: configuration error: {m}");
            ExitCode::from(2)
        }
        Failure::Runtime(m) => {
            let diag = json!({ "experiment": experiment, "error": m });
            eprintln!("{diag}");
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = init_threads() {
        return report_failure(&cli.experiment, &f);
    }
    let started = Instant::now();
    match run(&cli) {
        Err(f) => report_failure(&cli.experiment, &f),
        Ok(res) => {
            if let Err(f) = persist(&cli, &res, started) {
                return report_failure(&cli.experiment, &f);
            }
            if res.all_pass() {
                ExitCode::SUCCESS
            } else {
                eprintln!("{}", failed_diagnostic(&res));
                ExitCode::from(1)
            }
        }
    }
}
