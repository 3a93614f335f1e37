//! `isingq`: verification suites, simulations and demos.
//!
//! Exit codes: 0 all checks passed, 1 a check failed, 2 bad configuration
//! or usage.

mod output;
mod scenario;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::scenario::RunConfig;
use crate::verify::Geometry;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
}

#[derive(Parser)]
#[command(name = "isingq", version, about = "Fermion dynamics from classical Ising ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run invariant suites and print a JSON report.
    Verify {
        /// Suite name, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, value_enum, default_value = "tiny")]
        geometry: Geometry,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a scenario from a JSON or TOML config file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a built-in demo: double-slit, tunneling or two-state.
    Demo {
        name: String,
        /// Overrides merged over the demo defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read_config(path: &Path) -> anyhow::Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str::<Value>(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
    } else {
        serde_json::from_str::<Value>(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
    };
    Ok(parsed)
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("ISINGQ_THREADS") {
        let n: usize = v.parse().map_err(|_| CliError::Config(format!("ISINGQ_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(CliError::Config("ISINGQ_THREADS must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn cmd_verify(suite: &str, geometry: Geometry, seed: u64) -> anyhow::Result<bool> {
    let names = verify::expand(suite, geometry).ok_or_else(|| {
        CliError::Config(format!("unknown suite {suite:?}; expected one of {} or all", verify::SUITES.join(", ")))
    })?;
    let start = Instant::now();
    let mut checks = Vec::new();
    for name in &names {
        checks.extend(verify::run(name, geometry, seed)?);
    }
    let passed = checks.iter().all(|c| c.pass);
    let report = json!({
        "suites": names,
        "geometry": geometry,
        "seed": seed,
        "checks": checks,
        "failed": checks.iter().filter(|c| !c.pass).count(),
        "passed": passed,
        "runtime_s": start.elapsed().as_secs_f64(),
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(passed)
}

fn execute(cfg: RunConfig, seed: u64, out: &Path) -> anyhow::Result<bool> {
    let start = Instant::now();
    let outcome = scenario::run(&cfg, seed, out)?;
    let resolved = RunConfig { seed: Some(seed), ..cfg };
    let summary = json!({
        "config": resolved,
        "seed": seed,
        "results": outcome.summary,
        "failed_checks": outcome.failed,
        "passed": outcome.failed.is_empty(),
        "runtime_s": start.elapsed().as_secs_f64(),
    });
    output::write_json(&out.join("summary.json"), &summary)?;
    for f in &outcome.failed {
        eprintln!("check failed: {f}");
    }
    eprintln!("wrote {}", out.display());
    Ok(outcome.failed.is_empty())
}

fn dispatch(cli: Cli) -> anyhow::Result<bool> {
    configure_threads()?;
    match cli.command {
        Command::Verify { suite, geometry, seed } => cmd_verify(&suite, geometry, seed),
        Command::Simulate { config, out, seed } => {
            let cfg: RunConfig = serde_json::from_value(read_config(&config)?).map_err(|e| CliError::Config(format!("{}: {e}", config.display())))?;
            let seed = seed.or(cfg.seed).unwrap_or(0);
            execute(cfg, seed, &out)
        }
        Command::Demo { name, config, out } => {
            let overrides = config.as_deref().map(read_config).transpose()?;
            let cfg = scenario::demo_config(&name, overrides)?;
            let seed = cfg.seed.unwrap_or(0);
            execute(cfg, seed, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<CliError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
