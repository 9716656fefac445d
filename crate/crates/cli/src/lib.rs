//! Batch front end: figure data, rotor studies, the wave-packet oracle
//! suite and algebra reports, each run leaving a manifest behind.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod manifest;
pub mod svg;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::commands::CliError;
use crate::config::ConfigError;
use crate::manifest::{OutputDir, RunManifest, Timings};

#[derive(Debug, Parser)]
#[command(name = "cqm", version, about = "Constrained quantum mechanics laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON config for the subcommand; defaults are used when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "cqm-out")]
    pub out: PathBuf,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Recorded in the manifest; no current computation is random.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Store wall-clock time in the manifest (makes it run-dependent).
    #[arg(long, global = true)]
    pub record_timings: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Smeared barrier potential for several widths.
    Fig1,
    /// Transmission curves, classical and quantum.
    Fig2,
    /// Free asymmetric top: trajectory, conservation, orbit geometry.
    Rotor,
    /// Wave-packet simulations against the closed forms.
    Oracle,
    /// Orbit dimensions for algebra fixtures.
    AlgebraReport,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Fig1 => "fig1",
            Command::Fig2 => "fig2",
            Command::Rotor => "rotor",
            Command::Oracle => "oracle",
            Command::AlgebraReport => "algebra-report",
        }
    }
}

fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| ConfigError::at(".", format!("cannot read {}: {e}", p.display())))?;
            Ok(config::parse(&text)?)
        }
    }
}

fn echo<T: Serialize>(cfg: &T) -> serde_json::Value {
    serde_json::to_value(cfg).expect("configs serialize")
}

fn execute(cli: &Cli) -> Result<RunManifest, CliError> {
    let start = Instant::now();
    let cfg_path = cli.config.as_deref();
    let mut out = OutputDir::create(&cli.out)?;
    let (config, fixtures) = match cli.command {
        Command::Fig1 => {
            let c: config::Fig1Config = load(cfg_path)?;
            (echo(&c), commands::fig1(&c, &mut out)?)
        }
        Command::Fig2 => {
            let c: config::Fig2Config = load(cfg_path)?;
            (echo(&c), commands::fig2(&c, &mut out)?)
        }
        Command::Rotor => {
            let c: config::RotorConfig = load(cfg_path)?;
            (echo(&c), commands::rotor(&c, &mut out)?)
        }
        Command::Oracle => {
            let c: config::OracleConfig = load(cfg_path)?;
            // the report is written even when the suite fails
            match commands::oracle(&c, &mut out) {
                Ok(f) => (echo(&c), f),
                Err(e @ CliError::SuiteFailed(_)) => {
                    finish(cli, out, echo(&c), vec![], start)?;
                    return Err(e);
                }
                Err(e) => return Err(e),
            }
        }
        Command::AlgebraReport => {
            let c: config::AlgebraReportConfig = load(cfg_path)?;
            let base = cfg_path.and_then(Path::parent).unwrap_or(Path::new("."));
            (echo(&c), commands::algebra_report(&c, base, &mut out)?)
        }
    };
    finish(cli, out, config, fixtures, start)
}

fn finish(
    cli: &Cli,
    out: OutputDir,
    config: serde_json::Value,
    fixtures: Vec<manifest::FixtureRecord>,
    start: Instant,
) -> Result<RunManifest, CliError> {
    let manifest = RunManifest {
        command: cli.command.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cli.seed,
        config,
        fixtures,
        outputs: Vec::new(),
        timings: cli.record_timings.then(|| Timings { wall_seconds: start.elapsed().as_secs_f64() }),
    };
    Ok(out.finish(manifest)?)
}

/// Runs one command on a thread pool of the requested size.
pub fn run(cli: &Cli) -> Result<RunManifest, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(ConfigError::at("--threads", "must be at least 1").into());
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    pool.install(|| execute(cli))
}
