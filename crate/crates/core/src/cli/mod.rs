//! Command-line orchestration: config files, scenario runs, manifests and
//! the `verify` subcommand.

pub mod config;
pub mod manifest;
mod scenarios;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::{parse_config, parse_str, ConfigError, Scenario, ScenarioConfig, Violation};
pub use manifest::{Manifest, OutputEntry};

use crate::error::Error;
use crate::verify::run_suite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("verification failed: {}", .0.join(", "))]
    Verification(Vec<String>),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Verification(_) => EXIT_VERIFY,
            RunError::Io(_) => EXIT_IO,
            RunError::Model(e) => match e {
                Error::Instability(_)
                | Error::NeighborCollapse(_)
                | Error::AmbiguousZero(_)
                | Error::SingularGeometry(_)
                | Error::PacketEscapesGrid { .. }
                | Error::NonpositiveWidth(_)
                | Error::GradientValidation(_) => EXIT_NUMERIC,
                Error::BudgetExceeded(_) => EXIT_RESOURCE,
                Error::InvalidGrid(_)
                | Error::GridMismatch(_)
                | Error::InvalidTimeStep(_)
                | Error::OutOfSpan { .. }
                | Error::InvalidPlan(_)
                | Error::InvalidInput(_) => EXIT_CONFIG,
                Error::Io(_) | Error::Csv(_) | Error::Json(_) | Error::Format(_) => EXIT_IO,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "oneworld", version, about = "Quantum dynamics on grids, paths, parameter spaces and branching Gaussians")]
#[command(args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    /// Scenario to run.
    #[arg(value_enum, required = true)]
    pub scenario: Option<Scenario>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// Scenario config file (TOML).
    #[arg(long, required = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// RNG seed; overrides `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = "ONEWORLD_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the acceptance suite.
    Verify {
        #[arg(long, default_value = "primary", value_parser = ["primary"])]
        suite: String,
        /// Criterion id or a substring of its name.
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, env = "ONEWORLD_THREADS")]
        threads: Option<usize>,
        /// Run as the `verify` scenario from a config file, with a manifest.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses, validates and runs one scenario, then writes `manifest.json`.
pub fn run_scenario(
    scenario: Scenario,
    config_path: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
) -> Result<Manifest, RunError> {
    let cfg = parse_config(config_path)?;
    run_config(&cfg, scenario, out, seed)
}

pub fn run_config(cfg: &ScenarioConfig, scenario: Scenario, out: Option<&Path>, seed: Option<u64>) -> Result<Manifest, RunError> {
    cfg.validate(scenario)?;
    let seed = seed.unwrap_or(cfg.seed);
    let dir = match (out, &cfg.output.dir) {
        (Some(d), _) => d.to_path_buf(),
        (None, Some(d)) => PathBuf::from(d),
        (None, None) => PathBuf::from("out"),
    };
    std::fs::create_dir_all(&dir)?;
    let mut outputs = scenarios::Outputs::new(&dir);
    let result = scenarios::run(cfg, scenario, seed, &mut outputs);
    let manifest = Manifest::build(&dir, &outputs.into_files(), cfg, scenario, seed)?;
    manifest.write(&dir)?;
    result.map(|_| manifest)
}

fn init_threads(threads: Option<usize>) {
    if let Some(n) = threads.filter(|&n| n > 0) {
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    match cli.command {
        Some(Command::Verify { config: Some(config), out, threads, .. }) => {
            init_threads(threads);
            report(run_scenario(Scenario::Verify, &config, out.as_deref(), None))
        }
        Some(Command::Verify { filter, threads, .. }) => {
            init_threads(threads);
            let reports = run_suite(filter.as_deref(), |r| println!("{}", r.line()));
            let failed = reports.iter().filter(|r| !r.passed).count();
            println!("{} of {} criteria passed", reports.len() - failed, reports.len());
            if reports.is_empty() {
                eprintln!("no criterion matches the filter");
                EXIT_CONFIG
            } else if failed > 0 {
                EXIT_VERIFY
            } else {
                EXIT_OK
            }
        }
        None => {
            let (Some(scenario), Some(config)) = (cli.scenario, cli.run.config) else {
                eprintln!("usage: oneworld <scenario> --config <file>");
                return EXIT_CONFIG;
            };
            init_threads(cli.run.threads);
            report(run_scenario(scenario, &config, cli.run.out.as_deref(), cli.run.seed))
        }
    }
}

fn report(result: Result<Manifest, RunError>) -> i32 {
    match result {
        Ok(m) => {
            let mut stdout = std::io::stdout().lock();
            for o in &m.outputs {
                // A closed pipe is not a run failure.
                let _ = writeln!(stdout, "{}  {}", o.sha256, o.path);
            }
            EXIT_OK
        }
        Err(e) => {
            eprint!("error: {e}");
            if !matches!(e, RunError::Config(_)) {
                eprintln!();
            }
            e.exit_code()
        }
    }
}
