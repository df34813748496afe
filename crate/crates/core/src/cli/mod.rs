//! Command-line front end.
//!
//! Every subcommand resolves its parameters in the order: command-line flag,
//! `--config` JSON file, built-in default (the seed additionally falls back
//! to `KINEXCH_SEED`). The resolved [`ExperimentConfig`] is embedded in every
//! file written, and any of those embedded configs can be passed back with
//! `--config` to reproduce the run.

mod commands;
mod config;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::types::Model;

pub use config::{ConfigFile, ExperimentConfig, DEFAULT_SEED, SEED_ENV};

#[derive(Parser, Debug)]
#[command(
    name = "kinexch",
    version,
    about = "Kinetic money-exchange models: agents, master equations, mean-field limit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Agent-based simulation; writes wealth distributions and Gini over time
    Abm {
        #[command(flatten)]
        common: Common,
        /// Also write every exchange as (t, giver, receiver)
        #[arg(long)]
        event_log: bool,
    },
    /// Integrate the limit master equation
    Ode {
        #[command(flatten)]
        common: Common,
        /// Initial law
        #[arg(long, value_enum)]
        init: Option<Init>,
        /// Interval between written pmf snapshots
        #[arg(long)]
        pmf_every: Option<f64>,
    },
    /// Rich-biased wave: center, width and the Gini approximation
    Wave {
        #[command(flatten)]
        common: Common,
    },
    /// Finite-N error against the limit law
    Chaos {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        study: Option<Study>,
        /// Number of tagged agents in the coupling
        #[arg(long)]
        k: Option<usize>,
        /// Population sizes for the scaling study, comma separated
        #[arg(long, value_delimiter = ',')]
        n_values: Option<Vec<usize>>,
    },
    /// Fast invariant checks
    Selftest {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long = "n-agents", visible_alias = "n")]
    pub n_agents: Option<usize>,
    /// Dollars per agent
    #[arg(long)]
    pub mu: Option<u64>,
    /// Integrator step
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Interval between recorded snapshots
    #[arg(long)]
    pub every: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicas: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for replica fan-out
    #[arg(long)]
    pub jobs: Option<usize>,
    /// JSON file with any of the parameters above
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Evaluate the command's checks and exit nonzero if one fails
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    /// All mass at `mu`
    Dirac,
    /// The model's equilibrium with mean `mu`
    Equilibrium,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    Scaling,
    Coupling,
    Both,
}

/// Outcome of one check.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, detail: detail.into() }
    }
}

/// Runs the parsed command. `Ok(false)` means a requested check failed.
pub fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Abm { common, event_log } => {
            let cfg = config::resolve_abm(&common, event_log)?;
            commands::abm(&cfg, &common)
        }
        Command::Ode { common, init, pmf_every } => {
            let cfg = config::resolve_ode(&common, init, pmf_every)?;
            commands::ode(&cfg, &common)
        }
        Command::Wave { common } => {
            let cfg = config::resolve_wave(&common)?;
            commands::wave(&cfg, &common)
        }
        Command::Chaos { common, study, k, n_values } => {
            let cfg = config::resolve_chaos(&common, study, k, n_values)?;
            commands::chaos(&cfg, &common)
        }
        Command::Selftest { common } => {
            let cfg = config::resolve_selftest(&common)?;
            Ok(selftest::run(&cfg))
        }
    }
}

/// Parses `std::env::args`, runs, and maps the outcome to an exit code:
/// 0 success, 1 failed check, 2 usage or runtime error.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
