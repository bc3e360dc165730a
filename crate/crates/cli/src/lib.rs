//! Command-line driver: Monte Carlo studies from flat config files, covariate
//! bias sweeps, and fits of the small area predictors to CSV data.

pub mod commands;
pub mod config;
pub mod error;
pub mod fit;
pub mod format;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use sae_core::Estimator;

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "sae", version, about = "Small area estimation: simulation studies and model fits")]
pub struct Cli {
    /// Cap on worker threads (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the configured number of replicates K.
    #[arg(long)]
    pub replicates: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo MSPE of the configured estimators over a scenario grid.
    Simulate(RunArgs),
    /// MSPE of the unit-level OBP as the sample covariate means are shifted.
    BiasSweep(RunArgs),
    /// Fit one estimator to unit-level data.
    Fit {
        /// Unit file with columns area_id, y, x1..xp.
        #[arg(long)]
        data: PathBuf,
        /// Area file with columns area_id, N, Xbar1..Xbarp and optionally D.
        #[arg(long)]
        areas: PathBuf,
        /// direct, eblup, obp-unit, obp-uc or obp-fh.
        #[arg(long, value_parser = parse_estimator)]
        model: Estimator,
        /// Predictions CSV; fitted parameters go to the same path with a .json extension.
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_estimator(s: &str) -> Result<Estimator, String> {
    s.parse().map_err(|e: sae_core::SaeError| e.to_string())
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let pool = {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = cli.threads {
            if n == 0 {
                return Err(CliError::Usage("--threads must be at least 1".into()));
            }
            builder = builder.num_threads(n);
        }
        builder
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?
    };
    pool.install(|| match cli.command {
        Command::Simulate(a) => commands::simulate(&a.config, &a.out, overrides(&a)),
        Command::BiasSweep(a) => commands::sweep(&a.config, &a.out, overrides(&a)),
        Command::Fit {
            data,
            areas,
            model,
            out,
        } => fit::run(&data, &areas, model, &out).map(|_| ()),
    })
}

fn overrides(a: &RunArgs) -> commands::Overrides {
    commands::Overrides {
        seed: a.seed,
        replicates: a.replicates,
    }
}
