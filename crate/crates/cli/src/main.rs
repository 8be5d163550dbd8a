//! `gpz`: batch runner for Gross-Pitaevskii simulations and the
//! inequality checks built on them.
//!
//! Exit codes: 0 when every requested check passes, 2 when a check fails
//! (including a blow-up), 1 on configuration or runtime errors.

mod config;
mod corpus;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{CorpusConfig, RunConfig};

/// Caps the number of worker threads.
const WORKERS_ENV: &str = "GPZ_WORKERS";

#[derive(Parser)]
#[command(
    name = "gpz",
    version,
    about = "Gross-Pitaevskii simulation and inequality verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation with the checks listed in the config.
    Run { config: PathBuf },
    /// Scan Brezis-Gallouët ratios over a seeded random-field corpus.
    Corpus { config: PathBuf },
}

fn configure_workers() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            anyhow::anyhow!("{WORKERS_ENV} must be a positive integer, got {v:?}")
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_workers().and_then(|()| match &cli.command {
        Command::Run { config } => RunConfig::load(config).and_then(|cfg| run::run(&cfg)),
        Command::Corpus { config } => CorpusConfig::load(config)
            .and_then(|cfg| corpus::corpus_scan(&cfg))
            .map(|()| true),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("gpz: one or more checks failed; see summary.json");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("gpz: {e:#}");
            ExitCode::from(1)
        }
    }
}
