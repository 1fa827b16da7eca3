//! Command-line pipeline for the scale-mixture return model: simulate
//! histories, analyze series, tabulate conditional densities, calibrate
//! against data, and run the oracle selfchecks.

mod commands;
mod config;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "scalemix", version, about = "Scale-mixture martingale model of index returns")]
struct Cli {
    /// Configuration file (TOML); defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed override for stochastic commands.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a daily-return history and write it as CSV plus a summary.
    Simulate,
    /// Run the estimator suite on a price series or a simulated history.
    Analyze {
        /// Input CSV: "date,close" or "day,return,epoch_id,stage".
        input: PathBuf,
    },
    /// Tabulate the conditional density of a return given the previous
    /// return's magnitude.
    Conditional,
    /// Fit the mixture and the ensemble exponent to a series.
    Calibrate {
        /// Input CSV: "date,close" or "day,return,epoch_id,stage".
        input: PathBuf,
    },
    /// Run every oracle and invariant check; nonzero exit on failure.
    Selfcheck {
        /// Test hook: bias one coefficient so the telescoping check fails.
        #[arg(long, hide = true)]
        corrupt_telescoping: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match RunConfig::load(cli.config.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    let result = match &cli.command {
        Command::Simulate => commands::simulate::run(&cfg, cli.seed, &cli.out_dir),
        Command::Analyze { input } => commands::analyze::run(&cfg, input, &cli.out_dir),
        Command::Conditional => commands::conditional::run(&cfg, &cli.out_dir),
        Command::Calibrate { input } => {
            commands::calibrate::run(&cfg, input, cli.seed, &cli.out_dir)
        }
        Command::Selfcheck {
            corrupt_telescoping,
        } => {
            return match commands::selfcheck::run(&cfg, Some(&cli.out_dir), *corrupt_telescoping)
            {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::FAILURE,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::FAILURE
                }
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
