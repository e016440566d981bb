//! Command-line front end: noise sweeps, analytic site-counting tables, and
//! the internal consistency-check suite, all driven by a flat JSON config.
//!
//! Exit codes: 0 on success, 1 when an engine run or consistency check
//! fails, 2 when the configuration or invocation is malformed.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "baconshor",
    version,
    about = "Error-detection experiments for the [[4,1,2]] Bacon-Shor code"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Flat JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep noise rates over random logical circuits and fit
    /// pseudo-thresholds (sweep.csv, thresholds.csv, manifest.json).
    Sweep(RunArgs),
    /// Tabulate analytic site-counting thresholds over measurement schedules
    /// (sitecount.csv, optimal_gaps.csv, manifest.json).
    Sitecount(RunArgs),
    /// Run the internal consistency checks (validate.json, manifest.json).
    Validate(RunArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(args) => commands::cmd_sweep(&args.config, &args.out),
        Command::Sitecount(args) => commands::cmd_sitecount(&args.config, &args.out),
        Command::Validate(args) => commands::cmd_validate(&args.config, &args.out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
