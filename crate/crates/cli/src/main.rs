//! `breadwinner` — simulate, calibrate, and run counterfactuals for a
//! structural model of married couples' joint labor supply.

mod commands;
mod config;

use std::path::PathBuf;

use breadwinner_core::counterfactual::ScenarioMode;
use clap::{Args, Parser, Subcommand};

/// Flags shared by every subcommand; command-line values override the
/// corresponding config entries.
#[derive(Debug, Args)]
pub struct Opts {
    /// Run configuration file.
    #[arg(long, default_value = "configs/baseline.config")]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Population seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of simulated couples.
    #[arg(long)]
    pub n: Option<usize>,
    /// Restrict to one scenario: baseline, flexible, or outsourcing.
    #[arg(long)]
    pub scenario: Option<ScenarioMode>,
    /// Penalty grid for sweeps and regional curves.
    #[arg(long, value_name = "START:STOP:POINTS")]
    pub delta_grid: Option<String>,
    /// Prefecture data CSV for the regional command.
    #[arg(long)]
    pub prefecture_data: Option<PathBuf>,
    /// Cap on data-parallel worker threads.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Parser)]
#[command(name = "breadwinner", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one scenario and write its summary tables.
    Simulate(Opts),
    /// Fit the model parameters to the target moments.
    Calibrate(Opts),
    /// Compare scenarios on one set of couples.
    Counterfactual(Opts),
    /// Trace gender gaps over a grid of norm-penalty values.
    Sweep(Opts),
    /// Predict regional gap profiles from prefecture data.
    Regional(Opts),
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(opts) => commands::cmd_simulate(opts),
        Command::Calibrate(opts) => commands::cmd_calibrate(opts),
        Command::Counterfactual(opts) => commands::cmd_counterfactual(opts),
        Command::Sweep(opts) => commands::cmd_sweep(opts),
        Command::Regional(opts) => commands::cmd_regional(opts),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
