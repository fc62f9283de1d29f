use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gensync_cli::commands::{self, Overrides};
use gensync_cli::{CliError, Result};

/// Leader/follower generator synchronization under corrupted phase
/// measurements.
///
/// Exit codes: 0 success, 1 I/O error, 2 configuration error, 3 simulation
/// failure, 4 a validation check failed.
#[derive(Debug, Parser)]
#[command(name = "gensync", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for randomized checks (validate-reduction random probes).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Override the step size [s].
    #[arg(long)]
    dt: Option<f64>,
    /// Override the horizon [s].
    #[arg(long)]
    horizon: Option<f64>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides { dt: self.dt, horizon: self.horizon }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one scenario; writes trajectory.csv and summary.txt.
    Run {
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write trajectory.svg.
        #[arg(long)]
        svg: bool,
    },
    /// Decay constants and ultimate bounds for the scenario's parameters.
    Bounds {
        #[command(flatten)]
        common: Common,
        /// Also write bounds.csv and bounds.txt here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Steady synchronization error over a (k, d) grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Gains, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        ks: String,
        /// Constant offsets, comma separated; `0.25pi` is accepted.
        #[arg(long, allow_hyphen_values = true)]
        ds: String,
        /// Write sweep.csv here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the detailed machine against its reduction.
    ValidateReduction {
        /// Detailed-machine parameter file (bare or under `high_order`).
        #[arg(long)]
        config: PathBuf,
        /// Number of random probe points when --seed is given.
        #[arg(long, default_value_t = 8)]
        probes: usize,
    },
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { common, out, svg } => {
            let res = commands::cmd_run(&common.config, &out, common.overrides(), svg)?;
            print!("{}", res.summary.to_text());
            println!("trajectory = {}", res.csv.display());
            if let Some(p) = res.svg {
                println!("svg = {}", p.display());
            }
        }
        Command::Bounds { common, out } => {
            print!("{}", commands::cmd_bounds(&common.config, out.as_deref(), common.overrides())?.to_text());
        }
        Command::Sweep { common, ks, ds, out } => {
            let ks = commands::parse_list("ks", &ks)?;
            let ds = commands::parse_list("ds", &ds)?;
            let res = commands::cmd_sweep(&common.config, &ks, &ds, out.as_deref(), common.overrides())?;
            if out.is_none() {
                print!("{}", res.to_csv_string());
            }
            for (k, m) in res.ks.iter().zip(&res.monotone_in_d) {
                eprintln!("k = {k}: steady |e| monotone in |d| = {m}");
            }
        }
        Command::ValidateReduction { config, probes } => {
            let res = commands::cmd_validate_reduction(&config, cli.seed, probes)?;
            print!("{}", res.to_text());
            if !res.pass() {
                return Err(CliError::Check("reduction checks did not all pass".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
