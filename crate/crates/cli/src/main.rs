//! `couette`: linear mode tables, multiplier profiles, simulations and
//! threshold sweeps from the command line.

mod config;
mod linear;
mod multipliers;
mod output;
mod simulate;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "couette", version, about = "Rotating Couette flow perturbation experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// TOML file with [sim] and/or [sweep] tables.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the seed of generated initial data.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form evolution of one Fourier mode.
    Linear(linear::LinearArgs),
    /// Profiles of the multipliers m and M along one mode.
    Multipliers(multipliers::MultiplierArgs),
    /// One simulation: energy.csv, snapshots and a manifest.
    Simulate(simulate::SimulateArgs),
    /// Amplitude-viscosity sweep and transition-exponent fit.
    Sweep(sweep::SweepArgs),
}

/// Command failure, split by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config or input files (exit 1).
    Usage(anyhow::Error),
    /// The computation itself failed (exit 2).
    Numerical(anyhow::Error),
}

impl Failure {
    pub fn usage(msg: impl std::fmt::Display) -> Self {
        Failure::Usage(anyhow::anyhow!("{msg}"))
    }
}

impl From<couette_core::Error> for Failure {
    fn from(e: couette_core::Error) -> Self {
        use couette_core::Error::*;
        match e {
            Quadrature { .. } | BlowUp { .. } | InsufficientRuns { .. } => Failure::Numerical(e.into()),
            _ => Failure::Usage(e.into()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.into())
    }
}

pub type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Linear(a) => linear::run(&cli.common, &a),
        Command::Multipliers(a) => multipliers::run(&cli.common, &a),
        Command::Simulate(a) => simulate::run(&cli.common, &a),
        Command::Sweep(a) => sweep::run(&cli.common, &a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("numerical failure: {e:#}");
            ExitCode::from(2)
        }
    }
}
