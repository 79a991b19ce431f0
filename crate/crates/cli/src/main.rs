//! `magfloquet` command-line driver.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::output::CliError;

#[derive(Debug, Parser)]
#[command(name = "magfloquet", version, about = "Charged particle in a time-periodic planar magnetic field")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// JSON run configuration.
    #[arg(long, global = true, alias = "field-config")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output_dir` from the config).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads, 0 picks the number of cores.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Grid points per axis.
    #[arg(long = "grid-n", global = true)]
    pub grid_n: Option<usize>,
    /// Grid half-width.
    #[arg(long = "grid-L", global = true)]
    pub grid_l: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Discriminant, regime and Floquet exponent of the configured field.
    Classify,
    /// Stability chart over one or two field parameters.
    Scan(commands::ScanArgs),
    /// Zeros of both fundamental solutions on one period.
    Zeros,
    /// Stroboscopic classical orbit with a growth fit.
    Trajectory(commands::TrajectoryArgs),
    /// Free rotating-frame propagation of a wavefunction from `s` to `tau`.
    Propagate(commands::PropagateArgs),
    /// Dispersive ratio over a grid of `(tau, s)` pairs.
    Dispersive(commands::DispersiveArgs),
    /// Singular integrals of the second fundamental solution and their partial sums.
    Resolvent(commands::ResolventArgs),
    /// Partial sums of the Cook integrand.
    Cook(commands::CookArgs),
    /// Truncated spectral integral as a function of the cutoff `R`.
    #[command(name = "sigma-r")]
    SigmaR(commands::SigmaRArgs),
    /// Cauchy defects of the wave operator sequence.
    Waveop(commands::WaveopArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}: {}", e.name(), e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    commands::dispatch(&cli.global, &cli.command)
}
