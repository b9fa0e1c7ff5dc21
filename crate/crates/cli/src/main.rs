mod artifacts;
mod bundle;
mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "modal-update", version, about = "Multi-chain Bayesian stiffness updating from modal data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a measurement from the config's truth vector.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; receives measurement.json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Noise seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a multi-chain campaign and write a result bundle.
    Update {
        #[arg(long)]
        config: PathBuf,
        /// Measurement file; simulated from the config's truth when omitted.
        #[arg(long)]
        measurement: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Histogram bins per parameter.
        #[arg(long)]
        bins: Option<usize>,
    },
    /// Re-analyse an existing result bundle.
    Report {
        /// Bundle directory written by `update`.
        bundle: PathBuf,
        #[arg(long)]
        bins: Option<usize>,
        /// Defaults to `<bundle>/report`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the sampler on a closed-form target (gauss1d, mixture2d-4, plateau).
    Benchmark {
        target: String,
        /// Campaign settings JSON; Table-1 style defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        bins: Option<usize>,
    },
    /// Print a built-in configuration (dome-analog, plate-analog).
    Preset { name: String },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate { config, out, seed } => commands::simulate(&config, out, seed),
        Command::Update { config, measurement, out, seed, workers, bins } => {
            commands::update(&config, measurement.as_deref(), out, seed, workers, bins)
        }
        Command::Report { bundle, bins, out } => commands::report(&bundle, bins, out),
        Command::Benchmark { target, config, out, seed, workers, bins } => {
            commands::benchmark(&target, config.as_deref(), out, seed, workers, bins)
        }
        Command::Preset { name } => commands::preset(&name),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
