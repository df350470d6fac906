//! `tomo`: forward data, shape reconstruction, and resolution curves for
//! membrane-potential tomography on a disk, driven by a flat text config.
//!
//! Exit codes: 0 success, 2 configuration error, 3 I/O failure, 4 requested
//! shape mode is unresolvable, 1 internal check failure.

mod commands;
mod config;
mod csvio;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "tomo",
    version,
    about = "Forward simulation and shape reconstruction for membrane-potential tomography on a disk"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write noiseless intensity matrices for the configured cell
    Forward {
        /// Run configuration (flat `key = value` text)
        #[arg(long)]
        config: PathBuf,
        /// Output directory for the CSV artifacts
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Estimate the shape spectrum from forward-format data
    Reconstruct {
        /// Run configuration (flat `key = value` text)
        #[arg(long)]
        config: PathBuf,
        /// Measured intensity matrix (forward CSV format)
        #[arg(long)]
        data: PathBuf,
        /// Output directory for the CSV artifacts
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Sweep resolution curves over SNR or cell radius
    Resolve {
        /// Run configuration (flat `key = value` text)
        #[arg(long)]
        config: PathBuf,
        /// Which sweep: minimal resolving radius over SNR, or resolvable mode
        /// counts over cell radius
        #[arg(long, value_enum)]
        mode: SweepMode,
        /// Output directory for the CSV artifacts
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the built-in cross-checks
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepMode {
    MinRadius,
    ModeCount,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Forward { config, out } => commands::cmd_forward(&config, &out),
        Command::Reconstruct { config, data, out } => {
            commands::cmd_reconstruct(&config, &data, &out)
        }
        Command::Resolve { config, mode, out } => match mode {
            SweepMode::MinRadius => commands::cmd_resolve_min_radius(&config, &out),
            SweepMode::ModeCount => commands::cmd_resolve_mode_count(&config, &out),
        },
        Command::Selftest => commands::cmd_selftest(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
