//! Resonance-fluorescence spectra of a trapped Λ atom at two-photon
//! resonance: summary scalars, sampled spectra, a brute-force oracle, and a
//! self-test suite, all driven by a JSON config.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Errors mapped to process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration (exit 2).
    Config(String),
    /// File I/O problem (exit 3).
    Io(String),
    /// Physics-regime failure such as heating (exit 4).
    Physics(String),
    /// Numerical failure (exit 5).
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Physics(_) => 4,
            CliError::Numerical(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Io(m) | CliError::Physics(m) | CliError::Numerical(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "lamfluor",
    about = "Emission spectra of a trapped three-level atom cooled at two-photon resonance",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Phonon rates, mean phonon number, sideband height, elastic weight.
    Summary(CommonArgs),
    /// Sampled spectrum CSV, summary JSON, and a plot script.
    Spectrum(CommonArgs),
    /// Brute-force master-equation spectrum CSV.
    Oracle(CommonArgs),
    /// Perturbative vs oracle deviations, JSON report.
    Compare(CommonArgs),
    /// Vanishing-order property suite and module invariants.
    Selftest(CommonArgs),
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress the metadata block for byte-identical reruns.
    #[arg(long)]
    no_metadata: bool,
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Summary(args) => {
            let cfg = config::parse_config(&args.config)?;
            let out = output::ensure_out_dir(&args.out)?;
            output::run_summary(&cfg, &out, args.no_metadata)
        }
        Command::Spectrum(args) => {
            let cfg = config::parse_config(&args.config)?;
            let out = output::ensure_out_dir(&args.out)?;
            output::run_spectrum(&cfg, &out, args.no_metadata)
        }
        Command::Oracle(args) => {
            let cfg = config::parse_config(&args.config)?;
            let out = output::ensure_out_dir(&args.out)?;
            output::run_oracle(&cfg, &out)
        }
        Command::Compare(args) => {
            let cfg = config::parse_config(&args.config)?;
            let out = output::ensure_out_dir(&args.out)?;
            output::run_compare(&cfg, &out, args.no_metadata)
        }
        Command::Selftest(args) => {
            let cfg = config::parse_config(&args.config)?;
            output::run_selftest(&cfg)
        }
    }
}

fn main() -> ExitCode {
    // sequential dense kernels keep outputs byte-reproducible; coarse
    // parallelism (per-frequency solves) lives in the library
    lamfluor::set_sequential_dense_kernels();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
