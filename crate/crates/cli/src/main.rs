//! `polarsep` command-line interface.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data or solver
//! errors. Every run writes a JSON metadata sidecar describing inputs,
//! configuration, and outputs; runs are deterministic for a fixed seed.

mod commands;
mod util;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use commands::{
    clean::CleanArgs, curves::FresnelCurveArgs, curves::PnccCurveArgs, demo::DemoLinearityArgs,
    demux::DemuxArgs, separate::SeparateArgs, stokes::StokesArgs, synth::SynthArgs,
};

#[derive(Parser)]
#[command(
    name = "polarsep",
    version,
    about = "Polarization-raw toolkit: mosaic handling, Stokes maps, synthetic triples, and reflection separation"
)]
enum Cli {
    /// Split a polarization mosaic PNG into its four angle channels.
    Demux(DemuxArgs),
    /// Compute Stokes maps (I, rho, phi) and the overexposure mask.
    Stokes(StokesArgs),
    /// Generate a synthetic {M, R, T} triple in raw-linear space.
    Synth(SynthArgs),
    /// Apply the dataset cleaning rules to an (R, T) stack pair.
    Clean(CleanArgs),
    /// Separate a mixed stack into reflection and transmission.
    Separate(SeparateArgs),
    /// Sweep the mixing factor and emit the PNCC curve as CSV.
    PnccCurve(PnccCurveArgs),
    /// Emit degree-of-polarization curves for an air-glass interface.
    FresnelCurve(FresnelCurveArgs),
    /// Contrast raw-space against gamma-space layer subtraction.
    DemoLinearity(DemoLinearityArgs),
}

/// Distinguishes flag misuse (exit 1) from runtime failures (exit 2).
pub enum Failure {
    Usage(String),
    Run(anyhow::Error),
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure::Usage(msg.into())
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Run(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let result = match cli {
        Cli::Demux(args) => commands::demux::run(&args),
        Cli::Stokes(args) => commands::stokes::run(&args),
        Cli::Synth(args) => commands::synth::run(&args),
        Cli::Clean(args) => commands::clean::run(&args),
        Cli::Separate(args) => commands::separate::run(&args),
        Cli::PnccCurve(args) => commands::curves::run_pncc(&args),
        Cli::FresnelCurve(args) => commands::curves::run_fresnel(&args),
        Cli::DemoLinearity(args) => commands::demo::run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
