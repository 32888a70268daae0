use std::path::PathBuf;

use clap::Args;
use polarsep_core::io::{stack_to_tensor, write_tensor};
use polarsep_core::synth::clean_pair;
use serde_json::json;

use crate::util;
use crate::Failure;

#[derive(Args, serde::Serialize)]
pub struct CleanArgs {
    /// Reflection stack (.pmrt, 4 x H x W).
    #[arg(long)]
    pub reflection: PathBuf,
    /// Transmission stack (.pmrt, 4 x H x W).
    #[arg(long)]
    pub transmission: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(args: &CleanArgs) -> Result<(), Failure> {
    util::ensure_out_dir(&args.out_dir)?;
    let r = util::read_stack(&args.reflection)?;
    let t = util::read_stack(&args.transmission)?;
    let outcome = clean_pair(&r, &t).map_err(anyhow::Error::from)?;

    write_tensor(
        args.out_dir.join("r_clean.pmrt"),
        &stack_to_tensor(&outcome.reflection),
    )
    .map_err(anyhow::Error::from)?;
    write_tensor(
        args.out_dir.join("t_clean.pmrt"),
        &stack_to_tensor(&outcome.transmission),
    )
    .map_err(anyhow::Error::from)?;

    println!(
        "verdict: {} (ratio {:?}, {} negative samples zeroed)",
        serde_json::to_string(&outcome.verdict).map_err(anyhow::Error::from)?,
        outcome.ratio,
        outcome.clamped_negatives
    );
    util::write_metadata(
        &args.out_dir,
        "clean",
        json!({
            "args": args,
            "verdict": outcome.verdict,
            "mean_ratio": outcome.ratio,
            "clamped_negatives": outcome.clamped_negatives,
            "outputs": ["r_clean.pmrt", "t_clean.pmrt"],
        }),
    )?;
    Ok(())
}
