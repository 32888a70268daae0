use std::path::PathBuf;

use clap::Args;
use polarsep_core::io::{image_to_tensor, write_tensor};
use polarsep_core::mosaic::demux_mosaic;
use polarsep_core::stokes::compute_stokes;
use serde_json::json;

use crate::util;
use crate::Failure;

#[derive(Args, serde::Serialize)]
pub struct StokesArgs {
    /// Mosaic PNG (16-bit grayscale, samples shifted by 16 - bit_depth).
    #[arg(long, visible_alias = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Overexposure threshold on normalized channel values.
    #[arg(long, default_value_t = 0.98)]
    pub delta: f64,
    #[arg(long, default_value_t = 12)]
    pub bit_depth: u8,
    #[arg(long, default_value = "0,45,90,135")]
    pub pattern: String,
}

pub fn run(args: &StokesArgs) -> Result<(), Failure> {
    if !(args.delta > 0.0 && args.delta <= 1.0) {
        return Err(Failure::usage("--delta must be in (0, 1]"));
    }
    if !(1..=16).contains(&args.bit_depth) {
        return Err(Failure::usage("--bit-depth must be in 1..=16"));
    }
    let pattern = util::parse_pattern(&args.pattern).map_err(|e| Failure::usage(e.to_string()))?;
    util::ensure_out_dir(&args.out_dir)?;

    let mosaic = util::read_mosaic_png(&args.input, args.bit_depth, pattern)?;
    let ceiling = util::normalized_ceiling(args.bit_depth);
    let stack = demux_mosaic(&mosaic).scaled(1.0 / ceiling);
    let maps = compute_stokes(&stack, args.delta).map_err(anyhow::Error::from)?;

    let files = [
        ("intensity.pmrt", &maps.intensity),
        ("dop.pmrt", &maps.dop),
        ("aop.pmrt", &maps.aop),
        ("mask.pmrt", &maps.mask),
    ];
    for (name, img) in files {
        write_tensor(args.out_dir.join(name), &image_to_tensor(img))
            .map_err(anyhow::Error::from)?;
    }

    util::write_metadata(
        &args.out_dir,
        "stokes",
        json!({
            "args": args,
            "channels_normalized_by": ceiling,
            "dop_clamped_pixels": maps.dop_clamped,
            "masked_pixels": maps.mask.pixels().iter().filter(|&&v| v == 0.0).count(),
            "outputs": ["intensity.pmrt", "dop.pmrt", "aop.pmrt", "mask.pmrt"],
        }),
    )?;
    Ok(())
}
