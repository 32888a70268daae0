use std::path::PathBuf;

use clap::Args;
use polarsep_core::io::{write_tensor, stack_to_tensor, write_png16, Gray16};
use polarsep_core::mosaic::demux_mosaic;
use serde_json::json;

use crate::util;
use crate::Failure;

#[derive(Args, serde::Serialize)]
pub struct DemuxArgs {
    /// Mosaic PNG (16-bit grayscale, samples shifted by 16 - bit_depth).
    #[arg(long, visible_alias = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 12)]
    pub bit_depth: u8,
    /// Block-order angle assignment, e.g. "0,45,90,135".
    #[arg(long, default_value = "0,45,90,135")]
    pub pattern: String,
}

pub fn run(args: &DemuxArgs) -> Result<(), Failure> {
    if !(1..=16).contains(&args.bit_depth) {
        return Err(Failure::usage("--bit-depth must be in 1..=16"));
    }
    let pattern = util::parse_pattern(&args.pattern).map_err(|e| Failure::usage(e.to_string()))?;
    util::ensure_out_dir(&args.out_dir)?;
    let mosaic = util::read_mosaic_png(&args.input, args.bit_depth, pattern)?;
    let stack = demux_mosaic(&mosaic);

    let shift = 16 - u32::from(args.bit_depth);
    let mut outputs = Vec::new();
    for (k, name) in ["ch000.png", "ch045.png", "ch090.png", "ch135.png"]
        .iter()
        .enumerate()
    {
        let channel = stack.channel(k);
        let data: Vec<u16> = channel.pixels().iter().map(|&v| (v as u16) << shift).collect();
        let path = args.out_dir.join(name);
        write_png16(
            &path,
            &Gray16::new(channel.width() as u32, channel.height() as u32, data)
                .map_err(anyhow::Error::from)?,
        )
        .map_err(anyhow::Error::from)?;
        outputs.push(name.to_string());
    }
    let stack_path = args.out_dir.join("stack.pmrt");
    write_tensor(&stack_path, &stack_to_tensor(&stack)).map_err(anyhow::Error::from)?;
    outputs.push("stack.pmrt".into());

    util::write_metadata(
        &args.out_dir,
        "demux",
        json!({
            "args": args,
            "width": mosaic.width(),
            "height": mosaic.height(),
            "png_shift_left": shift,
            "outputs": outputs,
        }),
    )?;
    Ok(())
}
