use std::path::PathBuf;

use clap::Args;
use polarsep_core::synth::{
    clean_pair, gamma_subtraction_demo, make_triple, SynthConfig, TriplePair,
};
use serde_json::json;

use crate::util;
use crate::Failure;

#[derive(Args, serde::Serialize)]
pub struct DemoLinearityArgs {
    /// Directory produced by `synth` (m.pmrt, r.pmrt, t.pmrt, meta.json).
    #[arg(long, conflicts_with = "generate")]
    pub triple_dir: Option<PathBuf>,
    /// Generate a seeded triple of this size instead, e.g. "64x64".
    #[arg(long)]
    pub generate: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(args: &DemoLinearityArgs) -> Result<(), Failure> {
    util::ensure_out_dir(&args.out_dir)?;
    let triple = match (&args.triple_dir, &args.generate) {
        (Some(dir), None) => load_triple(dir)?,
        (None, Some(size)) => {
            let (w, h) = util::parse_size(size).map_err(|e| Failure::usage(e.to_string()))?;
            let cfg = SynthConfig::seeded(args.seed);
            make_triple(
                &util::generate_base(w, h, args.seed.wrapping_add(1), 1),
                &util::generate_base(w, h, args.seed.wrapping_add(2), 1),
                &cfg,
            )
            .map_err(anyhow::Error::from)?
        }
        _ => {
            return Err(Failure::usage(
                "provide --triple-dir, or --generate WxH with --seed",
            ))
        }
    };

    let report = gamma_subtraction_demo(&triple).map_err(anyhow::Error::from)?;
    println!(
        "raw  space |M - R - T|: max {:.3} LSB, mean {:.4} LSB",
        report.raw_max_lsb(),
        report.raw_mean_lsb()
    );
    println!(
        "gamma space residual:   max {:.6}, mean {:.6} (normalized units)",
        report.gamma_max, report.gamma_mean
    );
    if report.raw_mean > 0.0 {
        println!(
            "gamma/raw mean residual ratio: {:.1}x",
            report.gamma_mean / report.raw_mean
        );
    }

    util::write_metadata(
        &args.out_dir,
        "demo-linearity",
        json!({
            "args": args,
            "report": report,
            "raw_max_lsb": report.raw_max_lsb(),
            "raw_mean_lsb": report.raw_mean_lsb(),
        }),
    )?;
    Ok(())
}

/// Rebuild a triple from a `synth` output directory; the config comes from
/// the metadata sidecar.
fn load_triple(dir: &std::path::Path) -> Result<TriplePair, Failure> {
    let mixed = util::read_stack(&dir.join("m.pmrt"))?;
    let reflection = util::read_stack(&dir.join("r.pmrt"))?;
    let transmission = util::read_stack(&dir.join("t.pmrt"))?;
    let meta_path = dir.join("meta.json");
    let meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(&meta_path)
            .map_err(|e| Failure::Run(anyhow::anyhow!("reading {}: {e}", meta_path.display())))?,
    )
    .map_err(anyhow::Error::from)?;
    let config: SynthConfig = serde_json::from_value(meta["run"]["config"].clone())
        .map_err(|e| Failure::Run(anyhow::anyhow!("bad config in {}: {e}", meta_path.display())))?;
    let scale = meta["run"]["scale_dn_per_unit"].as_f64().unwrap_or(1.0);
    let outcome = clean_pair(&reflection, &transmission).map_err(anyhow::Error::from)?;
    Ok(TriplePair {
        mixed,
        reflection: outcome.reflection,
        transmission: outcome.transmission,
        scale,
        verdict: outcome.verdict,
        clamped_negatives: outcome.clamped_negatives,
        config,
    })
}
