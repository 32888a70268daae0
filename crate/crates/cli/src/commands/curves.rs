use std::path::PathBuf;

use clap::Args;
use polarsep_core::fresnel::{brewster_angle, dop_curve};
use polarsep_core::losses::{pncc_value, FeaturePyramidSpec};
use serde_json::json;

use crate::util;
use crate::Failure;

#[derive(Args, serde::Serialize)]
pub struct FresnelCurveArgs {
    /// Glass refractive index (> 1).
    #[arg(long, default_value_t = 1.7)]
    pub n: f64,
    /// Grid size over [0°, 90°).
    #[arg(long, default_value_t = 91)]
    pub samples: usize,
    /// Output CSV path ("theta_deg,rho_r,rho_t").
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_fresnel(args: &FresnelCurveArgs) -> Result<(), Failure> {
    let rows = dop_curve(args.n, args.samples).map_err(|e| Failure::usage(e.to_string()))?;
    let lines: Vec<String> = rows
        .iter()
        .map(|r| format!("{},{},{}", r.theta_deg, r.rho_r, r.rho_t))
        .collect();
    util::write_csv(&args.out, "theta_deg,rho_r,rho_t", &lines)?;
    let meta = args.out.with_extension("meta.json");
    util::write_metadata_at(
        &meta,
        "fresnel-curve",
        json!({
            "args": args,
            "brewster_deg": brewster_angle(args.n).map_err(anyhow::Error::from)?.to_degrees(),
            "outputs": [args.out.file_name().and_then(|s| s.to_str())],
        }),
    )?;
    Ok(())
}

#[derive(Args, serde::Serialize)]
pub struct PnccCurveArgs {
    /// Reflection image (.png or .pmrt).
    #[arg(long)]
    pub reflection: PathBuf,
    /// Transmission image (.png or .pmrt), same size.
    #[arg(long)]
    pub transmission: PathBuf,
    /// Output CSV path ("alpha,pncc").
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated mixing factors; default 0.01 then 0.05..=1.0 in
    /// steps of 0.05.
    #[arg(long)]
    pub alphas: Option<String>,
}

/// Default sweep: 0.01, then 0.05 to 1.0 in 0.05 steps.
pub fn default_alphas() -> Vec<f64> {
    let mut alphas = vec![0.01];
    alphas.extend((1..=20).map(|i| i as f64 * 0.05));
    alphas
}

pub fn run_pncc(args: &PnccCurveArgs) -> Result<(), Failure> {
    let alphas = match &args.alphas {
        Some(s) => s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| Failure::usage(format!("bad --alphas: {e}")))?,
        None => default_alphas(),
    };
    if alphas.is_empty() {
        return Err(Failure::usage("--alphas must not be empty"));
    }
    let r = util::read_image_auto(&args.reflection)?;
    let t = util::read_image_auto(&args.transmission)?;
    let spec = FeaturePyramidSpec::default();

    let mut lines = Vec::with_capacity(alphas.len());
    for &alpha in &alphas {
        // Mix: one side keeps the transmission plus leftover reflection,
        // the other is the pure reflection scaled by alpha.
        let a = t.zip_map(&r, |tv, rv| tv + (1.0 - alpha) * rv).map_err(anyhow::Error::from)?;
        let b = r.map(|rv| alpha * rv);
        let value = pncc_value(&a, &b, &spec).map_err(anyhow::Error::from)?;
        lines.push(format!("{alpha},{value}"));
    }
    util::write_csv(&args.out, "alpha,pncc", &lines)?;
    let meta = args.out.with_extension("meta.json");
    util::write_metadata_at(
        &meta,
        "pncc-curve",
        json!({
            "args": args,
            "alphas": alphas,
            "outputs": [args.out.file_name().and_then(|s| s.to_str())],
        }),
    )?;
    Ok(())
}
