use std::path::PathBuf;

use clap::Args;
use polarsep_core::fresnel::brewster_angle;
use polarsep_core::io::{stack_to_tensor, write_tensor};
use polarsep_core::mosaic::{remux_mosaic, MosaicPattern};
use polarsep_core::synth::{make_triple, SynthConfig};
use serde_json::json;

use crate::util;
use crate::Failure;

#[derive(Args, serde::Serialize)]
pub struct SynthArgs {
    /// Reflection base image (.png 16-bit or .pmrt); or use --generate.
    #[arg(long, required_unless_present = "generate", conflicts_with = "generate")]
    pub base_r: Option<PathBuf>,
    /// Transmission base image; required with --base-r.
    #[arg(long, requires = "base_r", conflicts_with = "generate")]
    pub base_t: Option<PathBuf>,
    /// Generate seeded smooth bases of this size, e.g. "64x64".
    #[arg(long)]
    pub generate: Option<String>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Reflection mixing weight in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// Transmission mixing weight in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Glass refractive index.
    #[arg(long, default_value_t = 1.7)]
    pub n: f64,
    /// Incidence angle in degrees; defaults to the Brewster angle of n.
    #[arg(long)]
    pub theta_deg: Option<f64>,
    /// Override the Fresnel reflection DoP with a fixed value in [0, 1].
    #[arg(long)]
    pub rho_r: Option<f64>,
    /// Override the Fresnel transmission DoP with a fixed value in [0, 1].
    #[arg(long)]
    pub rho_t: Option<f64>,
    /// Reflection angle of polarization, degrees.
    #[arg(long, default_value_t = 0.0)]
    pub phi_r_deg: f64,
    /// Transmission angle of polarization, degrees; seeded draw if absent.
    #[arg(long)]
    pub phi_t_deg: Option<f64>,
    /// Additive Gaussian noise sigma in DN.
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 12)]
    pub bit_depth: u8,
    /// Keep ideal floating-point stacks instead of quantizing to DN.
    #[arg(long)]
    pub no_quantize: bool,
    /// Also pack each stack into a sensor mosaic PNG (requires
    /// quantization); feeds straight into `demux` / `stokes`.
    #[arg(long, conflicts_with = "no_quantize")]
    pub mosaic_pngs: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn run(args: &SynthArgs) -> Result<(), Failure> {
    let (base_r, base_t) = match (&args.base_r, &args.base_t, &args.generate) {
        (Some(r), Some(t), None) => (util::read_image_auto(r)?, util::read_image_auto(t)?),
        (None, None, Some(size)) => {
            let (w, h) = util::parse_size(size).map_err(|e| Failure::usage(e.to_string()))?;
            (
                util::generate_base(w, h, args.seed.wrapping_add(1), 1),
                util::generate_base(w, h, args.seed.wrapping_add(2), 1),
            )
        }
        _ => {
            return Err(Failure::usage(
                "provide --base-r and --base-t, or --generate WxH",
            ))
        }
    };

    let seeded = SynthConfig::seeded(args.seed);
    let theta_i = match args.theta_deg {
        Some(deg) => deg.to_radians(),
        None => brewster_angle(args.n).map_err(|e| Failure::usage(e.to_string()))?,
    };
    let cfg = SynthConfig {
        a: args.a,
        b: args.b,
        n: args.n,
        theta_i,
        rho_r_override: args.rho_r,
        rho_t_override: args.rho_t,
        phi_r: args.phi_r_deg.to_radians(),
        phi_t: args.phi_t_deg.map(f64::to_radians).unwrap_or(seeded.phi_t),
        noise_sigma: args.noise_sigma,
        bit_depth: args.bit_depth,
        quantize: !args.no_quantize,
        seed: args.seed,
    };
    cfg.validate().map_err(|e| Failure::usage(e.to_string()))?;

    util::ensure_out_dir(&args.out_dir)?;
    let triple = make_triple(&base_r, &base_t, &cfg).map_err(anyhow::Error::from)?;
    let mut outputs = vec!["m.pmrt", "r.pmrt", "t.pmrt"];
    for (name, stack) in [
        ("m.pmrt", &triple.mixed),
        ("r.pmrt", &triple.reflection),
        ("t.pmrt", &triple.transmission),
    ] {
        write_tensor(args.out_dir.join(name), &stack_to_tensor(stack))
            .map_err(anyhow::Error::from)?;
    }
    if args.mosaic_pngs {
        for (name, stack) in [
            ("m_mosaic.png", &triple.mixed),
            ("r_mosaic.png", &triple.reflection),
            ("t_mosaic.png", &triple.transmission),
        ] {
            let mosaic =
                remux_mosaic(stack, MosaicPattern::default(), cfg.bit_depth, false)
                    .map_err(anyhow::Error::from)?;
            util::write_mosaic_png(&args.out_dir.join(name), &mosaic)?;
            outputs.push(name);
        }
    }
    let (rho_r, rho_t) = triple.config.layer_dops().map_err(anyhow::Error::from)?;

    util::write_metadata(
        &args.out_dir,
        "synth",
        json!({
            "args": args,
            "config": triple.config,
            "layer_dops": { "rho_r": rho_r, "rho_t": rho_t },
            "scale_dn_per_unit": triple.scale,
            "clean_verdict": triple.verdict,
            "clamped_negatives": triple.clamped_negatives,
            "mosaic_png_shift_left": args.mosaic_pngs.then_some(16 - cfg.bit_depth),
            "outputs": outputs,
        }),
    )?;
    Ok(())
}
