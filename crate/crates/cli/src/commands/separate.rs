use std::path::PathBuf;

use clap::Args;
use polarsep_core::io::{image_to_tensor, stack_to_tensor, write_tensor};
use polarsep_core::separate::{separate, SeparatorConfig};
use serde_json::json;

use crate::util;
use crate::Failure;

#[derive(Args, serde::Serialize)]
pub struct SeparateArgs {
    /// Mixed stack M (.pmrt, 4 x H x W), linear raw.
    #[arg(long, visible_alias = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub lambda_pol: f64,
    #[arg(long, default_value_t = 0.1)]
    pub lambda_pncc: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub lambda_tv: f64,
    #[arg(long, default_value_t = 0.1)]
    pub step_size: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn run(args: &SeparateArgs) -> Result<(), Failure> {
    let cfg = SeparatorConfig {
        lambda_pol: args.lambda_pol,
        lambda_pncc: args.lambda_pncc,
        lambda_tv: args.lambda_tv,
        step_size: args.step_size,
        max_iters: args.max_iters,
        tol: args.tol,
        seed: args.seed,
        ..SeparatorConfig::default()
    };
    cfg.validate().map_err(|e| Failure::usage(e.to_string()))?;
    util::ensure_out_dir(&args.out_dir)?;
    let m = util::read_stack(&args.input)?;

    match separate(&m, &cfg) {
        Ok(result) => {
            write_tensor(
                args.out_dir.join("r_hat.pmrt"),
                &stack_to_tensor(&result.r_hat),
            )
            .map_err(anyhow::Error::from)?;
            write_tensor(
                args.out_dir.join("t_hat.pmrt"),
                &image_to_tensor(&result.t_hat),
            )
            .map_err(anyhow::Error::from)?;

            let mut rows = Vec::new();
            for (stage, trace) in [("1", &result.stage1_trace), ("2", &result.stage2_trace)] {
                for (i, v) in trace.iter().enumerate() {
                    rows.push(format!("{stage},{i},{v}"));
                }
            }
            util::write_csv(
                &args.out_dir.join("trace.csv"),
                "stage,iteration,objective",
                &rows,
            )?;

            util::write_metadata(
                &args.out_dir,
                "separate",
                json!({
                    "args": args,
                    "config": cfg,
                    "converged": result.converged,
                    "max_box_violation": result.max_box_violation,
                    "stage1_iterations": result.stage1_trace.len(),
                    "stage2_iterations": result.stage2_trace.len(),
                    "outputs": ["r_hat.pmrt", "t_hat.pmrt", "trace.csv"],
                }),
            )?;
            Ok(())
        }
        Err(failure) => {
            // Keep whatever the solver produced and always leave a sidecar.
            let mut outputs = Vec::new();
            if let Some(partial) = &failure.partial_reflection {
                write_tensor(
                    args.out_dir.join("r_hat_partial.pmrt"),
                    &stack_to_tensor(partial),
                )
                .map_err(anyhow::Error::from)?;
                outputs.push("r_hat_partial.pmrt");
            }
            util::write_metadata(
                &args.out_dir,
                "separate",
                json!({
                    "args": args,
                    "config": cfg,
                    "error": failure.source.to_string(),
                    "stage1_iterations": failure.stage1_trace.len(),
                    "outputs": outputs,
                }),
            )?;
            Err(Failure::Run(failure.into()))
        }
    }
}
