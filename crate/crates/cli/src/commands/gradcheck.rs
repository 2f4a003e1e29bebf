use anyhow::{ensure, Result};
use clap::Args;
use groundplane::toytrain::{run_gradcheck, GRADCHECK_TIE_MARGIN};

use super::LossArg;
use crate::CheckFailed;

#[derive(Debug, Clone, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Central-difference step (px).
    #[arg(long, default_value_t = 1e-6)]
    pub h: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "chamfer")]
    pub loss: LossArg,
    /// Largest accepted relative error.
    #[arg(long, default_value_t = 1e-5)]
    pub tolerance: f64,
}

pub fn run(args: &GradcheckArgs) -> Result<()> {
    ensure!(args.samples > 0, "--samples must be positive");
    ensure!(args.h > 0.0 && args.h.is_finite(), "--h must be positive");
    let s = run_gradcheck(args.loss.into(), args.samples, args.h, args.seed);
    let pass = s.checked > 0 && s.max_rel_error < args.tolerance;
    println!(
        "{}: {} samples, {} checked, {} skipped within {GRADCHECK_TIE_MARGIN} px of a tie, h = {:e}, max relative error {:.3e} (limit {:e}): {}",
        s.loss.name(),
        s.samples,
        s.checked,
        s.skipped,
        s.h,
        s.max_rel_error,
        args.tolerance,
        if pass { "PASS" } else { "FAIL" }
    );
    if !pass {
        return Err(CheckFailed(format!(
            "gradient check failed: max relative error {:.3e}",
            s.max_rel_error
        ))
        .into());
    }
    Ok(())
}
