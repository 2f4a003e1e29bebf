//! Command-line driver: scene generation, evaluation, NMS benchmark, toy
//! training, label conversion and gradient checking.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage or I/O error.

use std::fmt;
use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod formats;
pub mod plot;

/// Returned when a command ran but its check did not pass (exit code 1).
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

#[derive(Debug, Parser)]
#[command(
    name = "groundplane",
    version,
    about = "2.5D ground-plane footprint toolkit"
)]
pub struct Cli {
    /// Worker threads for per-image work (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic scenes, labels and noisy predictions.
    Gen(commands::gen::GenArgs),
    /// Evaluate detections against labels.
    Eval(commands::eval::EvalArgs),
    /// Time rectangle-IoU NMS against exact NMS.
    NmsBench(commands::nms_bench::NmsBenchArgs),
    /// Fit per-anchor offset tables to one labeled image.
    TrainToy(commands::train_toy::TrainToyArgs),
    /// Convert 3D boxes or L-shape annotations to footprint labels.
    Convert(commands::convert::ConvertArgs),
    /// Compare analytic loss gradients with finite differences.
    Gradcheck(commands::gradcheck::GradcheckArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutDir {
    /// Output directory.
    #[arg(
        long = "out",
        env = "GROUNDPLANE_OUT_DIR",
        default_value = "groundplane-out"
    )]
    pub dir: PathBuf,
}

impl OutDir {
    pub fn create(&self) -> Result<&PathBuf> {
        std::fs::create_dir_all(&self.dir)?;
        Ok(&self.dir)
    }
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.jobs {
        anyhow::ensure!(n > 0, "--jobs must be positive");
        // fails only if a pool already exists, e.g. in tests
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match cli.command {
        Command::Gen(a) => commands::gen::run(&a),
        Command::Eval(a) => commands::eval::run(&a),
        Command::NmsBench(a) => commands::nms_bench::run(&a),
        Command::TrainToy(a) => commands::train_toy::run(&a),
        Command::Convert(a) => commands::convert::run(&a),
        Command::Gradcheck(a) => commands::gradcheck::run(&a),
    }
}

/// Maps an error to the documented exit code.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<CheckFailed>().is_some() {
        1
    } else {
        2
    }
}
