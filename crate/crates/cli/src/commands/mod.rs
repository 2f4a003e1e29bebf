pub mod convert;
pub mod eval;
pub mod gen;
pub mod gradcheck;
pub mod nms_bench;
pub mod train_toy;

use clap::{Args, ValueEnum};
use groundplane::assignment::{build_anchor_grid, AnchorGrid};
use groundplane::loss::LossVariant;

/// Anchor grid of the image the raw predictions or labels refer to.
#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 1920.0)]
    pub image_width: f64,
    #[arg(long, default_value_t = 1080.0)]
    pub image_height: f64,
    /// Feature-map stride (px).
    #[arg(long, default_value_t = 8.0)]
    pub stride: f64,
}

impl GridArgs {
    pub fn grid(&self) -> anyhow::Result<AnchorGrid> {
        Ok(build_anchor_grid(
            self.image_width,
            self.image_height,
            self.stride,
        )?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    Chamfer,
    Ordered,
}

impl From<LossArg> for LossVariant {
    fn from(l: LossArg) -> Self {
        match l {
            LossArg::Chamfer => LossVariant::ChamferMse,
            LossArg::Ordered => LossVariant::OrderedMse,
        }
    }
}

pub fn image_id(i: usize) -> String {
    format!("scene_{i:04}")
}
