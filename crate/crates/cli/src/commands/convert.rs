use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, ValueEnum};
use groundplane::datagen::{box_to_label, complete_lshape, CameraModel};
use groundplane::geometry::Point2;

use crate::config::RunConfig;
use crate::formats::{load_jsonl, write_jsonl, BoxRecord, LShapeRecord, LabelRecord};
use crate::OutDir;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceFormat {
    /// World-space boxes, projected with the configured camera.
    Box3d,
    /// Three image corners, the middle one shared by both visible edges.
    Lshape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetFormat {
    Label,
}

#[derive(Debug, Clone, Args)]
pub struct ConvertArgs {
    #[arg(long, value_enum)]
    pub from: SourceFormat,
    #[arg(long, value_enum, default_value = "label")]
    pub to: TargetFormat,
    #[arg(long)]
    pub input: PathBuf,
    /// Run configuration whose `[camera]` table is used for box3d input.
    #[arg(long)]
    pub camera: Option<PathBuf>,
    /// Output file (default: labels.jsonl in the output directory).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutDir,
}

pub fn run(args: &ConvertArgs) -> Result<()> {
    let labels: Vec<LabelRecord> = match args.from {
        SourceFormat::Box3d => {
            let cfg = RunConfig::load(args.camera.as_deref())?;
            let cam = CameraModel::from_config(&cfg.camera)?;
            load_jsonl(&args.input, |r: BoxRecord| {
                let fit = box_to_label(&r.to_box()?, &cam)?;
                Ok(LabelRecord::new(
                    &r.image_id,
                    r.class_id,
                    &fit.footprint,
                    Some(fit.residual),
                ))
            })?
        }
        SourceFormat::Lshape => load_jsonl(&args.input, |r: LShapeRecord| {
            let [a, b, c] = r.corners.map(Point2::from);
            Ok(LabelRecord::new(
                &r.image_id,
                r.class_id,
                &complete_lshape(a, b, c)?,
                None,
            ))
        })?,
    };
    let path = match &args.output {
        Some(p) => p.clone(),
        None => args.out.create()?.join("labels.jsonl"),
    };
    write_jsonl(&path, &labels)?;
    println!("wrote {} labels to {}", labels.len(), path.display());
    Ok(())
}
