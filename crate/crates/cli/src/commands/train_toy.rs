use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use groundplane::assignment::ToleranceEta;
use groundplane::loss::LossVariant;
use groundplane::metrics::{evaluate, EvalImage, EvalReport, GroundTruthLabel};
use groundplane::toytrain::{train_offsets, TrainConfig, TrainOutcome};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GridArgs, LossArg};
use crate::formats::{
    load_jsonl, write_json, write_jsonl, write_text, DetectionRecord, LabelRecord,
};
use crate::plot::line_chart;
use crate::OutDir;

#[derive(Debug, Clone, Args)]
pub struct TrainToyArgs {
    /// Labels (JSONL); each image is trained independently.
    #[arg(long)]
    pub scene: PathBuf,
    /// Train only this image.
    #[arg(long)]
    pub image_id: Option<String>,
    #[arg(long, value_enum, default_value = "chamfer")]
    pub loss: LossArg,
    /// Probability of swapping a label's front vertices, drawn per anchor
    /// and step.
    #[arg(long, default_value_t = 0.0)]
    pub flip_prob: f64,
    #[arg(long, default_value_t = 500)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub loss_scale: f64,
    /// Assignment tolerance (px); 1.5 strides by default.
    #[arg(long)]
    pub eta: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub out: OutDir,
}

/// One image's training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRun {
    pub image_id: String,
    pub active_anchors: usize,
    pub labels_without_anchors: Vec<usize>,
    pub final_loss: f64,
    pub plateau_loss: Option<f64>,
    pub mean_vertex_error: f64,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub loss: LossVariant,
    pub learning_rate: f64,
    pub steps: usize,
    pub flip_prob: f64,
    pub seed: u64,
    pub loss_scale: f64,
    pub stride: f64,
    pub eta_px: f64,
    pub runs: Vec<ImageRun>,
    /// Over all trained images.
    pub report: EvalReport,
}

pub fn run(args: &TrainToyArgs) -> Result<()> {
    let records = load_jsonl(&args.scene, |r: LabelRecord| {
        Ok((r.image_id.clone(), r.to_label()?))
    })?;
    let mut images: BTreeMap<String, Vec<GroundTruthLabel>> = BTreeMap::new();
    for (id, label) in records {
        if args.image_id.as_ref().is_none_or(|want| *want == id) {
            images.entry(id).or_default().push(label);
        }
    }
    if images.is_empty() {
        match &args.image_id {
            Some(id) => bail!("no labels for image {id}"),
            None => bail!("{} holds no labels", args.scene.display()),
        }
    }
    let grid = args.grid.grid()?;
    let eta = match args.eta {
        Some(px) => ToleranceEta::new(px)?,
        None => ToleranceEta::for_stride(grid.stride),
    };
    let cfg = TrainConfig {
        loss: args.loss.into(),
        learning_rate: args.lr,
        steps: args.steps,
        flip_prob: args.flip_prob,
        seed: args.seed,
        loss_scale: args.loss_scale,
    };
    // every image is an independent run with the same seed
    let outcomes: Vec<(String, Vec<GroundTruthLabel>, TrainOutcome)> = images
        .into_par_iter()
        .map(|(id, labels)| {
            let outcome = train_offsets(&labels, &grid, eta, &cfg)
                .with_context(|| format!("training on {id}"))?;
            Ok((id, labels, outcome))
        })
        .collect::<Result<_>>()?;

    let dir = args.out.create()?;
    let mut trace_csv = csv::Writer::from_writer(Vec::new());
    trace_csv.write_record(["image_id", "step", "loss"])?;
    let mut anchor_csv = csv::Writer::from_writer(Vec::new());
    anchor_csv.write_record([
        "image_id",
        "anchor_index",
        "gt_index",
        "v1_x",
        "v1_y",
        "v2_x",
        "v2_y",
        "v3_x",
        "v3_y",
        "vertex_error",
    ])?;
    let mut mean_series = vec![0.0; cfg.steps + 1];
    let mut detections = Vec::new();
    let mut eval_images = Vec::new();
    let mut runs = Vec::new();
    for (id, labels, outcome) in outcomes {
        let trace = &outcome.trace;
        // row k is the loss before update k; the last row is the end state
        let series = trace.losses.iter().chain([&trace.final_loss]);
        for (step, loss) in series.enumerate() {
            trace_csv.serialize((&id, step, loss))?;
            mean_series[step] += loss;
        }
        for (e, err) in outcome.table.entries.iter().zip(&trace.final_anchor_errors) {
            let o = &e.offsets;
            anchor_csv.serialize((
                &id,
                e.anchor_index,
                e.gt_index,
                o.v1.x,
                o.v1.y,
                o.v2.x,
                o.v2.y,
                o.v3.x,
                o.v3.y,
                err,
            ))?;
        }
        detections.extend(
            outcome
                .detections
                .iter()
                .map(|d| DetectionRecord::new(&id, d)),
        );
        println!(
            "{id}: {} anchors, final loss {:.6}, mean vertex error {:.4} px, {} detections after NMS",
            trace.active_anchors,
            trace.final_loss,
            trace.mean_vertex_error,
            outcome.detections.len()
        );
        if !trace.labels_without_anchors.is_empty() {
            eprintln!(
                "warning: {id}: labels without active anchors: {:?}",
                trace.labels_without_anchors
            );
        }
        runs.push(ImageRun {
            image_id: id.clone(),
            active_anchors: trace.active_anchors,
            labels_without_anchors: trace.labels_without_anchors.clone(),
            final_loss: trace.final_loss,
            plateau_loss: trace.plateau_loss(),
            mean_vertex_error: trace.mean_vertex_error,
            report: outcome.report.clone(),
        });
        eval_images.push(EvalImage {
            image_id: id,
            detections: outcome.detections,
            labels,
        });
    }
    let n = runs.len() as f64;
    mean_series.iter_mut().for_each(|v| *v /= n);

    std::fs::write(dir.join("train_trace.csv"), trace_csv.into_inner()?)?;
    std::fs::write(dir.join("train_anchors.csv"), anchor_csv.into_inner()?)?;
    write_text(
        &dir.join("train_trace.svg"),
        &line_chart(
            &format!("{} training loss, mean over images", cfg.loss.name()),
            "step",
            "mean loss (px²)",
            &mean_series,
        ),
    )?;
    write_jsonl(&dir.join("train_detections.jsonl"), &detections)?;
    let summary = TrainSummary {
        loss: cfg.loss,
        learning_rate: cfg.learning_rate,
        steps: cfg.steps,
        flip_prob: cfg.flip_prob,
        seed: cfg.seed,
        loss_scale: cfg.loss_scale,
        stride: grid.stride,
        eta_px: eta.pixels(),
        runs,
        report: evaluate(&eval_images),
    };
    write_json(&dir.join("train_summary.json"), &summary)?;
    Ok(())
}
