use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, ensure, Result};
use clap::Args;
use groundplane::codec::{
    decode_predictions, nms_benchmark, Detection, NmsReport, RawPrediction, BENCH_MIN_REPETITIONS,
    DEFAULT_CONFIDENCE_THRESHOLD, DEFAULT_NMS_IOU_THRESHOLD,
};
use groundplane::datagen::synthetic_nms_workload;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::GridArgs;
use crate::formats::{load_jsonl, write_jsonl, write_text, RawPredictionRecord};
use crate::plot::scatter_chart;
use crate::OutDir;

/// Points drawn in the scatter plot; the CSV keeps every pair.
const MAX_PLOTTED_PAIRS: usize = 5000;

#[derive(Debug, Clone, Args)]
pub struct NmsBenchArgs {
    /// Raw per-anchor predictions (JSONL); decoded and benchmarked per image.
    #[arg(
        long,
        required_unless_present = "synthetic",
        conflicts_with = "synthetic"
    )]
    pub preds_raw: Option<PathBuf>,
    /// Size of a synthetic single-image workload instead.
    #[arg(long)]
    pub synthetic: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_NMS_IOU_THRESHOLD)]
    pub iou_thresh: f64,
    /// Timed repetitions per variant (at least 11).
    #[arg(long, default_value_t = BENCH_MIN_REPETITIONS)]
    pub reps: usize,
    /// Seed of the synthetic workload.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_CONFIDENCE_THRESHOLD)]
    pub conf_thresh: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmsRecord {
    pub image_id: String,
    #[serde(flatten)]
    pub report: NmsReport,
}

fn workloads(args: &NmsBenchArgs) -> Result<Vec<(String, Vec<Detection>)>> {
    if let Some(n) = args.synthetic {
        ensure!(n >= 2, "--synthetic needs at least 2 detections");
        return Ok(vec![(
            "synthetic".to_string(),
            synthetic_nms_workload(n, args.seed)?,
        )]);
    }
    let path = args.preds_raw.as_ref().expect("clap requires one source");
    let raws = load_jsonl(path, |r: RawPredictionRecord| {
        Ok((r.image_id.clone(), r.to_raw()?))
    })?;
    let mut by_image: BTreeMap<String, Vec<RawPrediction>> = BTreeMap::new();
    for (id, raw) in raws {
        by_image.entry(id).or_default().push(raw);
    }
    let grid = args.grid.grid()?;
    let decoded = by_image
        .into_par_iter()
        .map(|(id, raws)| {
            Ok((
                id,
                decode_predictions(&raws, &grid, args.conf_thresh)?.detections,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(decoded)
}

pub fn run(args: &NmsBenchArgs) -> Result<()> {
    ensure!(
        args.iou_thresh > 0.0 && args.iou_thresh <= 1.0,
        "--iou-thresh must be in (0, 1]"
    );
    let work = workloads(args)?;
    let mut records = Vec::new();
    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record(["image_id", "kept", "candidate", "exact_iou", "approx_iou"])?;
    let mut plotted = Vec::new();
    // timings must not compete for cores, so images run one at a time
    for (id, dets) in &work {
        if dets.len() < 2 {
            eprintln!("skipping {id}: {} detection(s)", dets.len());
            continue;
        }
        let bench = nms_benchmark(dets, args.iou_thresh, args.reps)?;
        for p in &bench.pairs {
            csv.serialize((id, p.kept, p.candidate, p.exact, p.approx))?;
        }
        plotted.extend(bench.pairs.iter().map(|p| (p.exact, p.approx)));
        let r = &bench.report;
        println!(
            "{id}: {} detections, kept {} exact / {} approx ({:.1}% disagree), mean |ΔIoU| {:.4} over {} pairs, speedup {:.2}x",
            r.detections,
            r.kept_exact,
            r.kept_approx,
            100.0 * r.kept_disagreement_rate,
            r.mean_abs_iou_discrepancy,
            r.pairs_examined,
            r.speedup
        );
        records.push(NmsRecord {
            image_id: id.clone(),
            report: bench.report,
        });
    }
    if records.is_empty() {
        bail!("no image has at least two detections after decoding");
    }
    let dir = args.out.create()?;
    write_jsonl(&dir.join("nms_report.jsonl"), &records)?;
    std::fs::write(dir.join("nms_pairs.csv"), csv.into_inner()?)?;
    let step = plotted.len().div_ceil(MAX_PLOTTED_PAIRS).max(1);
    let sample: Vec<(f64, f64)> = plotted.into_iter().step_by(step).collect();
    write_text(
        &dir.join("nms_pairs.svg"),
        &scatter_chart(
            "IoU per examined pair",
            "exact IoU",
            "rectangle IoU",
            &sample,
        ),
    )?;
    Ok(())
}
