use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Result;
use clap::Args;
use groundplane::metrics::{evaluate_matched, match_detections, EvalImage, EvalReport, MatchSet};
use rayon::prelude::*;

use crate::formats::{load_jsonl, write_json, write_text, DetectionRecord, LabelRecord};
use crate::OutDir;

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Detections (JSONL), after NMS.
    #[arg(long)]
    pub preds: PathBuf,
    /// Ground-truth labels (JSONL).
    #[arg(long)]
    pub labels: PathBuf,
    #[command(flatten)]
    pub out: OutDir,
}

/// Groups both files by image id; images are visited in id order.
pub fn load_images(preds: &Path, labels: &Path) -> Result<Vec<EvalImage>> {
    let dets = load_jsonl(preds, |r: DetectionRecord| {
        Ok((r.image_id.clone(), r.to_detection()?))
    })?;
    let gts = load_jsonl(labels, |r: LabelRecord| {
        Ok((r.image_id.clone(), r.to_label()?))
    })?;
    let mut images: BTreeMap<String, EvalImage> = BTreeMap::new();
    fn entry(images: &mut BTreeMap<String, EvalImage>, id: String) -> &mut EvalImage {
        images.entry(id.clone()).or_insert_with(|| EvalImage {
            image_id: id,
            detections: Vec::new(),
            labels: Vec::new(),
        })
    }
    for (id, gt) in gts {
        entry(&mut images, id).labels.push(gt);
    }
    for (id, det) in dets {
        entry(&mut images, id).detections.push(det);
    }
    Ok(images.into_values().collect())
}

pub fn evaluate_files(preds: &Path, labels: &Path) -> Result<EvalReport> {
    let images = load_images(preds, labels)?;
    let matches: Vec<MatchSet> = images
        .par_iter()
        .map(|img| match_detections(&img.detections, &img.labels))
        .collect();
    Ok(evaluate_matched(&images, &matches))
}

pub fn run(args: &EvalArgs) -> Result<()> {
    let report = evaluate_files(&args.preds, &args.labels)?;
    let dir = args.out.create()?;
    write_json(&dir.join("eval_report.json"), &report)?;
    let text = format!("{report}\n");
    write_text(&dir.join("eval_report.txt"), &text)?;
    print!("{text}");
    Ok(())
}
