use std::path::PathBuf;

use anyhow::{ensure, Result};
use clap::Args;
use groundplane::datagen::{
    generate_scene, scene_seed, sweep_detections, CameraModel, Scene, SceneConfig,
};
use groundplane::geometry::Parallelogram;
use rayon::prelude::*;

use super::image_id;
use crate::config::RunConfig;
use crate::formats::{write_jsonl, write_text, BoxRecord, DetectionRecord, LabelRecord};
use crate::OutDir;

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of scenes, overriding the config.
    #[arg(long)]
    pub images: Option<usize>,
    /// Jitter levels (px) for extra prediction files, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub sigma: Vec<f64>,
    #[command(flatten)]
    pub out: OutDir,
}

pub fn sweep_file_name(sigma: f64) -> String {
    format!("predictions_sigma_{sigma}.jsonl")
}

pub fn run(args: &GenArgs) -> Result<()> {
    let mut cfg = RunConfig::load(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(n) = args.images {
        cfg.images = n;
    }
    cfg.sigma_sweep.extend(&args.sigma);
    ensure!(cfg.images > 0, "at least one image is required");
    ensure!(
        cfg.sigma_sweep.iter().all(|s| s.is_finite() && *s >= 0.0),
        "sigma values must be non-negative"
    );
    let cam = CameraModel::from_config(&cfg.camera)?;

    let scenes: Vec<(u64, Scene)> = (0..cfg.images)
        .into_par_iter()
        .map(|i| {
            let seed = scene_seed(cfg.seed, i as u64);
            let scene_cfg = SceneConfig {
                seed,
                ..cfg.scene.clone()
            };
            generate_scene(&scene_cfg, &cam).map(|s| (seed, s))
        })
        .collect::<Result<_, _>>()?;

    let dir = args.out.create()?;
    let class = cfg.scene.class_id;
    let mut boxes = Vec::new();
    let mut labels = Vec::new();
    let mut preds = Vec::new();
    for (i, (_, scene)) in scenes.iter().enumerate() {
        let id = image_id(i);
        boxes.extend(scene.boxes.iter().map(|b| BoxRecord::new(&id, class, b)));
        labels.extend(
            scene
                .labels
                .iter()
                .map(|l| LabelRecord::new(&id, class, &l.footprint, Some(l.residual))),
        );
        preds.extend(
            scene
                .predictions
                .iter()
                .map(|d| DetectionRecord::new(&id, d)),
        );
    }
    write_jsonl(&dir.join("scenes.jsonl"), &boxes)?;
    write_jsonl(&dir.join("labels.jsonl"), &labels)?;
    write_jsonl(&dir.join("predictions.jsonl"), &preds)?;
    write_text(&dir.join("config.toml"), &toml::to_string(&cfg)?)?;

    for &sigma in &cfg.sigma_sweep {
        let records: Vec<DetectionRecord> = scenes
            .par_iter()
            .enumerate()
            .flat_map_iter(|(i, (seed, scene))| {
                let footprints: Vec<Parallelogram> =
                    scene.labels.iter().map(|l| l.footprint).collect();
                let id = image_id(i);
                sweep_detections(&footprints, &cfg.scene, sigma, scene_seed(*seed, 1))
                    .into_iter()
                    .map(move |d| DetectionRecord::new(&id, &d))
            })
            .collect();
        write_jsonl(&dir.join(sweep_file_name(sigma)), &records)?;
    }

    println!(
        "wrote {} scenes, {} vehicles, {} predictions, {} sweep files to {}",
        scenes.len(),
        labels.len(),
        preds.len(),
        cfg.sigma_sweep.len(),
        dir.display()
    );
    Ok(())
}
