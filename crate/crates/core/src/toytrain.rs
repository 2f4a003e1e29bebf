//! Gradient descent on per-anchor offset tables.
//!
//! Each active anchor owns its own `(v1, v2, v3)` parameters, so there is no
//! shared network: what is exercised is only the regression loss, the label
//! assignment and the decode → NMS → evaluation path. Flipping the order of
//! the label's front vertices at random recreates the situation where a
//! prediction lists them in the opposite order from its label, which the
//! Chamfer loss ignores and a fixed-order loss cannot.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::{assign_anchors, AnchorGrid, ToleranceEta};
use crate::codec::{
    approx_nms, decode_offsets, decode_predictions, encode, CodecError, Detection, OffsetTriple,
    RawPrediction, DEFAULT_CONFIDENCE_THRESHOLD, DEFAULT_NMS_IOU_THRESHOLD,
};
use crate::geometry::{triangle_from_parallelogram, Point2, Triangle25};
use crate::loss::{nearest_neighbor_margin, triangle_from_params, triangle_to_params, LossVariant};
use crate::metrics::{evaluate, EvalImage, EvalReport, GroundTruthLabel};

/// Chamfer samples closer than this to a nearest-neighbor tie are not
/// gradient-checked (px).
pub const GRADCHECK_TIE_MARGIN: f64 = 1e-3;

/// Number of trailing steps averaged by [`TrainTrace::plateau_loss`].
pub const PLATEAU_WINDOW: usize = 50;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error("no anchor is active for any label; check eta and stride")]
    NoActiveAnchors,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub loss: LossVariant,
    pub learning_rate: f64,
    pub steps: usize,
    /// Per-anchor, per-step probability of swapping the label's front vertices.
    pub flip_prob: f64,
    pub seed: u64,
    /// Multiplies loss and gradient.
    pub loss_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            loss: LossVariant::ChamferMse,
            learning_rate: 0.1,
            steps: 500,
            flip_prob: 0.0,
            seed: 0,
            loss_scale: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(TrainError::InvalidConfig(
                "learning rate must be finite and non-negative".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.flip_prob) {
            return Err(TrainError::InvalidConfig(
                "flip probability must lie in [0, 1]".into(),
            ));
        }
        if !(self.loss_scale > 0.0 && self.loss_scale.is_finite()) {
            return Err(TrainError::InvalidConfig(
                "loss scale must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub anchor_index: usize,
    pub gt_index: usize,
    pub offsets: OffsetTriple,
}

/// Learnable offsets of the active anchors. Every entry has confidence 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetTable {
    pub entries: Vec<TableEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub loss_variant: LossVariant,
    /// Mean loss after the last update, against the labels in their given
    /// vertex order. With zero steps this is the loss of the zero table.
    pub final_loss: f64,
    /// Mean loss over active anchors before each update.
    pub losses: Vec<f64>,
    /// Per-entry mean vertex distance to the label after training, with the
    /// front vertices matched in whichever order is closer.
    pub final_anchor_errors: Vec<f64>,
    pub mean_vertex_error: f64,
    pub active_anchors: usize,
    pub labels_without_anchors: Vec<usize>,
    pub aiou: Option<f64>,
    pub maoe: Option<f64>,
}

impl TrainTrace {
    /// Mean of the last [`PLATEAU_WINDOW`] recorded losses.
    pub fn plateau_loss(&self) -> Option<f64> {
        let n = self.losses.len().min(PLATEAU_WINDOW);
        if n == 0 {
            return None;
        }
        let tail = &self.losses[self.losses.len() - n..];
        Some(tail.iter().sum::<f64>() / n as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub table: OffsetTable,
    pub trace: TrainTrace,
    pub report: EvalReport,
    pub detections: Vec<Detection>,
}

fn triangle_error(pred: &Triangle25, gt: &Triangle25) -> f64 {
    let center = pred.p0.distance(gt.p0);
    let direct = pred.p1.distance(gt.p1) + pred.p2.distance(gt.p2);
    let swapped = pred.p1.distance(gt.p2) + pred.p2.distance(gt.p1);
    (center + direct.min(swapped)) / 3.0
}

/// Trains a zero-initialized offset table on one scene with plain gradient
/// descent.
///
/// The recorded loss is the mean over active anchors. Parameters are
/// disjoint per anchor, so each anchor is updated with the gradient of its
/// own loss (the summed objective); averaging would only divide the
/// effective learning rate by the anchor count.
pub fn train_offsets(
    labels: &[GroundTruthLabel],
    grid: &AnchorGrid,
    eta: ToleranceEta,
    cfg: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    cfg.validate()?;
    let gts: Vec<Triangle25> = labels
        .iter()
        .map(|l| triangle_from_parallelogram(&l.footprint))
        .collect();
    let assignments = assign_anchors(grid, &gts, eta);
    if assignments.is_empty() {
        return Err(TrainError::NoActiveAnchors);
    }
    let labels_without_anchors = (0..gts.len())
        .filter(|g| !assignments.iter().any(|a| a.gt_index == *g))
        .collect();

    let anchors: Vec<Point2> = assignments
        .iter()
        .map(|a| grid.anchor(a.anchor_index).expect("assignment within grid"))
        .collect();
    let mut table = OffsetTable {
        entries: assignments
            .iter()
            .map(|a| TableEntry {
                anchor_index: a.anchor_index,
                gt_index: a.gt_index,
                offsets: OffsetTriple::default(),
            })
            .collect(),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut losses = Vec::with_capacity(cfg.steps);
    let n = table.entries.len() as f64;
    for _ in 0..cfg.steps {
        let mut total = 0.0;
        for (entry, &anchor) in table.entries.iter_mut().zip(&anchors) {
            let flip = rng.random::<f64>() < cfg.flip_prob;
            let label = gts[entry.gt_index];
            let target = if flip { label.swapped() } else { label };
            let pred = decode_offsets(&entry.offsets, anchor);
            total += cfg.loss.value(&pred, &target) * cfg.loss_scale;
            let g = cfg
                .loss
                .gradient(&pred, &target)
                .scaled(cfg.loss_scale * cfg.learning_rate);
            // decode is a translation, so d/dv equals d/dp
            entry.offsets.v1 = entry.offsets.v1 - g.d_p0;
            entry.offsets.v2 = entry.offsets.v2 - g.d_p1;
            entry.offsets.v3 = entry.offsets.v3 - g.d_p2;
        }
        losses.push(total / n);
    }

    let final_loss = table
        .entries
        .iter()
        .zip(&anchors)
        .map(|(e, &a)| {
            cfg.loss
                .value(&decode_offsets(&e.offsets, a), &gts[e.gt_index])
                * cfg.loss_scale
        })
        .sum::<f64>()
        / n;
    let final_anchor_errors: Vec<f64> = table
        .entries
        .iter()
        .zip(&anchors)
        .map(|(e, &a)| triangle_error(&decode_offsets(&e.offsets, a), &gts[e.gt_index]))
        .collect();
    let mean_vertex_error = final_anchor_errors.iter().sum::<f64>() / n;

    let (report, detections) = decode_and_eval(&table, grid, labels)?;
    let trace = TrainTrace {
        loss_variant: cfg.loss,
        final_loss,
        losses,
        final_anchor_errors,
        mean_vertex_error,
        active_anchors: table.entries.len(),
        labels_without_anchors,
        aiou: report.aiou,
        maoe: report.maoe,
    };
    Ok(TrainOutcome {
        table,
        trace,
        report,
        detections,
    })
}

/// Decodes every table entry at confidence 1 with its label's class,
/// filters at the default confidence threshold, drops collapsed
/// footprints, runs rectangle-IoU NMS and evaluates against `labels`.
pub fn decode_and_eval(
    table: &OffsetTable,
    grid: &AnchorGrid,
    labels: &[GroundTruthLabel],
) -> Result<(EvalReport, Vec<Detection>), TrainError> {
    let raws: Vec<RawPrediction> = table
        .entries
        .iter()
        .map(|e| {
            let class = labels[e.gt_index].class_id as usize;
            let mut class_scores = vec![0.0; class + 1];
            class_scores[class] = 1.0;
            RawPrediction {
                anchor_index: e.anchor_index,
                offsets: e.offsets,
                class_scores,
            }
        })
        .collect();
    let batch = decode_predictions(&raws, grid, DEFAULT_CONFIDENCE_THRESHOLD)?;
    let kept = approx_nms(&batch.detections, DEFAULT_NMS_IOU_THRESHOLD);
    let report = evaluate(&[EvalImage {
        image_id: String::new(),
        detections: kept.clone(),
        labels: labels.to_vec(),
    }]);
    Ok((report, kept))
}

/// Offset table holding the exact encoding of each label, for anchors
/// assigned under `eta`.
pub fn oracle_table(
    labels: &[GroundTruthLabel],
    grid: &AnchorGrid,
    eta: ToleranceEta,
) -> OffsetTable {
    let gts: Vec<Triangle25> = labels
        .iter()
        .map(|l| triangle_from_parallelogram(&l.footprint))
        .collect();
    OffsetTable {
        entries: assign_anchors(grid, &gts, eta)
            .into_iter()
            .map(|a| TableEntry {
                anchor_index: a.anchor_index,
                gt_index: a.gt_index,
                offsets: encode(&gts[a.gt_index], grid.anchor(a.anchor_index).unwrap()),
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GradCheck {
    Checked {
        max_rel_error: f64,
    },
    /// Too close to a Chamfer nearest-neighbor tie.
    Skipped {
        margin: f64,
    },
}

/// Deviation between an analytic and a numeric derivative. Relative to the
/// larger magnitude once that exceeds 1, absolute below it.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0)
}

/// Central finite differences with step `h` on all six predicted
/// coordinates, compared against the analytic gradient.
pub fn gradient_check(
    variant: LossVariant,
    pred: &Triangle25,
    gt: &Triangle25,
    h: f64,
) -> GradCheck {
    if variant == LossVariant::ChamferMse {
        let margin = nearest_neighbor_margin(pred, gt);
        if margin <= GRADCHECK_TIE_MARGIN {
            return GradCheck::Skipped { margin };
        }
    }
    let analytic = variant.gradient(pred, gt).to_array();
    let base = triangle_to_params(pred);
    let mut worst: f64 = 0.0;
    for k in 0..6 {
        let mut plus = base;
        let mut minus = base;
        plus[k] += h;
        minus[k] -= h;
        let numeric = (variant.value(&triangle_from_params(&plus), gt)
            - variant.value(&triangle_from_params(&minus), gt))
            / (2.0 * h);
        worst = worst.max(relative_error(analytic[k], numeric));
    }
    GradCheck::Checked {
        max_rel_error: worst,
    }
}

/// Random prediction/label pair. Labels lie in a ±50 px box; the prediction
/// is the label plus noise, with its front vertices swapped half the time.
/// A quarter of samples place a predicted front vertex close to the
/// bisector of the label's front vertices, i.e. near a Chamfer kink.
pub fn random_gradcheck_sample(rng: &mut ChaCha8Rng) -> (Triangle25, Triangle25) {
    let mut pt = |r: f64| Point2::new(rng.random_range(-r..r), rng.random_range(-r..r));
    let gt = Triangle25::new(pt(50.0), pt(50.0), pt(50.0));
    let mut pred = Triangle25::new(gt.p0 + pt(10.0), gt.p1 + pt(10.0), gt.p2 + pt(10.0));
    if rng.random::<bool>() {
        pred = pred.swapped();
    }
    if rng.random::<f64>() < 0.25 {
        let mid = gt.p1.midpoint(gt.p2);
        let axis = gt.p2 - gt.p1;
        let len = axis.norm().max(1e-6);
        let u = axis * (1.0 / len);
        let perp = Point2::new(-u.y, u.x);
        let along: f64 = rng.random_range(-20.0..20.0);
        let offset = 10f64.powf(rng.random_range(-3.3..-1.0))
            * if rng.random::<bool>() { 1.0 } else { -1.0 };
        pred.p1 = mid + perp * along + u * offset;
    }
    (pred, gt)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradCheckSummary {
    pub loss: LossVariant,
    pub samples: usize,
    pub checked: usize,
    pub skipped: usize,
    pub h: f64,
    pub max_rel_error: f64,
}

pub fn run_gradcheck(variant: LossVariant, samples: usize, h: f64, seed: u64) -> GradCheckSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = GradCheckSummary {
        loss: variant,
        samples,
        checked: 0,
        skipped: 0,
        h,
        max_rel_error: 0.0,
    };
    for _ in 0..samples {
        let (pred, gt) = random_gradcheck_sample(&mut rng);
        match gradient_check(variant, &pred, &gt, h) {
            GradCheck::Checked { max_rel_error } => {
                summary.checked += 1;
                summary.max_rel_error = summary.max_rel_error.max(max_rel_error);
            }
            GradCheck::Skipped { .. } => summary.skipped += 1,
        }
    }
    summary
}
