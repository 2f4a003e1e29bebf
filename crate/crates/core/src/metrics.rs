//! Detection quality: precision/recall, mAP@50, average IoU over matched
//! pairs (AIoU) and mean absolute orientation error (mAOE).
//!
//! Predictions are matched to ground truth per image, greedily in descending
//! confidence, using the exact polygon IoU with a strict `> 0.5` acceptance.
//! AIoU and mAOE are computed over the matched pairs only.
//!
//! Orientation is the direction of the axis from the front-edge midpoint to
//! the rear-edge midpoint, expressed as a line angle in `(−90°, 90°]`. The
//! difference between two line angles is folded into `[0°, 90°]`; the raw
//! difference is reported alongside.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::Detection;
use crate::geometry::{exact_iou, Parallelogram, Point2, EPS_VERTEX};

/// Matches need an IoU strictly above this.
pub const MATCH_IOU_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("front and rear edge midpoints coincide; orientation undefined")]
    DegenerateOrientation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthLabel {
    pub footprint: Parallelogram,
    pub class_id: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchPair {
    pub pred: usize,
    pub gt: usize,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MatchSet {
    pub pairs: Vec<MatchPair>,
    pub unmatched_preds: Vec<usize>,
    pub unmatched_gts: Vec<usize>,
}

impl MatchSet {
    pub fn true_positives(&self) -> usize {
        self.pairs.len()
    }

    pub fn false_positives(&self) -> usize {
        self.unmatched_preds.len()
    }

    pub fn false_negatives(&self) -> usize {
        self.unmatched_gts.len()
    }
}

/// Indices sorted by descending confidence; equal confidences keep input order.
fn by_confidence(preds: &[Detection]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| preds[b].confidence.total_cmp(&preds[a].confidence));
    order
}

pub fn match_detections(preds: &[Detection], gts: &[GroundTruthLabel]) -> MatchSet {
    let mut gt_taken = vec![false; gts.len()];
    let mut pred_matched = vec![false; preds.len()];
    let mut pairs = Vec::new();
    for i in by_confidence(preds) {
        let det = &preds[i];
        let mut best: Option<(usize, f64)> = None;
        for (g, gt) in gts.iter().enumerate() {
            if gt_taken[g] || gt.class_id != det.class_id {
                continue;
            }
            let iou = exact_iou(&det.footprint, &gt.footprint);
            if best.is_none_or(|(_, b)| iou > b) {
                best = Some((g, iou));
            }
        }
        if let Some((g, iou)) = best {
            if iou > MATCH_IOU_THRESHOLD {
                gt_taken[g] = true;
                pred_matched[i] = true;
                pairs.push(MatchPair {
                    pred: i,
                    gt: g,
                    iou,
                });
            }
        }
    }
    MatchSet {
        pairs,
        unmatched_preds: (0..preds.len()).filter(|&i| !pred_matched[i]).collect(),
        unmatched_gts: (0..gts.len()).filter(|&g| !gt_taken[g]).collect(),
    }
}

/// Precision and recall from raw counts. With no predictions precision is 1;
/// with no ground truth and no predictions recall is 1.
pub fn precision_recall_counts(tp: usize, fp: usize, fn_: usize) -> (f64, f64) {
    let precision = if tp + fp == 0 {
        1.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fn_ == 0 {
        if fp == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    (precision, recall)
}

pub fn precision_recall(ms: &MatchSet) -> (f64, f64) {
    precision_recall_counts(
        ms.true_positives(),
        ms.false_positives(),
        ms.false_negatives(),
    )
}

/// Detections and labels of one image.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalImage {
    pub image_id: String,
    pub detections: Vec<Detection>,
    pub labels: Vec<GroundTruthLabel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassAp {
    pub class_id: u32,
    pub ap: f64,
    pub ground_truths: usize,
    pub predictions: usize,
}

/// Area under the precision envelope (all-points interpolation).
/// `hits` are TP flags in descending-confidence order.
pub fn all_points_ap(hits: &[bool], num_gt: usize) -> f64 {
    if num_gt == 0 {
        return 0.0;
    }
    let mut recall = Vec::with_capacity(hits.len());
    let mut precision = Vec::with_capacity(hits.len());
    let (mut tp, mut fp) = (0usize, 0usize);
    for &hit in hits {
        if hit {
            tp += 1;
        } else {
            fp += 1;
        }
        recall.push(tp as f64 / num_gt as f64);
        precision.push(tp as f64 / (tp + fp) as f64);
    }
    for k in (0..precision.len().saturating_sub(1)).rev() {
        precision[k] = precision[k].max(precision[k + 1]);
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (r, p) in recall.iter().zip(&precision) {
        ap += (r - prev_recall) * p;
        prev_recall = *r;
    }
    ap
}

/// Per-class AP at IoU 0.5 with dataset-wide confidence ranking, using the
/// per-image matches. Classes without ground truth are not averaged. When no
/// image has any ground truth, mAP is 1 if there are also no predictions and
/// 0 otherwise.
pub fn average_precision_50(images: &[EvalImage], matches: &[MatchSet]) -> (f64, Vec<ClassAp>) {
    // class -> (confidence, image, pred index, hit)
    let mut ranked: BTreeMap<u32, Vec<(f64, usize, usize, bool)>> = BTreeMap::new();
    let mut gt_counts: BTreeMap<u32, usize> = BTreeMap::new();
    for (img_idx, (img, ms)) in images.iter().zip(matches).enumerate() {
        for gt in &img.labels {
            *gt_counts.entry(gt.class_id).or_default() += 1;
        }
        let mut hit = vec![false; img.detections.len()];
        for pair in &ms.pairs {
            hit[pair.pred] = true;
        }
        for (i, det) in img.detections.iter().enumerate() {
            ranked
                .entry(det.class_id)
                .or_default()
                .push((det.confidence, img_idx, i, hit[i]));
        }
    }
    let total_preds: usize = ranked.values().map(Vec::len).sum();
    let mut per_class = Vec::new();
    for (&class_id, &num_gt) in &gt_counts {
        let mut dets = ranked.remove(&class_id).unwrap_or_default();
        dets.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        let hits: Vec<bool> = dets.iter().map(|d| d.3).collect();
        per_class.push(ClassAp {
            class_id,
            ap: all_points_ap(&hits, num_gt),
            ground_truths: num_gt,
            predictions: dets.len(),
        });
    }
    let map = if per_class.is_empty() {
        if total_preds == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        per_class.iter().map(|c| c.ap).sum::<f64>() / per_class.len() as f64
    };
    (map, per_class)
}

/// Mean IoU over matched pairs; `None` without matches.
pub fn aiou(ms: &MatchSet) -> Option<f64> {
    mean(ms.pairs.iter().map(|p| p.iou))
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedMidpoints {
    pub front_mid: Point2,
    pub rear_mid: Point2,
}

impl OrientedMidpoints {
    pub fn of(par: &Parallelogram) -> Self {
        let (f1, f2) = par.front_edge();
        let (r1, r2) = par.rear_edge();
        Self {
            front_mid: f1.midpoint(f2),
            rear_mid: r1.midpoint(r2),
        }
    }

    /// Line angle of the front→rear axis in degrees, in `(−90, 90]`.
    /// A vertical axis gives exactly 90.
    pub fn axis_angle_deg(&self) -> Result<f64, MetricsError> {
        let d = self.rear_mid - self.front_mid;
        if d.norm() < EPS_VERTEX {
            return Err(MetricsError::DegenerateOrientation);
        }
        let mut angle = d.y.atan2(d.x).to_degrees();
        if angle > 90.0 {
            angle -= 180.0;
        } else if angle <= -90.0 {
            angle += 180.0;
        }
        Ok(angle)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientationError {
    /// Line-direction difference in `[0°, 90°]`.
    pub folded_deg: f64,
    /// Raw difference of the two slope angles, in `[0°, 180°)`.
    pub unfolded_deg: f64,
}

pub fn absolute_orientation_error(
    pred: &Parallelogram,
    gt: &Parallelogram,
) -> Result<OrientationError, MetricsError> {
    let a = OrientedMidpoints::of(pred).axis_angle_deg()?;
    let b = OrientedMidpoints::of(gt).axis_angle_deg()?;
    let unfolded = (a - b).abs();
    Ok(OrientationError {
        folded_deg: unfolded.min(180.0 - unfolded),
        unfolded_deg: unfolded,
    })
}

/// Mean orientation error over matched pairs. Pairs whose orientation is
/// undefined are skipped; `None` when nothing remains.
pub fn maoe(
    ms: &MatchSet,
    preds: &[Detection],
    gts: &[GroundTruthLabel],
) -> Option<OrientationError> {
    let errors: Vec<OrientationError> = ms
        .pairs
        .iter()
        .filter_map(|p| {
            absolute_orientation_error(&preds[p.pred].footprint, &gts[p.gt].footprint).ok()
        })
        .collect();
    Some(OrientationError {
        folded_deg: mean(errors.iter().map(|e| e.folded_deg))?,
        unfolded_deg: mean(errors.iter().map(|e| e.unfolded_deg))?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Support {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub images: usize,
    pub predictions: usize,
    pub ground_truths: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub map50: f64,
    /// Absent when nothing matched.
    pub aiou: Option<f64>,
    /// Degrees, folded; absent when nothing matched.
    pub maoe: Option<f64>,
    /// Degrees, raw slope-angle difference.
    pub maoe_unfolded: Option<f64>,
    pub ap_per_class: Vec<ClassAp>,
    pub support: Support,
}

/// Dataset-level evaluation. AIoU and mAOE average globally over all matched
/// pairs, not per image.
pub fn evaluate(images: &[EvalImage]) -> EvalReport {
    let matches: Vec<MatchSet> = images
        .iter()
        .map(|img| match_detections(&img.detections, &img.labels))
        .collect();
    evaluate_matched(images, &matches)
}

/// As [`evaluate`], with per-image matches computed by the caller (for
/// example in parallel).
pub fn evaluate_matched(images: &[EvalImage], matches: &[MatchSet]) -> EvalReport {
    let mut support = Support {
        images: images.len(),
        ..Support::default()
    };
    let mut ious = Vec::new();
    let mut orient = Vec::new();
    for (img, ms) in images.iter().zip(matches) {
        support.true_positives += ms.true_positives();
        support.false_positives += ms.false_positives();
        support.false_negatives += ms.false_negatives();
        support.predictions += img.detections.len();
        support.ground_truths += img.labels.len();
        ious.extend(ms.pairs.iter().map(|p| p.iou));
        orient.extend(ms.pairs.iter().filter_map(|p| {
            absolute_orientation_error(
                &img.detections[p.pred].footprint,
                &img.labels[p.gt].footprint,
            )
            .ok()
        }));
    }
    let (precision, recall) = precision_recall_counts(
        support.true_positives,
        support.false_positives,
        support.false_negatives,
    );
    let (map50, ap_per_class) = average_precision_50(images, matches);
    EvalReport {
        precision,
        recall,
        map50,
        aiou: mean(ious.into_iter()),
        maoe: mean(orient.iter().map(|o| o.folded_deg)),
        maoe_unfolded: mean(orient.iter().map(|o| o.unfolded_deg)),
        ap_per_class,
        support,
    }
}

impl std::fmt::Display for EvalReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
        writeln!(f, "precision      {:.4}", self.precision)?;
        writeln!(f, "recall         {:.4}", self.recall)?;
        writeln!(f, "mAP@50         {:.4}", self.map50)?;
        writeln!(f, "AIoU           {}", opt(self.aiou))?;
        writeln!(f, "mAOE (deg)     {}", opt(self.maoe))?;
        writeln!(f, "mAOE raw (deg) {}", opt(self.maoe_unfolded))?;
        for c in &self.ap_per_class {
            writeln!(
                f,
                "AP@50 class {:<3} {:.4} ({} gt, {} pred)",
                c.class_id, c.ap, c.ground_truths, c.predictions
            )?;
        }
        let s = &self.support;
        write!(
            f,
            "TP {} FP {} FN {} over {} images ({} predictions, {} labels)",
            s.true_positives,
            s.false_positives,
            s.false_negatives,
            s.images,
            s.predictions,
            s.ground_truths
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{reconstruct_parallelogram, Triangle25};

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    /// Rectangle of length `l` along its axis at angle `deg`, front edge first.
    fn oriented_box(cx: f64, cy: f64, l: f64, w: f64, deg: f64) -> Parallelogram {
        let (s, c) = deg.to_radians().sin_cos();
        let axis = p(c, s);
        let side = p(-s, c);
        let center = p(cx, cy);
        // front edge is at −axis so that front→rear points along +axis
        let front = center - axis * (l / 2.0);
        reconstruct_parallelogram(&Triangle25::new(
            center,
            front - side * (w / 2.0),
            front + side * (w / 2.0),
        ))
        .unwrap()
    }

    fn det(footprint: Parallelogram, confidence: f64) -> Detection {
        Detection {
            footprint,
            class_id: 0,
            confidence,
        }
    }

    fn gt(footprint: Parallelogram) -> GroundTruthLabel {
        GroundTruthLabel {
            footprint,
            class_id: 0,
        }
    }

    #[test]
    fn perfect_predictions_match_everything() {
        let boxes = [
            oriented_box(0.0, 0.0, 10.0, 4.0, 20.0),
            oriented_box(30.0, 5.0, 8.0, 3.0, -70.0),
        ];
        let preds: Vec<Detection> = boxes.iter().map(|b| det(*b, 0.9)).collect();
        let gts: Vec<GroundTruthLabel> = boxes.iter().map(|b| gt(*b)).collect();
        let ms = match_detections(&preds, &gts);
        assert_eq!(ms.pairs.len(), 2);
        assert!(ms.pairs.iter().all(|p| (p.iou - 1.0).abs() < 1e-12));
        assert_eq!(precision_recall(&ms), (1.0, 1.0));
        assert!((aiou(&ms).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(maoe(&ms, &preds, &gts).unwrap().folded_deg, 0.0);
    }

    #[test]
    fn no_overlap_is_all_fp_and_fn() {
        let preds = vec![det(oriented_box(0.0, 0.0, 10.0, 4.0, 0.0), 0.9)];
        let gts = vec![gt(oriented_box(100.0, 0.0, 10.0, 4.0, 0.0))];
        let ms = match_detections(&preds, &gts);
        assert!(ms.pairs.is_empty());
        assert_eq!(ms.unmatched_preds, vec![0]);
        assert_eq!(ms.unmatched_gts, vec![0]);
        assert_eq!(aiou(&ms), None);
        assert_eq!(maoe(&ms, &preds, &gts), None);
    }

    /// Tries every injective assignment and keeps the one greedy matching
    /// must reproduce on this fixture: max matched count, then max total IoU.
    fn exhaustive_best(preds: &[Detection], gts: &[GroundTruthLabel]) -> (usize, f64) {
        let mut best = (0, 0.0);
        let n = gts.len();
        let mut choice = vec![usize::MAX; preds.len()];
        fn rec(
            k: usize,
            choice: &mut Vec<usize>,
            preds: &[Detection],
            gts: &[GroundTruthLabel],
            n: usize,
            best: &mut (usize, f64),
        ) {
            if k == preds.len() {
                let mut cnt = 0;
                let mut sum = 0.0;
                for (i, &g) in choice.iter().enumerate() {
                    if g != usize::MAX {
                        let iou = exact_iou(&preds[i].footprint, &gts[g].footprint);
                        if iou <= 0.5 {
                            return;
                        }
                        cnt += 1;
                        sum += iou;
                    }
                }
                if cnt > best.0 || (cnt == best.0 && sum > best.1) {
                    *best = (cnt, sum);
                }
                return;
            }
            for g in (0..n).chain(std::iter::once(usize::MAX)) {
                if g != usize::MAX && choice[..k].contains(&g) {
                    continue;
                }
                choice[k] = g;
                rec(k + 1, choice, preds, gts, n, best);
            }
        }
        rec(0, &mut choice, preds, gts, n, &mut best);
        best
    }

    #[test]
    fn two_predictions_over_one_gt() {
        let g = oriented_box(0.0, 0.0, 10.0, 4.0, 0.0);
        let preds = vec![
            det(oriented_box(0.5, 0.0, 10.0, 4.0, 0.0), 0.7),
            det(oriented_box(0.2, 0.0, 10.0, 4.0, 0.0), 0.9),
        ];
        let gts = vec![gt(g)];
        let ms = match_detections(&preds, &gts);
        assert_eq!(ms.pairs.len(), 1);
        assert_eq!(ms.pairs[0].pred, 1);
        assert_eq!(ms.unmatched_preds, vec![0]);
        let (count, sum) = exhaustive_best(&preds, &gts);
        assert_eq!(count, 1);
        assert!((sum - ms.pairs[0].iou).abs() < 1e-12);
    }

    #[test]
    fn matching_threshold_is_strict() {
        // shifting a 10x4 box by 10/3 along x gives IoU exactly 0.5
        let g = oriented_box(0.0, 0.0, 10.0, 4.0, 0.0);
        let shifted = g.translated(p(10.0 / 3.0, 0.0));
        let iou = exact_iou(&g, &shifted);
        assert!((iou - 0.5).abs() < 1e-12);
        let ms = match_detections(&[det(shifted, 0.9)], &[gt(g)]);
        assert_eq!(ms.pairs.is_empty(), iou <= 0.5);
    }

    #[test]
    fn matching_is_class_aware() {
        let b = oriented_box(0.0, 0.0, 10.0, 4.0, 0.0);
        let mut d = det(b, 0.9);
        d.class_id = 3;
        let ms = match_detections(&[d], &[gt(b)]);
        assert!(ms.pairs.is_empty());
    }

    #[test]
    fn precision_recall_conventions() {
        assert_eq!(precision_recall_counts(0, 0, 3), (1.0, 0.0));
        assert_eq!(precision_recall_counts(0, 0, 0), (1.0, 1.0));
        assert_eq!(precision_recall_counts(2, 1, 1), (2.0 / 3.0, 2.0 / 3.0));
    }

    #[test]
    fn ap_examples() {
        assert_eq!(all_points_ap(&[true, true], 2), 1.0);
        assert_eq!(all_points_ap(&[false, false], 2), 0.0);
        assert_eq!(all_points_ap(&[true, false], 1), 1.0);
        // hand sweep: (r, p) = (0.5, 1), (0.5, 0.5), (1, 2/3) → envelope 1, 2/3, 2/3
        let ap = all_points_ap(&[true, false, true], 2);
        assert!((ap - (0.5 * 1.0 + 0.5 * 2.0 / 3.0)).abs() < 1e-15);
        assert_eq!(all_points_ap(&[], 3), 0.0);
    }

    #[test]
    fn ap_over_images() {
        let g = oriented_box(0.0, 0.0, 10.0, 4.0, 0.0);
        let images = vec![EvalImage {
            image_id: "a".into(),
            detections: vec![det(g, 0.9), det(g.translated(p(50.0, 0.0)), 0.8)],
            labels: vec![gt(g)],
        }];
        let report = evaluate(&images);
        assert_eq!(report.map50, 1.0);
        assert_eq!(report.precision, 0.5);
        assert_eq!(report.recall, 1.0);
    }

    #[test]
    fn empty_predictions_give_zero_recall() {
        let g = oriented_box(0.0, 0.0, 10.0, 4.0, 0.0);
        let images = vec![EvalImage {
            image_id: "a".into(),
            detections: vec![],
            labels: vec![gt(g)],
        }];
        let r = evaluate(&images);
        assert_eq!((r.precision, r.recall, r.map50), (1.0, 0.0, 0.0));
        assert_eq!(r.aiou, None);
    }

    #[test]
    fn aiou_mean_of_pairs() {
        let ms = MatchSet {
            pairs: vec![
                MatchPair {
                    pred: 0,
                    gt: 0,
                    iou: 0.6,
                },
                MatchPair {
                    pred: 1,
                    gt: 1,
                    iou: 0.8,
                },
            ],
            ..MatchSet::default()
        };
        assert!((aiou(&ms).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn aoe_cases() {
        let horizontal = oriented_box(0.0, 0.0, 10.0, 4.0, 0.0);
        assert_eq!(
            absolute_orientation_error(&horizontal, &horizontal)
                .unwrap()
                .folded_deg,
            0.0
        );
        let diag = oriented_box(0.0, 0.0, 10.0, 4.0, 45.0);
        let e = absolute_orientation_error(&diag, &horizontal).unwrap();
        assert!((e.folded_deg - 45.0).abs() < 1e-9);
        let up = oriented_box(0.0, 0.0, 10.0, 4.0, 80.0);
        let down = oriented_box(0.0, 0.0, 10.0, 4.0, -80.0);
        let e = absolute_orientation_error(&down, &up).unwrap();
        assert!((e.unfolded_deg - 160.0).abs() < 1e-9);
        assert!((e.folded_deg - 20.0).abs() < 1e-9);
    }

    #[test]
    fn vertical_axis_is_exactly_ninety() {
        let v = oriented_box(0.0, 0.0, 10.0, 4.0, 90.0);
        let m = OrientedMidpoints {
            front_mid: p(3.0, 1.0),
            rear_mid: p(3.0, -5.0),
        };
        assert_eq!(m.axis_angle_deg().unwrap(), 90.0);
        assert!((OrientedMidpoints::of(&v).axis_angle_deg().unwrap() - 90.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_orientation() {
        // front and rear midpoints both at the center
        let flat = Parallelogram::reflect(&Triangle25::new(p(0.0, 0.0), p(-1.0, 0.0), p(1.0, 0.0)));
        assert_eq!(
            absolute_orientation_error(&flat, &flat),
            Err(MetricsError::DegenerateOrientation)
        );
    }

    #[test]
    fn aoe_is_continuous_through_vertical() {
        // sweep a box through the ±90° wrap in 1° steps against a fixed one
        let reference = oriented_box(0.0, 0.0, 10.0, 4.0, 85.0);
        let mut prev: Option<f64> = None;
        for step in 0..=40 {
            let deg = 70.0 + step as f64;
            let e = absolute_orientation_error(&oriented_box(0.0, 0.0, 10.0, 4.0, deg), &reference)
                .unwrap()
                .folded_deg;
            assert!((e - (deg - 85.0).abs()).abs() < 1e-9, "deg {deg}: {e}");
            if let Some(pv) = prev {
                assert!((e - pv).abs() <= 1.0 + 1e-9);
            }
            prev = Some(e);
        }
    }

    #[test]
    fn iou_and_orientation_are_independent() {
        // a near-square rotated 25°: large overlap, large orientation error
        let g1 = oriented_box(0.0, 0.0, 10.0, 9.0, 0.0);
        let p1 = oriented_box(0.0, 0.0, 10.0, 9.0, 25.0);
        let iou1 = exact_iou(&p1, &g1);
        let aoe1 = absolute_orientation_error(&p1, &g1).unwrap().folded_deg;
        assert!(iou1 > 0.7 && aoe1 > 20.0, "iou {iou1} aoe {aoe1}");
        // an elongated box shifted along its axis: small overlap, tiny error
        let g2 = oriented_box(0.0, 0.0, 40.0, 10.0, 30.0);
        let p2 = oriented_box(0.0, 0.0, 40.0, 10.0, 32.0).translated(p(9.5, 5.5));
        let iou2 = exact_iou(&p2, &g2);
        let aoe2 = absolute_orientation_error(&p2, &g2).unwrap().folded_deg;
        assert!(
            iou2 < 0.6 && iou2 > 0.5 && aoe2 < 5.0,
            "iou {iou2} aoe {aoe2}"
        );
    }
}
