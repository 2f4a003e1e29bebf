//! From per-anchor network outputs to final detections.
//!
//! Each anchor predicts three offset vectors `v1, v2, v3`; adding them to the
//! anchor position gives the triangle `(p0, p1, p2)`, which is expanded to a
//! parallelogram by reflection. Detections below the confidence threshold
//! and collapsed footprints are dropped, and the remaining overlap is removed
//! with greedy non-maximum suppression.
//!
//! Two suppression metrics are provided: the exact polygon IoU and the cheap
//! IoU of the footprints' axis-aligned bounding rectangles. [`nms_benchmark`]
//! runs both on the same input and reports their speed and disagreement.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::AnchorGrid;
use crate::geometry::{
    aabb, aabb_iou, convex_intersection, ConvexPolygon, Parallelogram, Point2, Rect, Triangle25,
    EPS_AREA,
};

/// Confidence threshold applied before NMS.
pub const DEFAULT_CONFIDENCE_THRESHOLD: f64 = 0.1;

pub const DEFAULT_NMS_IOU_THRESHOLD: f64 = 0.5;

/// Benchmark timing: warm-up runs discarded before measuring.
pub const BENCH_WARMUP_RUNS: usize = 2;
/// Benchmark timing: minimum number of measured repetitions.
pub const BENCH_MIN_REPETITIONS: usize = 11;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("anchor index {index} outside grid of {len} anchors")]
    IndexOutOfGrid { index: usize, len: usize },
    #[error("prediction has no class scores")]
    EmptyScores,
    #[error("class score {0} outside [0, 1]")]
    ScoreOutOfRange(f64),
    #[error("non-finite offset")]
    NonFiniteOffset,
    #[error("benchmark needs at least two detections, got {0}")]
    TooFewDetections(usize),
}

/// Offsets from an anchor to the triangle's center and front vertices.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OffsetTriple {
    pub v1: Point2,
    pub v2: Point2,
    pub v3: Point2,
}

impl OffsetTriple {
    pub fn is_finite(&self) -> bool {
        self.v1.is_finite() && self.v2.is_finite() && self.v3.is_finite()
    }
}

pub fn encode(tri: &Triangle25, anchor: Point2) -> OffsetTriple {
    OffsetTriple {
        v1: tri.p0 - anchor,
        v2: tri.p1 - anchor,
        v3: tri.p2 - anchor,
    }
}

pub fn decode_offsets(offsets: &OffsetTriple, anchor: Point2) -> Triangle25 {
    Triangle25::new(
        anchor + offsets.v1,
        anchor + offsets.v2,
        anchor + offsets.v3,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawPrediction {
    pub anchor_index: usize,
    pub offsets: OffsetTriple,
    pub class_scores: Vec<f64>,
}

impl RawPrediction {
    pub fn validate(&self) -> Result<(), CodecError> {
        if !self.offsets.is_finite() {
            return Err(CodecError::NonFiniteOffset);
        }
        if self.class_scores.is_empty() {
            return Err(CodecError::EmptyScores);
        }
        if let Some(&s) = self.class_scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(CodecError::ScoreOutOfRange(s));
        }
        Ok(())
    }

    /// `(class_id, score)` of the highest class score; the lowest class id
    /// wins ties.
    pub fn best_class(&self) -> Option<(u32, f64)> {
        self.class_scores
            .iter()
            .enumerate()
            .fold(None, |best: Option<(u32, f64)>, (i, &s)| match best {
                Some((_, b)) if b >= s => best,
                _ => Some((i as u32, s)),
            })
    }
}

pub fn decode(raw: &RawPrediction, grid: &AnchorGrid) -> Result<Triangle25, CodecError> {
    let anchor = grid
        .anchor(raw.anchor_index)
        .ok_or(CodecError::IndexOutOfGrid {
            index: raw.anchor_index,
            len: grid.len(),
        })?;
    Ok(decode_offsets(&raw.offsets, anchor))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub footprint: Parallelogram,
    pub class_id: u32,
    pub confidence: f64,
}

/// Anything carrying a confidence that can be thresholded.
pub trait Scored {
    fn score(&self) -> f64;
}

impl Scored for Detection {
    fn score(&self) -> f64 {
        self.confidence
    }
}

impl Scored for RawPrediction {
    fn score(&self) -> f64 {
        self.best_class().map_or(0.0, |(_, s)| s)
    }
}

/// Keeps items whose score is at least `threshold` (closed inequality).
pub fn filter_confidence<T: Scored>(items: impl IntoIterator<Item = T>, threshold: f64) -> Vec<T> {
    items
        .into_iter()
        .filter(|d| d.score() >= threshold)
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DecodedBatch {
    pub detections: Vec<Detection>,
    pub dropped_low_confidence: usize,
    pub dropped_degenerate: usize,
}

/// Decodes, confidence-filters and drops collapsed footprints. Out-of-grid
/// anchors and malformed scores are hard errors.
pub fn decode_predictions(
    raws: &[RawPrediction],
    grid: &AnchorGrid,
    confidence_threshold: f64,
) -> Result<DecodedBatch, CodecError> {
    let mut batch = DecodedBatch::default();
    for raw in raws {
        raw.validate()?;
        let tri = decode(raw, grid)?;
        let (class_id, confidence) = raw.best_class().ok_or(CodecError::EmptyScores)?;
        if confidence < confidence_threshold {
            batch.dropped_low_confidence += 1;
            continue;
        }
        if tri.area() < EPS_AREA {
            batch.dropped_degenerate += 1;
            continue;
        }
        batch.detections.push(Detection {
            footprint: Parallelogram::reflect(&tri),
            class_id,
            confidence,
        });
    }
    Ok(batch)
}

fn confidence_order(dets: &[Detection]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    // stable: equal confidences keep input order
    order.sort_by(|&a, &b| {
        dets[b]
            .confidence
            .partial_cmp(&dets[a].confidence)
            .unwrap_or(Ordering::Equal)
    });
    order
}

/// Greedy class-aware NMS. `iou(i, j)` is only queried for same-class pairs
/// where `i` is kept and `j` is still alive. Returns kept indices in
/// descending confidence.
fn greedy_nms<F>(dets: &[Detection], iou_threshold: f64, mut iou: F) -> Vec<usize>
where
    F: FnMut(usize, usize) -> f64,
{
    let order = confidence_order(dets);
    let mut suppressed = vec![false; dets.len()];
    let mut keep = Vec::new();
    for (rank, &i) in order.iter().enumerate() {
        if suppressed[i] {
            continue;
        }
        keep.push(i);
        for &j in &order[rank + 1..] {
            if suppressed[j] || dets[j].class_id != dets[i].class_id {
                continue;
            }
            if iou(i, j) >= iou_threshold {
                suppressed[j] = true;
            }
        }
    }
    keep
}

fn approx_keep(dets: &[Detection], iou_threshold: f64) -> Vec<usize> {
    let rects: Vec<Rect> = dets.iter().map(|d| aabb(&d.footprint)).collect();
    greedy_nms(dets, iou_threshold, |i, j| aabb_iou(&rects[i], &rects[j]))
}

struct ExactFootprint {
    polygon: ConvexPolygon,
    area: f64,
}

fn exact_footprints(dets: &[Detection]) -> Vec<ExactFootprint> {
    dets.iter()
        .map(|d| {
            let polygon = d.footprint.to_polygon();
            let area = polygon.area();
            ExactFootprint { polygon, area }
        })
        .collect()
}

fn exact_pair_iou(a: &ExactFootprint, b: &ExactFootprint) -> f64 {
    let inter = convex_intersection(&a.polygon, &b.polygon).area();
    let union = a.area + b.area - inter;
    if union < EPS_AREA {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}

fn exact_keep(dets: &[Detection], iou_threshold: f64) -> Vec<usize> {
    let polys = exact_footprints(dets);
    greedy_nms(dets, iou_threshold, |i, j| {
        exact_pair_iou(&polys[i], &polys[j])
    })
}

fn gather(dets: &[Detection], keep: &[usize]) -> Vec<Detection> {
    keep.iter().map(|&i| dets[i].clone()).collect()
}

/// Greedy NMS using the IoU of axis-aligned bounding rectangles.
pub fn approx_nms(dets: &[Detection], iou_threshold: f64) -> Vec<Detection> {
    gather(dets, &approx_keep(dets, iou_threshold))
}

/// Greedy NMS using the exact polygon IoU.
pub fn exact_nms(dets: &[Detection], iou_threshold: f64) -> Vec<Detection> {
    gather(dets, &exact_keep(dets, iou_threshold))
}

/// Exact and rectangle IoU of one suppression-candidate pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IouPair {
    pub kept: usize,
    pub candidate: usize,
    pub exact: f64,
    pub approx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmsReport {
    pub detections: usize,
    pub iou_threshold: f64,
    pub repetitions: usize,
    pub kept_exact: usize,
    pub kept_approx: usize,
    /// Size of the symmetric difference of the two kept sets.
    pub kept_disagreement: usize,
    /// `kept_disagreement` over the size of the union of the kept sets.
    pub kept_disagreement_rate: f64,
    pub pairs_examined: usize,
    pub mean_abs_iou_discrepancy: f64,
    pub max_abs_iou_discrepancy: f64,
    /// Median wall time in seconds.
    pub exact_time: f64,
    pub approx_time: f64,
    pub speedup: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmsBenchmark {
    pub report: NmsReport,
    pub pairs: Vec<IouPair>,
}

fn median(mut samples: Vec<Duration>) -> Duration {
    samples.sort();
    samples[samples.len() / 2]
}

fn time_runs<F: FnMut() -> usize>(repetitions: usize, mut run: F) -> Duration {
    for _ in 0..BENCH_WARMUP_RUNS {
        std::hint::black_box(run());
    }
    let samples = (0..repetitions)
        .map(|_| {
            let start = Instant::now();
            std::hint::black_box(run());
            start.elapsed()
        })
        .collect();
    median(samples).max(Duration::from_nanos(1))
}

/// Runs both NMS variants on one image's detections, single-threaded.
///
/// Timing is the median of at least [`BENCH_MIN_REPETITIONS`] runs after
/// [`BENCH_WARMUP_RUNS`] warm-ups; smaller `repetitions` are raised to that
/// floor. The IoU discrepancy is averaged over every pair the exact pass
/// evaluated.
pub fn nms_benchmark(
    dets: &[Detection],
    iou_threshold: f64,
    repetitions: usize,
) -> Result<NmsBenchmark, CodecError> {
    if dets.len() < 2 {
        return Err(CodecError::TooFewDetections(dets.len()));
    }
    let repetitions = repetitions.max(BENCH_MIN_REPETITIONS);

    let polys = exact_footprints(dets);
    let rects: Vec<Rect> = dets.iter().map(|d| aabb(&d.footprint)).collect();
    let mut pairs = Vec::new();
    let keep_exact = greedy_nms(dets, iou_threshold, |i, j| {
        let exact = exact_pair_iou(&polys[i], &polys[j]);
        pairs.push(IouPair {
            kept: i,
            candidate: j,
            exact,
            approx: aabb_iou(&rects[i], &rects[j]),
        });
        exact
    });
    let keep_approx = approx_keep(dets, iou_threshold);

    let exact_set: BTreeSet<usize> = keep_exact.iter().copied().collect();
    let approx_set: BTreeSet<usize> = keep_approx.iter().copied().collect();
    let disagreement = exact_set.symmetric_difference(&approx_set).count();
    let union = exact_set.union(&approx_set).count();

    let diffs = pairs.iter().map(|p| (p.exact - p.approx).abs());
    let (sum, max) = diffs.fold((0.0, 0.0f64), |(s, m), d| (s + d, m.max(d)));
    let mean = if pairs.is_empty() {
        0.0
    } else {
        sum / pairs.len() as f64
    };

    let exact_time = time_runs(repetitions, || exact_keep(dets, iou_threshold).len());
    let approx_time = time_runs(repetitions, || approx_keep(dets, iou_threshold).len());

    let report = NmsReport {
        detections: dets.len(),
        iou_threshold,
        repetitions,
        kept_exact: keep_exact.len(),
        kept_approx: keep_approx.len(),
        kept_disagreement: disagreement,
        kept_disagreement_rate: if union == 0 {
            0.0
        } else {
            disagreement as f64 / union as f64
        },
        pairs_examined: pairs.len(),
        mean_abs_iou_discrepancy: mean,
        max_abs_iou_discrepancy: max,
        exact_time: exact_time.as_secs_f64(),
        approx_time: approx_time.as_secs_f64(),
        speedup: exact_time.as_secs_f64() / approx_time.as_secs_f64(),
    };
    Ok(NmsBenchmark { report, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::build_anchor_grid;
    use crate::geometry::{exact_iou, reconstruct_parallelogram};

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn rect_det(x0: f64, y0: f64, x1: f64, y1: f64, conf: f64) -> Detection {
        Detection {
            footprint: Parallelogram::from_vertices([p(x0, y0), p(x1, y0), p(x1, y1), p(x0, y1)])
                .unwrap(),
            class_id: 0,
            confidence: conf,
        }
    }

    fn diamond_det(cx: f64, cy: f64, r: f64, conf: f64) -> Detection {
        let c = p(cx, cy);
        Detection {
            footprint: reconstruct_parallelogram(&Triangle25::new(
                c,
                c + p(0.0, -r),
                c + p(r, 0.0),
            ))
            .unwrap(),
            class_id: 0,
            confidence: conf,
        }
    }

    #[test]
    fn decode_vector_addition() {
        let grid = build_anchor_grid(8.0, 8.0, 8.0).unwrap();
        let raw = RawPrediction {
            anchor_index: 0,
            offsets: OffsetTriple {
                v1: p(0.0, 0.0),
                v2: p(-2.0, -1.0),
                v3: p(2.0, -1.0),
            },
            class_scores: vec![0.9],
        };
        let tri = decode(&raw, &grid).unwrap();
        assert_eq!(tri, Triangle25::new(p(4.0, 4.0), p(2.0, 3.0), p(6.0, 3.0)));
    }

    #[test]
    fn decode_zero_offsets_is_degenerate() {
        let grid = build_anchor_grid(16.0, 8.0, 8.0).unwrap();
        let raw = RawPrediction {
            anchor_index: 1,
            offsets: OffsetTriple::default(),
            class_scores: vec![1.0],
        };
        let tri = decode(&raw, &grid).unwrap();
        assert!(tri.is_degenerate());
        assert_eq!(tri.p0, p(12.0, 4.0));
        let batch = decode_predictions(&[raw], &grid, 0.1).unwrap();
        assert_eq!(batch.dropped_degenerate, 1);
        assert!(batch.detections.is_empty());
    }

    #[test]
    fn decode_out_of_grid() {
        let grid = build_anchor_grid(8.0, 8.0, 8.0).unwrap();
        let raw = RawPrediction {
            anchor_index: 1,
            offsets: OffsetTriple::default(),
            class_scores: vec![1.0],
        };
        assert_eq!(
            decode(&raw, &grid),
            Err(CodecError::IndexOutOfGrid { index: 1, len: 1 })
        );
    }

    #[test]
    fn encode_decode_round_trip() {
        let tri = Triangle25::new(p(13.25, -4.5), p(1.0, 2.0), p(30.0, 7.5));
        let a = p(12.0, 4.0);
        let back = decode_offsets(&encode(&tri, a), a);
        for (u, v) in back.vertices().iter().zip(tri.vertices()) {
            assert!(u.distance(v) < 1e-12);
        }
        assert_eq!(encode(&tri, tri.p0).v1, Point2::ORIGIN);
    }

    #[test]
    fn malformed_scores_rejected() {
        let mut raw = RawPrediction {
            anchor_index: 0,
            offsets: OffsetTriple::default(),
            class_scores: vec![],
        };
        assert_eq!(raw.validate(), Err(CodecError::EmptyScores));
        raw.class_scores = vec![0.3, 1.5];
        assert_eq!(raw.validate(), Err(CodecError::ScoreOutOfRange(1.5)));
        raw.class_scores = vec![0.3, 0.7, 0.7];
        assert_eq!(raw.best_class(), Some((1, 0.7)));
    }

    #[test]
    fn confidence_filter_is_closed() {
        let dets: Vec<Detection> = [0.05, 0.1, 0.9]
            .iter()
            .map(|&c| rect_det(0.0, 0.0, 1.0, 1.0, c))
            .collect();
        let kept = filter_confidence(dets.clone(), 0.1);
        let confs: Vec<f64> = kept.iter().map(|d| d.confidence).collect();
        assert_eq!(confs, vec![0.1, 0.9]);
        assert_eq!(filter_confidence(dets.clone(), 0.0).len(), 3);
        let mut with_one = dets;
        with_one.push(rect_det(0.0, 0.0, 1.0, 1.0, 1.0));
        let top = filter_confidence(with_one, 1.0);
        assert_eq!(top.len(), 1);
        assert_eq!(top[0].confidence, 1.0);
    }

    #[test]
    fn nms_identical_keeps_highest() {
        let dets = vec![
            rect_det(0.0, 0.0, 4.0, 2.0, 0.8),
            rect_det(0.0, 0.0, 4.0, 2.0, 0.9),
        ];
        for out in [approx_nms(&dets, 0.5), exact_nms(&dets, 0.5)] {
            assert_eq!(out.len(), 1);
            assert_eq!(out[0].confidence, 0.9);
        }
    }

    #[test]
    fn nms_disjoint_keeps_both() {
        let dets = vec![
            rect_det(0.0, 0.0, 1.0, 1.0, 0.3),
            rect_det(5.0, 5.0, 6.0, 6.0, 0.7),
        ];
        let out = approx_nms(&dets, 0.5);
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].confidence, 0.7);
        assert_eq!(exact_nms(&dets, 0.5).len(), 2);
    }

    #[test]
    fn nms_is_class_aware() {
        let mut other = rect_det(0.0, 0.0, 4.0, 2.0, 0.8);
        other.class_id = 1;
        let dets = vec![rect_det(0.0, 0.0, 4.0, 2.0, 0.9), other];
        assert_eq!(approx_nms(&dets, 0.5).len(), 2);
        assert_eq!(exact_nms(&dets, 0.5).len(), 2);
    }

    #[test]
    fn rotated_overlap_separates_the_two_metrics() {
        // Two diamonds offset along x: their rectangles overlap far more than
        // the footprints do.
        let a = diamond_det(0.0, 0.0, 10.0, 0.9);
        let b = diamond_det(6.0, 0.0, 10.0, 0.8);
        let exact = exact_iou(&a.footprint, &b.footprint);
        let approx = aabb_iou(&aabb(&a.footprint), &aabb(&b.footprint));
        assert!(approx > 0.5 && exact < 0.5, "approx {approx} exact {exact}");
        let dets = vec![a, b];
        assert_eq!(approx_nms(&dets, 0.5).len(), 1);
        assert_eq!(exact_nms(&dets, 0.5).len(), 2);
        let bench = nms_benchmark(&dets, 0.5, 1).unwrap();
        assert_eq!(bench.report.kept_disagreement, 1);
        assert_eq!(bench.report.pairs_examined, 1);
        assert!((bench.report.mean_abs_iou_discrepancy - (approx - exact)).abs() < 1e-12);
        assert_eq!(bench.report.repetitions, BENCH_MIN_REPETITIONS);
    }

    #[test]
    fn benchmark_axis_aligned_has_no_discrepancy() {
        let dets: Vec<Detection> = (0..30)
            .map(|i| {
                let x = (i % 6) as f64 * 3.0;
                let y = (i / 6) as f64 * 2.5;
                rect_det(x, y, x + 4.0, y + 3.0, 0.1 + 0.02 * i as f64)
            })
            .collect();
        let bench = nms_benchmark(&dets, 0.3, 11).unwrap();
        assert!(bench.report.max_abs_iou_discrepancy < 1e-12);
        assert_eq!(bench.report.kept_disagreement, 0);
        assert!(bench.report.exact_time > 0.0 && bench.report.approx_time > 0.0);
    }

    #[test]
    fn benchmark_needs_two_detections() {
        let dets = vec![rect_det(0.0, 0.0, 1.0, 1.0, 0.5)];
        assert_eq!(
            nms_benchmark(&dets, 0.5, 11),
            Err(CodecError::TooFewDetections(1))
        );
    }
}
