//! Anchor-free, one-to-many label assignment.
//!
//! Every feature-map cell contributes one anchor at its center. An anchor is
//! responsible for a ground-truth triangle when it lies inside it or within
//! the tolerance `η` of its boundary; the triangle covers only part of the
//! footprint, so anchors just outside it still see the vehicle. One ground
//! truth supervises many anchors, while an anchor claimed by several ground
//! truths goes to the nearest one (lowest index on ties).
//!
//! `η` is measured in input-image pixels. To express it in feature-map
//! cells, divide by the grid stride.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{encode, OffsetTriple};
use crate::geometry::{distance_to_triangle, Point2, Triangle25};

/// Default tolerance as a multiple of the stride.
pub const DEFAULT_ETA_STRIDES: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssignmentError {
    #[error("invalid grid configuration: {0}")]
    InvalidConfig(String),
    #[error("tolerance must be finite and non-negative, got {0}")]
    InvalidTolerance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchorGrid {
    pub width: usize,
    pub height: usize,
    /// Pixels per cell.
    pub stride: f64,
    /// Offset of the anchor inside its cell, in pixels.
    pub origin_offset: f64,
}

/// One anchor per cell, at `((i + 0.5)·stride, (j + 0.5)·stride)`. Images
/// that are not a multiple of the stride get a partial last row/column.
pub fn build_anchor_grid(
    image_w: f64,
    image_h: f64,
    stride: f64,
) -> Result<AnchorGrid, AssignmentError> {
    let valid = |v: f64| v.is_finite() && v > 0.0;
    if !valid(image_w) || !valid(image_h) || !valid(stride) {
        return Err(AssignmentError::InvalidConfig(format!(
            "image {image_w}x{image_h} px with stride {stride} px"
        )));
    }
    Ok(AnchorGrid {
        width: (image_w / stride).ceil() as usize,
        height: (image_h / stride).ceil() as usize,
        stride,
        origin_offset: 0.5 * stride,
    })
}

impl AnchorGrid {
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major: index = row · width + column.
    pub fn anchor(&self, index: usize) -> Option<Point2> {
        if index >= self.len() {
            return None;
        }
        Some(self.anchor_at(index % self.width, index / self.width))
    }

    fn anchor_at(&self, col: usize, row: usize) -> Point2 {
        Point2::new(
            col as f64 * self.stride + self.origin_offset,
            row as f64 * self.stride + self.origin_offset,
        )
    }

    pub fn anchors(&self) -> impl Iterator<Item = (usize, Point2)> + '_ {
        (0..self.len()).map(move |i| (i, self.anchor(i).unwrap()))
    }

    /// Inclusive column range whose anchors' x lies in `[lo, hi]`.
    fn cover(&self, lo: f64, hi: f64, cells: usize) -> Option<(usize, usize)> {
        let first = ((lo - self.origin_offset) / self.stride).ceil().max(0.0);
        let last = ((hi - self.origin_offset) / self.stride).floor();
        if last < 0.0 || first > last || first >= cells as f64 {
            return None;
        }
        Some((first as usize, (last as usize).min(cells - 1)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ToleranceEta(f64);

impl ToleranceEta {
    pub fn new(eta: f64) -> Result<Self, AssignmentError> {
        if eta.is_finite() && eta >= 0.0 {
            Ok(Self(eta))
        } else {
            Err(AssignmentError::InvalidTolerance(eta))
        }
    }

    pub fn for_stride(stride: f64) -> Self {
        Self(DEFAULT_ETA_STRIDES * stride)
    }

    pub fn pixels(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub anchor_index: usize,
    pub gt_index: usize,
}

/// Assigns anchors to ground-truth triangles. Degenerate triangles cannot
/// supervise anything and are skipped. The result is sorted by
/// `(gt_index, anchor_index)`.
pub fn assign_anchors(grid: &AnchorGrid, gts: &[Triangle25], tol: ToleranceEta) -> Vec<Assignment> {
    let eta = tol.pixels();
    // best (distance, gt) per anchor
    let mut best: Vec<Option<(f64, usize)>> = vec![None; grid.len()];
    for (g, tri) in gts.iter().enumerate() {
        if tri.is_degenerate() || !tri.is_finite() {
            continue;
        }
        let [a, b, c] = tri.vertices();
        let (xs, ys) = ([a.x, b.x, c.x], [a.y, b.y, c.y]);
        let fold =
            |v: [f64; 3], f: fn(f64, f64) -> f64| v[1..].iter().fold(v[0], |acc, &x| f(acc, x));
        let cols = grid.cover(
            fold(xs, f64::min) - eta,
            fold(xs, f64::max) + eta,
            grid.width,
        );
        let rows = grid.cover(
            fold(ys, f64::min) - eta,
            fold(ys, f64::max) + eta,
            grid.height,
        );
        let (Some((c0, c1)), Some((r0, r1))) = (cols, rows) else {
            continue;
        };
        for row in r0..=r1 {
            for col in c0..=c1 {
                let d = distance_to_triangle(grid.anchor_at(col, row), tri);
                if d > eta {
                    continue;
                }
                let slot = &mut best[row * grid.width + col];
                // gts are visited in index order, so strict < keeps the lower index on ties
                if slot.is_none_or(|(bd, _)| d < bd) {
                    *slot = Some((d, g));
                }
            }
        }
    }
    let mut out: Vec<Assignment> = best
        .iter()
        .enumerate()
        .filter_map(|(anchor_index, b)| {
            b.map(|(_, gt_index)| Assignment {
                anchor_index,
                gt_index,
            })
        })
        .collect();
    out.sort_by_key(|a| (a.gt_index, a.anchor_index));
    out
}

/// Runs [`assign_anchors`] independently on several feature levels.
pub fn assign_multi_level(
    levels: &[(AnchorGrid, ToleranceEta)],
    gts: &[Triangle25],
) -> Vec<Vec<Assignment>> {
    levels
        .iter()
        .map(|(grid, tol)| assign_anchors(grid, gts, *tol))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingTarget {
    pub anchor_index: usize,
    pub gt_index: usize,
    pub offsets: OffsetTriple,
}

/// Regression targets for assigned anchors. Anchors without an assignment get
/// no target and act as classification negatives.
pub fn build_training_targets(
    assignments: &[Assignment],
    grid: &AnchorGrid,
    gts: &[Triangle25],
) -> Vec<TrainingTarget> {
    assignments
        .iter()
        .map(|a| {
            let anchor = grid.anchor(a.anchor_index).expect("assignment within grid");
            TrainingTarget {
                anchor_index: a.anchor_index,
                gt_index: a.gt_index,
                offsets: encode(&gts[a.gt_index], anchor),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::decode_offsets;
    use crate::geometry::point_in_triangle;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn grid_examples() {
        let g = build_anchor_grid(8.0, 8.0, 8.0).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.anchor(0), Some(p(4.0, 4.0)));
        let g = build_anchor_grid(16.0, 8.0, 8.0).unwrap();
        let anchors: Vec<Point2> = g.anchors().map(|(_, a)| a).collect();
        assert_eq!(anchors, vec![p(4.0, 4.0), p(12.0, 4.0)]);
        let g = build_anchor_grid(20.0, 9.0, 8.0).unwrap();
        assert_eq!((g.width, g.height), (3, 2));
    }

    #[test]
    fn grid_rejects_bad_config() {
        assert!(build_anchor_grid(0.0, 8.0, 8.0).is_err());
        assert!(build_anchor_grid(8.0, 8.0, -1.0).is_err());
        assert!(build_anchor_grid(8.0, f64::NAN, 8.0).is_err());
    }

    #[test]
    fn tolerance_validation() {
        assert!(ToleranceEta::new(-0.1).is_err());
        assert!(ToleranceEta::new(f64::INFINITY).is_err());
        assert_eq!(ToleranceEta::for_stride(8.0).pixels(), 12.0);
    }

    #[test]
    fn inside_anchor_assigned_with_zero_eta() {
        let grid = build_anchor_grid(8.0, 8.0, 8.0).unwrap();
        let tri = Triangle25::new(p(0.0, 0.0), p(8.0, 0.0), p(0.0, 8.0));
        let a = assign_anchors(&grid, &[tri], ToleranceEta::new(0.0).unwrap());
        assert_eq!(
            a,
            vec![Assignment {
                anchor_index: 0,
                gt_index: 0
            }]
        );
    }

    #[test]
    fn eta_threshold_is_closed() {
        // anchor (4,4) lies exactly 5 px left of the triangle's vertical edge x = 9
        let grid = build_anchor_grid(8.0, 8.0, 8.0).unwrap();
        let tri = Triangle25::new(p(9.0, 0.0), p(9.0, 8.0), p(20.0, 4.0));
        assert_eq!(distance_to_triangle(p(4.0, 4.0), &tri), 5.0);
        assert!(assign_anchors(&grid, &[tri], ToleranceEta::new(0.0).unwrap()).is_empty());
        assert!(assign_anchors(&grid, &[tri], ToleranceEta::new(4.999).unwrap()).is_empty());
        assert_eq!(
            assign_anchors(&grid, &[tri], ToleranceEta::new(5.0).unwrap()).len(),
            1
        );
    }

    #[test]
    fn overlapping_gts_resolve_to_nearest_then_lowest_index() {
        let grid = build_anchor_grid(24.0, 8.0, 8.0).unwrap();
        // anchors at x = 4, 12, 20 (y = 4)
        let left = Triangle25::new(p(0.0, 0.0), p(14.0, 4.0), p(0.0, 8.0));
        let right = Triangle25::new(p(24.0, 0.0), p(10.0, 4.0), p(24.0, 8.0));
        // anchor 1 (12,4) is inside both; anchor 0 inside left only; anchor 2
        // inside right only.
        let got = assign_anchors(&grid, &[left, right], ToleranceEta::new(0.0).unwrap());
        assert_eq!(
            got,
            vec![
                Assignment {
                    anchor_index: 0,
                    gt_index: 0
                },
                Assignment {
                    anchor_index: 1,
                    gt_index: 0
                },
                Assignment {
                    anchor_index: 2,
                    gt_index: 1
                },
            ]
        );
        // with tolerance, the nearer triangle wins over the lower index
        let far = Triangle25::new(p(0.0, 0.0), p(8.0, 4.0), p(0.0, 8.0));
        let near = Triangle25::new(p(24.0, 0.0), p(11.0, 4.0), p(24.0, 8.0));
        // anchor 1 (12,4): 4 px from `far`'s tip (8,4), inside `near`.
        let got = assign_anchors(&grid, &[far, near], ToleranceEta::new(6.0).unwrap());
        assert!(got.contains(&Assignment {
            anchor_index: 1,
            gt_index: 1
        }));
        assert!(!got.contains(&Assignment {
            anchor_index: 1,
            gt_index: 0
        }));
    }

    #[test]
    fn degenerate_gts_are_skipped() {
        let grid = build_anchor_grid(16.0, 16.0, 8.0).unwrap();
        let flat = Triangle25::new(p(4.0, 4.0), p(4.0, 4.0), p(4.0, 4.0));
        assert!(assign_anchors(&grid, &[flat], ToleranceEta::new(100.0).unwrap()).is_empty());
        assert!(assign_anchors(&grid, &[], ToleranceEta::new(1.0).unwrap()).is_empty());
    }

    #[test]
    fn zero_eta_matches_point_in_triangle() {
        let grid = build_anchor_grid(64.0, 64.0, 4.0).unwrap();
        let tri = Triangle25::new(p(30.0, 30.0), p(6.0, 50.0), p(58.0, 41.0));
        let got: Vec<usize> = assign_anchors(&grid, &[tri], ToleranceEta::new(0.0).unwrap())
            .iter()
            .map(|a| a.anchor_index)
            .collect();
        let brute: Vec<usize> = grid
            .anchors()
            .filter(|(_, a)| point_in_triangle(*a, &tri))
            .map(|(i, _)| i)
            .collect();
        assert_eq!(got, brute);
    }

    #[test]
    fn training_targets_round_trip() {
        let grid = build_anchor_grid(64.0, 64.0, 8.0).unwrap();
        let gts = [Triangle25::new(p(30.0, 30.0), p(6.0, 50.0), p(58.0, 41.0))];
        let asg = assign_anchors(&grid, &gts, ToleranceEta::for_stride(8.0));
        let targets = build_training_targets(&asg, &grid, &gts);
        assert_eq!(targets.len(), asg.len());
        for t in &targets {
            let tri = decode_offsets(&t.offsets, grid.anchor(t.anchor_index).unwrap());
            for (u, v) in tri.vertices().iter().zip(gts[0].vertices()) {
                assert!(u.distance(v) < 1e-9);
            }
        }
    }

    #[test]
    fn multi_level_is_independent_per_level() {
        let gts = [Triangle25::new(p(30.0, 30.0), p(6.0, 50.0), p(58.0, 41.0))];
        let fine = build_anchor_grid(64.0, 64.0, 8.0).unwrap();
        let coarse = build_anchor_grid(64.0, 64.0, 16.0).unwrap();
        let levels = [
            (fine, ToleranceEta::for_stride(8.0)),
            (coarse, ToleranceEta::for_stride(16.0)),
        ];
        let out = assign_multi_level(&levels, &gts);
        assert_eq!(out[0], assign_anchors(&fine, &gts, levels[0].1));
        assert_eq!(out[1], assign_anchors(&coarse, &gts, levels[1].1));
    }
}
