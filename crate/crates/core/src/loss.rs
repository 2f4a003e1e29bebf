//! Regression loss for triangle-parameterized footprints.
//!
//! The center is compared with a squared Euclidean distance; the two front
//! vertices are compared as an unordered set with the Chamfer distance, so a
//! prediction that lists the front vertices in the opposite order from its
//! label is not penalized. The total is the unweighted sum of both terms.
//!
//! All squared distances are plain sums over the two coordinates (no ½ and
//! no per-coordinate averaging), in absolute pixel units.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point2, Triangle25};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LossError {
    #[error("chamfer distance needs two non-empty point sets")]
    EmptySet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionLossValue {
    pub total: f64,
    pub center_mse: f64,
    pub chamfer: f64,
}

/// Gradient of a loss with respect to the six predicted coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossGradient {
    pub d_p0: Point2,
    pub d_p1: Point2,
    pub d_p2: Point2,
}

impl LossGradient {
    pub fn to_array(&self) -> [f64; 6] {
        [
            self.d_p0.x,
            self.d_p0.y,
            self.d_p1.x,
            self.d_p1.y,
            self.d_p2.x,
            self.d_p2.y,
        ]
    }

    pub fn scaled(&self, s: f64) -> LossGradient {
        LossGradient {
            d_p0: self.d_p0 * s,
            d_p1: self.d_p1 * s,
            d_p2: self.d_p2 * s,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.d_p0.is_finite() && self.d_p1.is_finite() && self.d_p2.is_finite()
    }
}

/// Flattens a triangle to `[p0.x, p0.y, p1.x, p1.y, p2.x, p2.y]`.
pub fn triangle_to_params(t: &Triangle25) -> [f64; 6] {
    [t.p0.x, t.p0.y, t.p1.x, t.p1.y, t.p2.x, t.p2.y]
}

pub fn triangle_from_params(v: &[f64; 6]) -> Triangle25 {
    Triangle25::new(
        Point2::new(v[0], v[1]),
        Point2::new(v[2], v[3]),
        Point2::new(v[4], v[5]),
    )
}

/// Symmetric Chamfer distance: mean squared nearest-neighbor distance from
/// `p` to `q` plus the same from `q` to `p`.
pub fn chamfer_distance(p: &[Point2], q: &[Point2]) -> Result<f64, LossError> {
    if p.is_empty() || q.is_empty() {
        return Err(LossError::EmptySet);
    }
    Ok(directed_term(p, q) + directed_term(q, p))
}

fn directed_term(from: &[Point2], to: &[Point2]) -> f64 {
    let sum: f64 = from
        .iter()
        .map(|a| {
            to.iter()
                .map(|b| a.distance_sq(*b))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    sum / from.len() as f64
}

pub fn center_mse(p0: Point2, gt_p0: Point2) -> f64 {
    p0.distance_sq(gt_p0)
}

pub fn regression_loss(pred: &Triangle25, gt: &Triangle25) -> RegressionLossValue {
    let center = center_mse(pred.p0, gt.p0);
    let chamfer = chamfer_distance(&[pred.p1, pred.p2], &[gt.p1, gt.p2])
        .expect("front-vertex sets always hold two points");
    RegressionLossValue {
        total: center + chamfer,
        center_mse: center,
        chamfer,
    }
}

/// Fixed-order squared error over all three points. This is the baseline
/// that penalizes a prediction whose front vertices are listed in the
/// opposite order from the label.
pub fn ordered_mse_loss(pred: &Triangle25, gt: &Triangle25) -> f64 {
    pred.p0.distance_sq(gt.p0) + pred.p1.distance_sq(gt.p1) + pred.p2.distance_sq(gt.p2)
}

pub fn ordered_mse_grad(pred: &Triangle25, gt: &Triangle25) -> LossGradient {
    LossGradient {
        d_p0: (pred.p0 - gt.p0) * 2.0,
        d_p1: (pred.p1 - gt.p1) * 2.0,
        d_p2: (pred.p2 - gt.p2) * 2.0,
    }
}

/// Whether the identity pairing `(p1↔q1, p2↔q2)` is at least as cheap as the
/// swapped one. Used to break nearest-neighbor ties.
fn identity_pairing_preferred(p: [Point2; 2], q: [Point2; 2]) -> bool {
    let identity = p[0].distance_sq(q[0]) + p[1].distance_sq(q[1]);
    let swapped = p[0].distance_sq(q[1]) + p[1].distance_sq(q[0]);
    identity <= swapped
}

/// Relative tolerance on squared distances under which two nearest-neighbor
/// candidates count as tied.
///
/// Gradient descent approaches a Chamfer kink geometrically from one side and
/// never lands on an exact tie, so without a tolerance the tie-break below
/// would never fire and a vertex pulled by both labels would stall on the
/// bisector.
pub const TIE_RTOL: f64 = 1e-9;

/// Index into `to` of the nearest point to `from[i]`; ties follow the
/// preferred bijective pairing, which itself falls back to index order.
fn nearest_index(a: Point2, to: [Point2; 2], i: usize, identity: bool) -> usize {
    let d0 = a.distance_sq(to[0]);
    let d1 = a.distance_sq(to[1]);
    if (d0 - d1).abs() > TIE_RTOL * (d0 + d1) {
        usize::from(d1 < d0)
    } else if identity {
        i
    } else {
        1 - i
    }
}

/// Subgradient of the Chamfer term on a pair of point pairs, with respect
/// to the predicted points.
pub fn chamfer_pair_grad(p: [Point2; 2], q: [Point2; 2]) -> [Point2; 2] {
    let identity = identity_pairing_preferred(p, q);
    // Each directed term carries a 1/2 from averaging, which cancels the 2
    // from differentiating the square.
    let forward: [Point2; 2] =
        std::array::from_fn(|i| p[i] - q[nearest_index(p[i], q, i, identity)]);
    let mut backward = [[Point2::ORIGIN; 2]; 2];
    for j in 0..2 {
        let i = nearest_index(q[j], p, j, identity);
        backward[i][j] = p[i] - q[j];
    }
    // (b0 + b1) is grouped so swapping q leaves the sum bit-identical.
    std::array::from_fn(|i| forward[i] + (backward[i][0] + backward[i][1]))
}

pub fn regression_loss_grad(pred: &Triangle25, gt: &Triangle25) -> LossGradient {
    let [d_p1, d_p2] = chamfer_pair_grad([pred.p1, pred.p2], [gt.p1, gt.p2]);
    LossGradient {
        d_p0: (pred.p0 - gt.p0) * 2.0,
        d_p1,
        d_p2,
    }
}

/// Smallest gap between the two candidate nearest-neighbor distances over all
/// four directed lookups. Near zero, the Chamfer term is at a kink and finite
/// differences straddle two quadratic pieces.
pub fn nearest_neighbor_margin(pred: &Triangle25, gt: &Triangle25) -> f64 {
    let p = [pred.p1, pred.p2];
    let q = [gt.p1, gt.p2];
    let gap = |a: Point2, to: [Point2; 2]| (a.distance(to[0]) - a.distance(to[1])).abs();
    gap(p[0], q)
        .min(gap(p[1], q))
        .min(gap(q[0], p))
        .min(gap(q[1], p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossVariant {
    /// Center squared error plus Chamfer distance on the front vertices.
    ChamferMse,
    /// Fixed-order squared error on all three points.
    OrderedMse,
}

impl LossVariant {
    pub fn value(self, pred: &Triangle25, gt: &Triangle25) -> f64 {
        match self {
            LossVariant::ChamferMse => regression_loss(pred, gt).total,
            LossVariant::OrderedMse => ordered_mse_loss(pred, gt),
        }
    }

    pub fn gradient(self, pred: &Triangle25, gt: &Triangle25) -> LossGradient {
        match self {
            LossVariant::ChamferMse => regression_loss_grad(pred, gt),
            LossVariant::OrderedMse => ordered_mse_grad(pred, gt),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LossVariant::ChamferMse => "chamfer_mse",
            LossVariant::OrderedMse => "ordered_mse",
        }
    }
}
