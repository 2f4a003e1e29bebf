//! Ground-plane ("2.5D") vehicle detection mathematics for roadside cameras.
//!
//! A vehicle's footprint on the road appears in the image as a parallelogram.
//! Detectors regress it as a triangle: the center `p0` and two adjacent
//! front corners `p1`, `p2`, from which the remaining corners follow by
//! reflection through the center.
//!
//! - [`geometry`]: points, triangles, parallelograms, polygon clipping, IoU.
//! - [`loss`]: center squared error plus Chamfer distance on the front
//!   corners, with analytic gradients.
//! - [`assignment`]: anchor grid and tolerance-based one-to-many assignment.
//! - [`codec`]: offset decoding, confidence filtering, exact and
//!   rectangle-approximated NMS, NMS benchmark.
//! - [`metrics`]: matching, precision/recall, mAP@50, AIoU, mAOE.
//! - [`datagen`]: synthetic 3D scenes, camera projection, label fitting.
//! - [`toytrain`]: per-anchor gradient descent and gradient checking.

pub mod assignment;
pub mod codec;
pub mod datagen;
pub mod geometry;
pub mod loss;
pub mod metrics;
pub mod toytrain;

pub use assignment::{build_anchor_grid, AnchorGrid, Assignment, ToleranceEta};
pub use codec::{Detection, OffsetTriple, RawPrediction};
pub use geometry::{ConvexPolygon, Parallelogram, Point2, Rect, Triangle25};
pub use loss::{LossVariant, RegressionLossValue};
pub use metrics::{EvalReport, GroundTruthLabel};
