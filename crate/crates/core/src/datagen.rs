//! Synthetic roadside scenes and their ground-plane labels.
//!
//! Vehicles are flat-bottomed boxes standing on the ground plane (z up, zero
//! pitch and roll). A label is made by projecting the four bottom corners
//! into the image. Under an affine camera a rectangle projects to an exact
//! parallelogram; under a pinhole camera it becomes a general quadrilateral,
//! and the least-squares parallelogram is fitted with its residual reported.

use nalgebra::{Matrix3, Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::Detection;
use crate::geometry::{
    convex_intersection, triangle_from_parallelogram, Parallelogram, Point2, Triangle25, EPS_AREA,
};
use crate::metrics::GroundTruthLabel;

/// Minimum camera-frame depth for pinhole projection (m).
pub const MIN_DEPTH: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatagenError {
    #[error("point behind the camera (depth {depth} m)")]
    BehindCamera { depth: f64 },
    #[error("L-shape corners are collinear")]
    CollinearCorners,
    #[error("placed only {placed} of {requested} vehicles without overlap")]
    PlacementFailure { placed: usize, requested: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box3D {
    /// Bottom-face center; `z` is the ground elevation (m).
    pub center: [f64; 3],
    pub length: f64,
    pub width: f64,
    /// Heading around +z (rad); the length axis points along the heading.
    pub yaw: f64,
}

impl Box3D {
    /// Bottom corners, counter-clockwise seen from above, starting with the
    /// two front corners.
    pub fn bottom_face(&self) -> [Vector3<f64>; 4] {
        let (s, c) = self.yaw.sin_cos();
        let [cx, cy, cz] = self.center;
        let (hl, hw) = (0.5 * self.length, 0.5 * self.width);
        [(hl, -hw), (hl, hw), (-hl, hw), (-hl, -hw)]
            .map(|(u, v)| Vector3::new(cx + c * u - s * v, cy + s * u + c * v, cz))
    }

    /// Bottom face as a parallelogram in world x/y (m).
    pub fn ground_footprint(&self) -> Parallelogram {
        let [a, b, c, d] = self.bottom_face().map(|v| Point2::new(v.x, v.y));
        Parallelogram::from_parts([a, b, c, d], a.midpoint(c))
            .expect("rectangle is a parallelogram")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Projection {
    /// Camera-frame `(x, y)` scaled by a fixed factor (px/m); depth ignored.
    Affine { scale: f64 },
    /// Perspective division with focal lengths in pixels.
    Pinhole { fx: f64, fy: f64 },
}

/// World→camera extrinsics plus intrinsics. Camera frame: x right, y down,
/// z along the optical axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    pub projection: Projection,
    pub rotation: Rotation3<f64>,
    pub translation: Vector3<f64>,
    pub principal_point: Point2,
}

impl CameraModel {
    pub fn identity_affine(scale: f64, principal_point: Point2) -> Self {
        Self {
            projection: Projection::Affine { scale },
            rotation: Rotation3::identity(),
            translation: Vector3::zeros(),
            principal_point,
        }
    }

    /// Camera at `eye` looking at `target`, world z up.
    pub fn look_at(
        eye: Vector3<f64>,
        target: Vector3<f64>,
        projection: Projection,
        principal_point: Point2,
    ) -> Result<Self, DatagenError> {
        let forward = (target - eye)
            .try_normalize(1e-12)
            .ok_or_else(|| DatagenError::InvalidConfig("camera eye equals target".into()))?;
        let right = forward
            .cross(&Vector3::z())
            .try_normalize(1e-12)
            .ok_or_else(|| {
                DatagenError::InvalidConfig("camera looks straight up or down".into())
            })?;
        let down = forward.cross(&right);
        let m = Matrix3::from_rows(&[right.transpose(), down.transpose(), forward.transpose()]);
        let rotation = Rotation3::from_matrix_unchecked(m);
        Ok(Self {
            projection,
            rotation,
            translation: -(rotation * eye),
            principal_point,
        })
    }

    pub fn from_config(cfg: &CameraConfig) -> Result<Self, DatagenError> {
        cfg.validate()?;
        let pitch = cfg.pitch_deg.to_radians();
        let ground_range = cfg.height_m / pitch.tan();
        let eye = Vector3::new(0.0, -ground_range, cfg.height_m);
        let target = Vector3::zeros();
        let projection = match cfg.mode {
            CameraMode::Affine => Projection::Affine {
                scale: cfg.focal_px / (target - eye).norm(),
            },
            CameraMode::Pinhole => Projection::Pinhole {
                fx: cfg.focal_px,
                fy: cfg.focal_px,
            },
        };
        Self::look_at(eye, target, projection, Point2::from(cfg.principal_point))
    }

    pub fn to_camera_frame(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn project_point(&self, p: &Vector3<f64>) -> Result<Point2, DatagenError> {
        let c = self.to_camera_frame(p);
        let pp = self.principal_point;
        match self.projection {
            Projection::Affine { scale } => Ok(Point2::new(scale * c.x + pp.x, scale * c.y + pp.y)),
            Projection::Pinhole { fx, fy } => {
                if c.z <= MIN_DEPTH {
                    return Err(DatagenError::BehindCamera { depth: c.z });
                }
                Ok(Point2::new(fx * c.x / c.z + pp.x, fy * c.y / c.z + pp.y))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CameraMode {
    Affine,
    Pinhole,
}

/// Elevated roadside camera looking down at the world origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraConfig {
    pub mode: CameraMode,
    pub height_m: f64,
    /// Downward tilt below the horizon.
    pub pitch_deg: f64,
    pub focal_px: f64,
    pub principal_point: [f64; 2],
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self {
            mode: CameraMode::Affine,
            height_m: 10.0,
            pitch_deg: 45.0,
            focal_px: 800.0,
            principal_point: [960.0, 540.0],
        }
    }
}

impl CameraConfig {
    pub fn validate(&self) -> Result<(), DatagenError> {
        if !(self.height_m > 0.0 && self.height_m.is_finite()) {
            return Err(DatagenError::InvalidConfig(
                "camera height must be positive".into(),
            ));
        }
        if !(self.pitch_deg > 0.0 && self.pitch_deg < 90.0) {
            return Err(DatagenError::InvalidConfig(
                "camera pitch must be in (0, 90) degrees".into(),
            ));
        }
        if !(self.focal_px > 0.0 && self.focal_px.is_finite()) {
            return Err(DatagenError::InvalidConfig(
                "focal length must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Least-squares parallelogram through four ordered points.
///
/// The center is the centroid and the half-diagonals are `(q1 − q3)/2` and
/// `(q2 − q4)/2`, which minimizes the summed squared vertex distance for the
/// given vertex correspondence. Returns the fit and the largest vertex
/// displacement (px).
pub fn fit_parallelogram(quad: &[Point2; 4]) -> (Parallelogram, f64) {
    let [q1, q2, q3, q4] = *quad;
    let center = Point2::new(
        0.25 * (q1.x + q2.x + q3.x + q4.x),
        0.25 * (q1.y + q2.y + q3.y + q4.y),
    );
    let d1 = (q1 - q3) * 0.5;
    let d2 = (q2 - q4) * 0.5;
    let fit = Parallelogram::reflect(&Triangle25::new(center, center + d1, center + d2));
    let residual = fit
        .vertices()
        .iter()
        .zip(quad)
        .map(|(a, b)| a.distance(*b))
        .fold(0.0, f64::max);
    (fit, residual)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelFit {
    pub footprint: Parallelogram,
    /// Projected bottom corners before fitting.
    pub quad: [Point2; 4],
    /// Largest corner displacement introduced by the fit (px).
    pub residual: f64,
    /// Zero-area footprint, e.g. a box seen edge-on.
    pub degenerate: bool,
}

pub fn box_to_label(b: &Box3D, cam: &CameraModel) -> Result<LabelFit, DatagenError> {
    let corners = b.bottom_face();
    let mut quad = [Point2::ORIGIN; 4];
    for (q, c) in quad.iter_mut().zip(corners.iter()) {
        *q = cam.project_point(c)?;
    }
    let (footprint, residual) = fit_parallelogram(&quad);
    Ok(LabelFit {
        footprint,
        quad,
        residual,
        degenerate: footprint.area() < EPS_AREA,
    })
}

/// Completes a parallelogram from three annotated corners, `pb` being the
/// corner shared by the two visible edges. The missing corner is
/// `pa + pc − pb`; vertex order is `(pa, pb, pc, pd)`.
pub fn complete_lshape(pa: Point2, pb: Point2, pc: Point2) -> Result<Parallelogram, DatagenError> {
    if Triangle25::new(pb, pa, pc).is_degenerate() {
        return Err(DatagenError::CollinearCorners);
    }
    let pd = pa + pc - pb;
    Parallelogram::from_parts([pa, pb, pc, pd], pa.midpoint(pc))
        .map_err(|_| DatagenError::CollinearCorners)
}

/// SplitMix64 step; used to derive independent per-scene seeds.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of scene `index` in a batch generated from `master`.
pub fn scene_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    pub vehicles_min: usize,
    pub vehicles_max: usize,
    pub length_m: [f64; 2],
    pub width_m: [f64; 2],
    pub region_x_m: [f64; 2],
    pub region_y_m: [f64; 2],
    pub yaw_deg: [f64; 2],
    /// Minimum free space kept around every vehicle (m).
    pub gap_m: f64,
    pub max_attempts: usize,
    pub class_id: u32,
    /// Std-dev of the Gaussian noise added to each predicted triangle point (px).
    pub jitter_px: f64,
    pub predictions_per_vehicle: usize,
    pub confidence: [f64; 2],
    pub seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            vehicles_min: 6,
            vehicles_max: 12,
            length_m: [3.5, 5.5],
            width_m: [1.6, 2.1],
            region_x_m: [-14.0, 14.0],
            region_y_m: [-8.0, 8.0],
            yaw_deg: [-180.0, 180.0],
            gap_m: 0.5,
            max_attempts: 10_000,
            class_id: 0,
            jitter_px: 2.0,
            predictions_per_vehicle: 1,
            confidence: [0.5, 1.0],
            seed: 0,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<(), DatagenError> {
        let range = |name: &str, r: [f64; 2], positive: bool| {
            if !(r[0].is_finite() && r[1].is_finite() && r[0] <= r[1]) || (positive && r[0] <= 0.0)
            {
                Err(DatagenError::InvalidConfig(format!(
                    "{name} must be an ordered{} range",
                    if positive { " positive" } else { "" }
                )))
            } else {
                Ok(())
            }
        };
        range("length_m", self.length_m, true)?;
        range("width_m", self.width_m, true)?;
        range("region_x_m", self.region_x_m, false)?;
        range("region_y_m", self.region_y_m, false)?;
        range("yaw_deg", self.yaw_deg, false)?;
        range("confidence", self.confidence, false)?;
        if self.vehicles_min > self.vehicles_max {
            return Err(DatagenError::InvalidConfig(
                "vehicles_min exceeds vehicles_max".into(),
            ));
        }
        if self.confidence[0] < 0.0 || self.confidence[1] > 1.0 {
            return Err(DatagenError::InvalidConfig(
                "confidence must lie in [0, 1]".into(),
            ));
        }
        if !(self.jitter_px >= 0.0 && self.jitter_px.is_finite())
            || self.gap_m.is_nan()
            || self.gap_m < 0.0
        {
            return Err(DatagenError::InvalidConfig(
                "jitter_px and gap_m must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub boxes: Vec<Box3D>,
    pub labels: Vec<LabelFit>,
    pub predictions: Vec<Detection>,
}

impl Scene {
    pub fn ground_truth(&self, class_id: u32) -> Vec<GroundTruthLabel> {
        self.labels
            .iter()
            .map(|l| GroundTruthLabel {
                footprint: l.footprint,
                class_id,
            })
            .collect()
    }
}

fn uniform(rng: &mut ChaCha8Rng, r: [f64; 2]) -> f64 {
    if r[0] == r[1] {
        r[0]
    } else {
        rng.random_range(r[0]..r[1])
    }
}

/// Places non-overlapping vehicles, projects them, and adds noisy predictions.
/// Deterministic for a given `(cfg, cam)`.
pub fn generate_scene(cfg: &SceneConfig, cam: &CameraModel) -> Result<Scene, DatagenError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let requested = rng.random_range(cfg.vehicles_min..=cfg.vehicles_max);
    let mut boxes: Vec<Box3D> = Vec::with_capacity(requested);
    let mut padded: Vec<Parallelogram> = Vec::with_capacity(requested);
    let mut attempts = 0;
    while boxes.len() < requested {
        if attempts >= cfg.max_attempts {
            return Err(DatagenError::PlacementFailure {
                placed: boxes.len(),
                requested,
            });
        }
        attempts += 1;
        let candidate = Box3D {
            center: [
                uniform(&mut rng, cfg.region_x_m),
                uniform(&mut rng, cfg.region_y_m),
                0.0,
            ],
            length: uniform(&mut rng, cfg.length_m),
            width: uniform(&mut rng, cfg.width_m),
            yaw: uniform(&mut rng, cfg.yaw_deg).to_radians(),
        };
        let pad = Box3D {
            length: candidate.length + cfg.gap_m,
            width: candidate.width + cfg.gap_m,
            ..candidate
        }
        .ground_footprint();
        let poly = pad.to_polygon();
        if padded
            .iter()
            .any(|other| !convex_intersection(&poly, &other.to_polygon()).is_empty())
        {
            continue;
        }
        boxes.push(candidate);
        padded.push(pad);
    }
    let labels = boxes
        .iter()
        .map(|b| box_to_label(b, cam))
        .collect::<Result<Vec<_>, _>>()?;
    let footprints: Vec<Parallelogram> = labels.iter().map(|l| l.footprint).collect();
    let predictions = perturbed_detections(
        &footprints,
        cfg.class_id,
        cfg.jitter_px,
        cfg.predictions_per_vehicle,
        cfg.confidence,
        &mut rng,
    );
    Ok(Scene {
        boxes,
        labels,
        predictions,
    })
}

/// Noisy copies of each footprint: Gaussian noise on the triangle points,
/// then reflection. The random stream does not depend on `sigma`, so sweeps
/// over `sigma` with the same rng state perturb in the same directions.
pub fn perturbed_detections(
    footprints: &[Parallelogram],
    class_id: u32,
    sigma: f64,
    per_footprint: usize,
    confidence: [f64; 2],
    rng: &mut ChaCha8Rng,
) -> Vec<Detection> {
    let mut out = Vec::with_capacity(footprints.len() * per_footprint);
    for fp in footprints {
        let tri = triangle_from_parallelogram(fp);
        for _ in 0..per_footprint {
            let mut noise = || {
                let dx: f64 = rng.sample(StandardNormal);
                let dy: f64 = rng.sample(StandardNormal);
                Point2::new(sigma * dx, sigma * dy)
            };
            let jittered = Triangle25::new(tri.p0 + noise(), tri.p1 + noise(), tri.p2 + noise());
            out.push(Detection {
                footprint: Parallelogram::reflect(&jittered),
                class_id,
                confidence: uniform(rng, confidence),
            });
        }
    }
    out
}

/// Detections for a jitter sweep: the rng is seeded from `seed` alone, so
/// every `sigma` perturbs the same footprints in the same directions.
pub fn sweep_detections(
    footprints: &[Parallelogram],
    cfg: &SceneConfig,
    sigma: f64,
    seed: u64,
) -> Vec<Detection> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    perturbed_detections(
        footprints,
        cfg.class_id,
        sigma,
        cfg.predictions_per_vehicle.max(1),
        cfg.confidence,
        &mut rng,
    )
}

/// A single-image NMS workload of `count` detections: a default scene under
/// the default elevated camera, with enough noisy predictions per vehicle.
pub fn synthetic_nms_workload(count: usize, seed: u64) -> Result<Vec<Detection>, DatagenError> {
    let cam = CameraModel::from_config(&CameraConfig::default())?;
    let cfg = SceneConfig {
        seed,
        vehicles_min: 20,
        vehicles_max: 30,
        region_x_m: [-20.0, 20.0],
        region_y_m: [-10.0, 12.0],
        jitter_px: 4.0,
        predictions_per_vehicle: 0,
        confidence: [0.1, 1.0],
        ..SceneConfig::default()
    };
    let scene = generate_scene(&cfg, &cam)?;
    let footprints: Vec<Parallelogram> = scene.labels.iter().map(|l| l.footprint).collect();
    let per = count.div_ceil(footprints.len().max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed));
    let mut dets = perturbed_detections(
        &footprints,
        cfg.class_id,
        cfg.jitter_px,
        per,
        cfg.confidence,
        &mut rng,
    );
    dets.truncate(count);
    Ok(dets)
}
