//! Planar geometry for ground-plane footprints.
//!
//! A vehicle footprint is a parallelogram in image space. It is carried
//! around as a [`Triangle25`] (center plus two adjacent "front" vertices)
//! and expanded into a [`Parallelogram`] by reflecting the two front
//! vertices through the center. Overlap is measured either exactly, by
//! clipping the two convex footprints against each other, or approximately
//! through their axis-aligned bounding rectangles.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Area below which a triangle or parallelogram is considered collapsed (px²).
pub const EPS_AREA: f64 = 1e-9;

/// Vertices of a clipped polygon closer than this are merged (px).
pub const EPS_VERTEX: f64 = 1e-9;

/// Tolerance for the reflection invariant when a parallelogram is built
/// from externally supplied vertices (px).
pub const PARALLELOGRAM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate triangle: area {area:e} px² is below {threshold:e}")]
    DegenerateTriangle { area: f64, threshold: f64 },
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("vertices violate the parallelogram invariant by {deviation:e} px")]
    NotAParallelogram { deviation: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn distance_sq(self, other: Point2) -> f64 {
        (self - other).norm_sq()
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn midpoint(self, other: Point2) -> Point2 {
        Point2::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    /// Reflection of `self` through `center`.
    pub fn reflect_through(self, center: Point2) -> Point2 {
        Point2::new(2.0 * center.x - self.x, 2.0 * center.y - self.y)
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.x, self.y]
    }
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Point2::new(x, y)
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        p.to_array()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Point2 {
    fn add_assign(&mut self, rhs: Point2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

/// Center `p0` and the two front vertices `p1`, `p2` of a footprint.
///
/// `p1` and `p2` have no canonical order: swapping them describes the same
/// parallelogram, so everything consuming a triangle must be invariant to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triangle25 {
    pub p0: Point2,
    pub p1: Point2,
    pub p2: Point2,
}

impl Triangle25 {
    pub const fn new(p0: Point2, p1: Point2, p2: Point2) -> Self {
        Self { p0, p1, p2 }
    }

    pub fn is_finite(&self) -> bool {
        self.p0.is_finite() && self.p1.is_finite() && self.p2.is_finite()
    }

    /// Twice the signed area, positive for counter-clockwise `(p0, p1, p2)`.
    pub fn signed_area2(&self) -> f64 {
        (self.p1 - self.p0).cross(self.p2 - self.p0)
    }

    pub fn area(&self) -> f64 {
        0.5 * self.signed_area2().abs()
    }

    pub fn is_degenerate(&self) -> bool {
        self.area() < EPS_AREA
    }

    /// Same triangle with the front vertices exchanged.
    pub fn swapped(&self) -> Triangle25 {
        Triangle25::new(self.p0, self.p2, self.p1)
    }

    pub fn vertices(&self) -> [Point2; 3] {
        [self.p0, self.p1, self.p2]
    }

    pub fn translated(&self, t: Point2) -> Triangle25 {
        Triangle25::new(self.p0 + t, self.p1 + t, self.p2 + t)
    }
}

/// Four-vertex footprint `(p1, p2, p3, p4)` with its center `p0`.
///
/// Construction guarantees `p3 = 2·p0 − p1` and `p4 = 2·p0 − p2`, so the
/// vertex order always traces the boundary and opposite edges are equal.
/// The footprint may have zero area; check [`Parallelogram::is_degenerate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parallelogram {
    vertices: [Point2; 4],
    center: Point2,
}

impl Parallelogram {
    /// Reflects the front vertices through the center. Never fails; the
    /// result may be degenerate.
    pub fn reflect(tri: &Triangle25) -> Self {
        let Triangle25 { p0, p1, p2 } = *tri;
        Self {
            vertices: [p1, p2, p1.reflect_through(p0), p2.reflect_through(p0)],
            center: p0,
        }
    }

    /// Builds a parallelogram from stored vertices and center, checking the
    /// reflection invariant within [`PARALLELOGRAM_TOLERANCE`]. A quad listed
    /// in crossing order (`p1, p3, p2, p4`) fails this check, so
    /// self-intersecting inputs are rejected here.
    pub fn from_parts(vertices: [Point2; 4], center: Point2) -> Result<Self, GeometryError> {
        if !center.is_finite() || vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let deviation = vertices[2]
            .distance(vertices[0].reflect_through(center))
            .max(vertices[3].distance(vertices[1].reflect_through(center)));
        if deviation > PARALLELOGRAM_TOLERANCE {
            return Err(GeometryError::NotAParallelogram { deviation });
        }
        Ok(Self { vertices, center })
    }

    /// Builds a parallelogram from four ordered vertices; the center is the
    /// midpoint of the `p1`–`p3` diagonal.
    pub fn from_vertices(vertices: [Point2; 4]) -> Result<Self, GeometryError> {
        let center = vertices[0].midpoint(vertices[2]);
        Self::from_parts(vertices, center)
    }

    pub fn vertices(&self) -> &[Point2; 4] {
        &self.vertices
    }

    pub fn center(&self) -> Point2 {
        self.center
    }

    /// Positive when `(p1, p2, p3, p4)` runs counter-clockwise.
    pub fn signed_area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn is_degenerate(&self) -> bool {
        self.area() < EPS_AREA
    }

    pub fn to_polygon(&self) -> ConvexPolygon {
        ConvexPolygon::from_points(self.vertices.to_vec())
    }

    pub fn translated(&self, t: Point2) -> Parallelogram {
        Parallelogram {
            vertices: self.vertices.map(|v| v + t),
            center: self.center + t,
        }
    }

    /// Front edge `(p1, p2)`.
    pub fn front_edge(&self) -> (Point2, Point2) {
        (self.vertices[0], self.vertices[1])
    }

    /// Rear edge `(p3, p4)`.
    pub fn rear_edge(&self) -> (Point2, Point2) {
        (self.vertices[2], self.vertices[3])
    }
}

/// Expands a triangle into its parallelogram, rejecting collapsed triangles.
pub fn reconstruct_parallelogram(tri: &Triangle25) -> Result<Parallelogram, GeometryError> {
    if !tri.is_finite() {
        return Err(GeometryError::NonFinite);
    }
    let area = tri.area();
    if area < EPS_AREA {
        return Err(GeometryError::DegenerateTriangle {
            area,
            threshold: EPS_AREA,
        });
    }
    Ok(Parallelogram::reflect(tri))
}

/// Center plus the stored first edge. Which adjacent pair comes back is an
/// artifact of vertex storage order.
pub fn triangle_from_parallelogram(par: &Parallelogram) -> Triangle25 {
    Triangle25::new(par.center, par.vertices[0], par.vertices[1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point2,
    pub max: Point2,
}

impl Rect {
    pub fn new(min: Point2, max: Point2) -> Self {
        debug_assert!(min.x <= max.x && min.y <= max.y);
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn from_points(points: &[Point2]) -> Self {
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Self { min, max }
    }

    pub fn intersection_area(&self, other: &Rect) -> f64 {
        let w = self.max.x.min(other.max.x) - self.min.x.max(other.min.x);
        let h = self.max.y.min(other.max.y) - self.min.y.max(other.min.y);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }
}

/// Convex polygon with counter-clockwise vertices. Empty means "no region".
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

impl ConvexPolygon {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Takes ordered boundary points in either orientation; clockwise input
    /// is reversed.
    pub fn from_points(mut points: Vec<Point2>) -> Self {
        if signed_area(&points) < 0.0 {
            points.reverse();
        }
        Self { vertices: points }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3
    }

    pub fn area(&self) -> f64 {
        shoelace_area(self)
    }

    /// Convexity check: all turns share one sign, up to `eps`.
    pub fn is_convex(&self, eps: f64) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return true;
        }
        let mut pos = false;
        let mut neg = false;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            let turn = (b - a).cross(c - b);
            pos |= turn > eps;
            neg |= turn < -eps;
        }
        !(pos && neg)
    }
}

/// Signed shoelace area of an ordered ring of points, positive when CCW.
pub fn signed_area(points: &[Point2]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        acc += points[i].cross(points[(i + 1) % n]);
    }
    0.5 * acc
}

pub fn shoelace_area(poly: &ConvexPolygon) -> f64 {
    signed_area(&poly.vertices).abs()
}

/// Sutherland–Hodgman clipping of `a` by every edge of `b`.
pub fn convex_intersection(a: &ConvexPolygon, b: &ConvexPolygon) -> ConvexPolygon {
    if a.is_empty() || b.is_empty() || a.area() < EPS_AREA || b.area() < EPS_AREA {
        return ConvexPolygon::empty();
    }
    let clip = &b.vertices;
    let mut output: Vec<Point2> = a.vertices.clone();
    let mut input: Vec<Point2> = Vec::with_capacity(output.len() + clip.len());
    for i in 0..clip.len() {
        if output.is_empty() {
            break;
        }
        let edge_start = clip[i];
        let edge_end = clip[(i + 1) % clip.len()];
        let edge = edge_end - edge_start;
        std::mem::swap(&mut input, &mut output);
        output.clear();
        // inside: left of (or on) the CCW clip edge
        let side = |p: Point2| edge.cross(p - edge_start);
        let mut prev = *input.last().unwrap();
        let mut prev_side = side(prev);
        for &cur in input.iter() {
            let cur_side = side(cur);
            if cur_side >= 0.0 {
                if prev_side < 0.0 {
                    output.push(segment_crossing(prev, cur, prev_side, cur_side));
                }
                output.push(cur);
            } else if prev_side >= 0.0 {
                output.push(segment_crossing(prev, cur, prev_side, cur_side));
            }
            prev = cur;
            prev_side = cur_side;
        }
    }
    dedup_ring(&mut output, EPS_VERTEX);
    if output.len() < 3 {
        return ConvexPolygon::empty();
    }
    let poly = ConvexPolygon::from_points(output);
    if poly.area() < EPS_AREA {
        ConvexPolygon::empty()
    } else {
        poly
    }
}

fn segment_crossing(p: Point2, q: Point2, side_p: f64, side_q: f64) -> Point2 {
    let t = side_p / (side_p - side_q);
    p + (q - p) * t
}

fn dedup_ring(points: &mut Vec<Point2>, tol: f64) {
    let tol_sq = tol * tol;
    points.dedup_by(|b, a| a.distance_sq(*b) <= tol_sq);
    while points.len() > 1 && points[0].distance_sq(*points.last().unwrap()) <= tol_sq {
        points.pop();
    }
}

fn iou_from_areas(inter: f64, area_a: f64, area_b: f64) -> f64 {
    let union = area_a + area_b - inter;
    if union < EPS_AREA {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}

/// Polygon IoU of two footprints via clipping and the shoelace formula.
pub fn exact_iou(a: &Parallelogram, b: &Parallelogram) -> f64 {
    let pa = a.to_polygon();
    let pb = b.to_polygon();
    let inter = convex_intersection(&pa, &pb).area();
    iou_from_areas(inter, pa.area(), pb.area())
}

pub fn aabb(par: &Parallelogram) -> Rect {
    Rect::from_points(&par.vertices)
}

pub fn aabb_iou(a: &Rect, b: &Rect) -> f64 {
    iou_from_areas(a.intersection_area(b), a.area(), b.area())
}

/// Closed containment test: boundary points are inside.
pub fn point_in_triangle(p: Point2, tri: &Triangle25) -> bool {
    let [a, b, c] = tri.vertices();
    let d1 = (b - a).cross(p - a);
    let d2 = (c - b).cross(p - b);
    let d3 = (a - c).cross(p - c);
    let has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(has_neg && has_pos)
}

pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// Zero inside or on the triangle, otherwise the distance to its nearest edge.
pub fn distance_to_triangle(p: Point2, tri: &Triangle25) -> f64 {
    if point_in_triangle(p, tri) {
        return 0.0;
    }
    let [a, b, c] = tri.vertices();
    point_segment_distance(p, a, b)
        .min(point_segment_distance(p, b, c))
        .min(point_segment_distance(p, c, a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn square(x0: f64, y0: f64, x1: f64, y1: f64) -> ConvexPolygon {
        ConvexPolygon::from_points(vec![p(x0, y0), p(x1, y0), p(x1, y1), p(x0, y1)])
    }

    fn unit_square() -> Parallelogram {
        reconstruct_parallelogram(&Triangle25::new(p(0.5, 0.5), p(0.0, 0.0), p(1.0, 0.0))).unwrap()
    }

    #[test]
    fn reconstruct_unit_square() {
        let par = unit_square();
        assert_eq!(
            par.vertices(),
            &[p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)]
        );
        assert_eq!(par.center(), p(0.5, 0.5));
    }

    #[test]
    fn reconstruct_symmetric_about_origin() {
        let par =
            reconstruct_parallelogram(&Triangle25::new(p(0.0, 0.0), p(-1.0, -1.0), p(1.0, -1.0)))
                .unwrap();
        assert_eq!(
            par.vertices(),
            &[p(-1.0, -1.0), p(1.0, -1.0), p(1.0, 1.0), p(-1.0, 1.0)]
        );
        let [v1, v2, v3, v4] = *par.vertices();
        assert_eq!(v2 - v1, v3 - v4);
    }

    #[test]
    fn reconstruct_rejects_collinear() {
        let tri = Triangle25::new(p(1.0, 1.0), p(0.0, 0.0), p(2.0, 2.0));
        assert!(matches!(
            reconstruct_parallelogram(&tri),
            Err(GeometryError::DegenerateTriangle { .. })
        ));
        assert!(Parallelogram::reflect(&tri).is_degenerate());
    }

    #[test]
    fn reconstruct_rejects_nan() {
        let tri = Triangle25::new(p(f64::NAN, 0.0), p(0.0, 0.0), p(1.0, 0.0));
        assert_eq!(
            reconstruct_parallelogram(&tri),
            Err(GeometryError::NonFinite)
        );
    }

    #[test]
    fn extract_from_unit_square() {
        let tri = triangle_from_parallelogram(&unit_square());
        assert_eq!(tri.p0, p(0.5, 0.5));
        let set = [tri.p1, tri.p2];
        assert!(set.contains(&p(0.0, 0.0)) && set.contains(&p(1.0, 0.0)));
    }

    #[test]
    fn extracted_zero_area_triangle_is_degenerate() {
        let flat =
            Parallelogram::from_vertices([p(0.0, 0.0), p(1.0, 0.0), p(2.0, 0.0), p(1.0, 0.0)])
                .unwrap();
        assert!(flat.is_degenerate());
        assert!(triangle_from_parallelogram(&flat).is_degenerate());
    }

    #[test]
    fn crossing_vertex_order_is_rejected() {
        // unit square listed as p1, p3, p2, p4 (a bow-tie)
        let res = Parallelogram::from_parts(
            [p(0.0, 0.0), p(1.0, 1.0), p(1.0, 0.0), p(0.0, 1.0)],
            p(0.5, 0.5),
        );
        assert!(matches!(res, Err(GeometryError::NotAParallelogram { .. })));
    }

    #[test]
    fn shoelace_basics() {
        assert_eq!(square(0.0, 0.0, 1.0, 1.0).area(), 1.0);
        assert_eq!(ConvexPolygon::empty().area(), 0.0);
        let cw =
            ConvexPolygon::from_points(vec![p(0.0, 0.0), p(0.0, 2.0), p(3.0, 2.0), p(3.0, 0.0)]);
        assert_eq!(cw.area(), 6.0);
        assert!(signed_area(cw.vertices()) > 0.0);
    }

    #[test]
    fn intersection_with_self() {
        let a = square(0.0, 0.0, 1.0, 1.0);
        let i = convex_intersection(&a, &a);
        assert_eq!(i.vertices().len(), 4);
        for v in a.vertices() {
            assert!(i.vertices().iter().any(|w| w.distance(*v) < 1e-12));
        }
    }

    #[test]
    fn intersection_disjoint_is_empty() {
        let i = convex_intersection(&square(0.0, 0.0, 1.0, 1.0), &square(5.0, 5.0, 6.0, 6.0));
        assert!(i.is_empty());
        assert_eq!(i.area(), 0.0);
    }

    #[test]
    fn intersection_half_overlap() {
        let i = convex_intersection(&square(0.0, 0.0, 1.0, 1.0), &square(0.5, 0.0, 1.5, 1.0));
        assert!((i.area() - 0.5).abs() < 1e-12);
        assert!(signed_area(i.vertices()) > 0.0);
    }

    #[test]
    fn intersection_touching_edge_is_empty() {
        let i = convex_intersection(&square(0.0, 0.0, 1.0, 1.0), &square(1.0, 0.0, 2.0, 1.0));
        assert!(i.is_empty());
    }

    #[test]
    fn iou_identical_and_disjoint() {
        let a = unit_square();
        assert!((exact_iou(&a, &a) - 1.0).abs() < 1e-12);
        let b = a.translated(p(3.0, 0.0));
        assert_eq!(exact_iou(&a, &b), 0.0);
    }

    #[test]
    fn iou_of_square_and_its_45_degree_rotation() {
        let a = unit_square();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = p(0.5, 0.5);
        let b =
            reconstruct_parallelogram(&Triangle25::new(c, c + p(0.0, -h), c + p(h, 0.0))).unwrap();
        // octagon of area 2(√2 − 1); union 4 − 2√2; IoU 1/√2
        let inter = convex_intersection(&a.to_polygon(), &b.to_polygon());
        assert!((inter.area() - 2.0 * (2f64.sqrt() - 1.0)).abs() < 1e-12);
        assert_eq!(inter.vertices().len(), 8);
        let expected = std::f64::consts::FRAC_1_SQRT_2;
        assert!((exact_iou(&a, &b) - expected).abs() < 1e-12);
        assert!((exact_iou(&b, &a) - expected).abs() < 1e-12);
    }

    #[test]
    fn degenerate_footprints_have_zero_iou() {
        let flat = Parallelogram::reflect(&Triangle25::new(p(0.5, 0.0), p(0.0, 0.0), p(1.0, 0.0)));
        assert_eq!(exact_iou(&flat, &flat), 0.0);
        assert_eq!(exact_iou(&flat, &unit_square()), 0.0);
    }

    #[test]
    fn aabb_examples() {
        assert_eq!(aabb(&unit_square()), Rect::new(p(0.0, 0.0), p(1.0, 1.0)));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let diamond =
            reconstruct_parallelogram(&Triangle25::new(Point2::ORIGIN, p(0.0, -h), p(h, 0.0)))
                .unwrap();
        let r = aabb(&diamond);
        assert_eq!(r, Rect::new(p(-h, -h), p(h, h)));
    }

    #[test]
    fn aabb_iou_examples() {
        let a = Rect::new(p(0.0, 0.0), p(1.0, 1.0));
        assert_eq!(aabb_iou(&a, &a), 1.0);
        let b = Rect::new(p(0.5, 0.0), p(1.5, 1.0));
        assert!((aabb_iou(&a, &b) - 1.0 / 3.0).abs() < 1e-15);
        let c = Rect::new(p(2.0, 2.0), p(3.0, 3.0));
        assert_eq!(aabb_iou(&a, &c), 0.0);
    }

    #[test]
    fn aabb_iou_is_exact_for_axis_aligned_footprints() {
        let a = unit_square();
        let b = Parallelogram::from_vertices([p(0.5, 0.2), p(2.0, 0.2), p(2.0, 1.7), p(0.5, 1.7)])
            .unwrap();
        let approx = aabb_iou(&aabb(&a), &aabb(&b));
        assert!((approx - exact_iou(&a, &b)).abs() < 1e-12);
    }

    #[test]
    fn point_in_triangle_cases() {
        let tri = Triangle25::new(p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0));
        assert!(point_in_triangle(p(1.0 / 3.0, 1.0 / 3.0), &tri));
        assert!(!point_in_triangle(p(10.0, 10.0), &tri));
        assert!(point_in_triangle(p(1.0, 0.0), &tri));
        assert!(point_in_triangle(p(0.5, 0.0), &tri));
        // clockwise orientation works too
        assert!(point_in_triangle(p(0.2, 0.2), &tri.swapped()));
    }

    #[test]
    fn distance_to_triangle_cases() {
        let tri = Triangle25::new(p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0));
        assert_eq!(distance_to_triangle(p(0.2, 0.2), &tri), 0.0);
        assert!((distance_to_triangle(p(2.0, 0.0), &tri) - 1.0).abs() < 1e-15);
        assert!((distance_to_triangle(p(0.5, -1.0), &tri) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn convexity_check() {
        assert!(square(0.0, 0.0, 1.0, 1.0).is_convex(1e-12));
        let dart =
            ConvexPolygon::from_points(vec![p(0.0, 0.0), p(2.0, 1.0), p(0.0, 2.0), p(1.0, 1.0)]);
        assert!(!dart.is_convex(1e-12));
    }
}
