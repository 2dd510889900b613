//! Planar primitives: points, word quadrilaterals, axis-aligned rectangles
//! and the projective mapping between a rectified crop and its quad.
//!
//! Coordinates are continuous image coordinates with `y` pointing down.
//! Pixel `(i, j)` covers `[i, i + 1) × [j, j + 1)` and is represented by its
//! centre `(i + 0.5, j + 0.5)`.

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn pixel_center(x: usize, y: usize) -> Self {
        Point::new(x as f64 + 0.5, y as f64 + 0.5)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point::new(x, y)
    }
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Distance from `p` to the closed segment `ab`.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(a.lerp(b, t))
}

/// Parameter `t` along `p0→p1` where it crosses segment `a→b`, if the two
/// properly intersect or touch.
fn segment_intersection_param(p0: Point, p1: Point, a: Point, b: Point) -> Option<f64> {
    let r = (p1.x - p0.x, p1.y - p0.y);
    let s = (b.x - a.x, b.y - a.y);
    let denom = r.0 * s.1 - r.1 * s.0;
    if denom.abs() < EPS {
        return None;
    }
    let qp = (a.x - p0.x, a.y - p0.y);
    let t = (qp.0 * s.1 - qp.1 * s.0) / denom;
    let u = (qp.0 * r.1 - qp.1 * r.0) / denom;
    ((-EPS..=1.0 + EPS).contains(&t) && (-EPS..=1.0 + EPS).contains(&u)).then_some(t)
}

fn segments_properly_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Four corners, nominally clockwise from the top-left of the word.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quad(pub [Point; 4]);

impl Quad {
    pub fn from_coords(c: [f64; 8]) -> Self {
        Quad([
            Point::new(c[0], c[1]),
            Point::new(c[2], c[3]),
            Point::new(c[4], c[5]),
            Point::new(c[6], c[7]),
        ])
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]` as a clockwise quad.
    pub fn axis_aligned(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Quad([
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    }

    /// A `width × height` rectangle centred on `center` and rotated by
    /// `angle_deg` (positive turns the reading direction clockwise on screen).
    pub fn rotated_rect(center: Point, width: f64, height: f64, angle_deg: f64) -> Self {
        let (s, c) = angle_deg.to_radians().sin_cos();
        let corner = |dx: f64, dy: f64| Point::new(center.x + dx * c - dy * s, center.y + dx * s + dy * c);
        let (hw, hh) = (width / 2.0, height / 2.0);
        Quad([corner(-hw, -hh), corner(hw, -hh), corner(hw, hh), corner(-hw, hh)])
    }

    pub fn points(&self) -> &[Point; 4] {
        &self.0
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        (0..4).map(move |i| (self.0[i], self.0[(i + 1) % 4]))
    }

    pub fn signed_area(&self) -> f64 {
        self.edges().map(|(a, b)| a.x * b.y - b.x * a.y).sum::<f64>() / 2.0
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// True when the two pairs of opposite edges do not cross and the area
    /// is non-zero.
    pub fn is_simple(&self) -> bool {
        let p = &self.0;
        self.area() > EPS
            && !segments_properly_cross(p[0], p[1], p[2], p[3])
            && !segments_properly_cross(p[1], p[2], p[3], p[0])
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::DegenerateQuad("non-finite vertex".into()));
        }
        if !self.is_simple() {
            return Err(Error::DegenerateQuad(format!(
                "self-intersecting or zero-area quad {:?}",
                self.0
            )));
        }
        Ok(())
    }

    /// Mean of the top and bottom edge lengths.
    pub fn mean_width(&self) -> f64 {
        let p = &self.0;
        (p[0].distance(p[1]) + p[3].distance(p[2])) / 2.0
    }

    /// Mean of the left and right edge lengths.
    pub fn mean_height(&self) -> f64 {
        let p = &self.0;
        (p[0].distance(p[3]) + p[1].distance(p[2])) / 2.0
    }

    pub fn major_axis(&self) -> f64 {
        self.mean_width().max(self.mean_height())
    }

    pub fn centroid(&self) -> Point {
        let (sx, sy) = self.0.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        Point::new(sx / 4.0, sy / 4.0)
    }

    pub fn bounding_rect(&self) -> Rect {
        let xs = self.0.iter().map(|p| p.x);
        let ys = self.0.iter().map(|p| p.y);
        Rect {
            x0: xs.clone().fold(f64::INFINITY, f64::min),
            x1: xs.fold(f64::NEG_INFINITY, f64::max),
            y0: ys.clone().fold(f64::INFINITY, f64::min),
            y1: ys.fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn clamped(&self, width: f64, height: f64) -> Quad {
        Quad(
            self.0
                .map(|p| Point::new(p.x.clamp(0.0, width), p.y.clamp(0.0, height))),
        )
    }

    /// Point-in-polygon test; points on the boundary count as inside.
    pub fn contains(&self, p: Point) -> bool {
        if self.edges().any(|(a, b)| point_segment_distance(p, a, b) <= EPS) {
            return true;
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Length of the part of segment `p0→p1` that lies inside the quad.
    pub fn clipped_length(&self, p0: Point, p1: Point) -> f64 {
        let len = p0.distance(p1);
        if len == 0.0 {
            return 0.0;
        }
        let mut ts = vec![0.0, 1.0];
        ts.extend(
            self.edges()
                .filter_map(|(a, b)| segment_intersection_param(p0, p1, a, b))
                .map(|t| t.clamp(0.0, 1.0)),
        );
        ts.sort_by(f64::total_cmp);
        ts.windows(2)
            .filter(|w| w[1] - w[0] > 0.0 && self.contains(p0.lerp(p1, (w[0] + w[1]) / 2.0)))
            .map(|w| (w[1] - w[0]) * len)
            .sum()
    }
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn width(&self) -> f64 {
        (self.x1 - self.x0).max(0.0)
    }

    pub fn height(&self) -> f64 {
        (self.y1 - self.y0).max(0.0)
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn intersection(&self, other: &Rect) -> Rect {
        Rect {
            x0: self.x0.max(other.x0),
            y0: self.y0.max(other.y0),
            x1: self.x1.min(other.x1),
            y1: self.y1.min(other.y1),
        }
    }

    pub fn iou(&self, other: &Rect) -> f64 {
        let inter = self.intersection(other).area();
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }
}

/// Projective map `p ↦ H p` in homogeneous coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography(Matrix3<f64>);

impl Homography {
    pub fn identity() -> Self {
        Homography(Matrix3::identity())
    }

    /// Solves the 4-point correspondence `src[i] ↦ dst[i]`.
    pub fn from_correspondences(src: &[Point; 4], dst: &[Point; 4]) -> Result<Self> {
        let mut a = SMatrix::<f64, 8, 8>::zeros();
        let mut b = SVector::<f64, 8>::zeros();
        for i in 0..4 {
            let (x, y) = (src[i].x, src[i].y);
            let (u, v) = (dst[i].x, dst[i].y);
            let r = 2 * i;
            a.row_mut(r)
                .copy_from_slice(&[x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]);
            a.row_mut(r + 1)
                .copy_from_slice(&[0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]);
            b[r] = u;
            b[r + 1] = v;
        }
        let h = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::DegenerateQuad("homography system is singular".into()))?;
        let m = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], 1.0);
        let scale = m.abs().max();
        if !m.iter().all(|v| v.is_finite()) || m.determinant().abs() <= 1e-12 * scale.powi(3) {
            return Err(Error::DegenerateQuad("homography is rank-deficient".into()));
        }
        Ok(Homography(m))
    }

    /// Maps the `width × height` crop rectangle onto `quad`, corner by
    /// corner starting at the top-left.
    pub fn rect_to_quad(width: f64, height: f64, quad: &Quad) -> Result<Self> {
        let src = Quad::axis_aligned(0.0, 0.0, width, height).0;
        Self::from_correspondences(&src, &quad.0)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.0
            .try_inverse()
            .map(Homography)
            .ok_or_else(|| Error::DegenerateQuad("homography is not invertible".into()))
    }

    pub fn apply(&self, p: Point) -> Option<Point> {
        let v = self.0 * Vector3::new(p.x, p.y, 1.0);
        (v.z.abs() > 1e-15).then(|| Point::new(v.x / v.z, v.y / v.z))
    }
}
