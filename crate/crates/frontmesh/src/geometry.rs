//! Planar geometric primitives and exact predicates.
//!
//! Orientation and in-circle tests delegate to adaptive-precision floating
//! point arithmetic, so their signs are exact for every `f64` input. Derived
//! quantities (circumcircles, angles) are ordinary floating point: angles are
//! computed from `atan2` of cross and dot products rather than `acos`, which
//! keeps them accurate for needle-shaped triangles.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A point in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    /// Euclidean distance to `other`.
    pub fn dist(&self, other: Point2) -> f64 {
        self.dist2(other).sqrt()
    }

    /// Squared Euclidean distance to `other`.
    pub fn dist2(&self, other: Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    /// Midpoint of the segment from `self` to `other`.
    pub fn midpoint(&self, other: Point2) -> Point2 {
        Point2::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }
}

/// A circle given by center and radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point2,
    pub radius: f64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    /// The three points are exactly collinear.
    #[error("degenerate triangle: vertices are collinear")]
    DegenerateTriangle,
}

/// Exact orientation of `c` relative to the directed line `a -> b`.
///
/// Returns `+1` if `a`, `b`, `c` wind counterclockwise (`c` strictly left of
/// `a -> b`), `-1` if clockwise, `0` if exactly collinear.
pub fn orient2d(a: Point2, b: Point2, c: Point2) -> i8 {
    let v = robust::orient2d(
        robust::Coord { x: a.x, y: a.y },
        robust::Coord { x: b.x, y: b.y },
        robust::Coord { x: c.x, y: c.y },
    );
    sign(v)
}

/// Exact in-circle test. `a`, `b`, `c` must wind counterclockwise.
///
/// Returns `+1` if `d` lies strictly inside the circumcircle of `abc`, `-1`
/// if strictly outside, `0` if the four points are exactly cocircular.
pub fn incircle(a: Point2, b: Point2, c: Point2, d: Point2) -> i8 {
    let v = robust::incircle(
        robust::Coord { x: a.x, y: a.y },
        robust::Coord { x: b.x, y: b.y },
        robust::Coord { x: c.x, y: c.y },
        robust::Coord { x: d.x, y: d.y },
    );
    sign(v)
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Cross product of `b - a` and `c - a` (twice the signed triangle area).
pub fn cross(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Circumcircle of triangle `abc`.
///
/// The center is computed relative to `a` to limit cancellation; the radius is
/// the distance from the center to `a`. Exactly collinear input is rejected.
pub fn circumcircle(a: Point2, b: Point2, c: Point2) -> Result<Circle, GeometryError> {
    if orient2d(a, b, c) == 0 {
        return Err(GeometryError::DegenerateTriangle);
    }
    let bx = b.x - a.x;
    let by = b.y - a.y;
    let cx = c.x - a.x;
    let cy = c.y - a.y;
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (b2 * cy - c2 * by) / d;
    let uy = (c2 * bx - b2 * cx) / d;
    Ok(Circle {
        center: Point2::new(a.x + ux, a.y + uy),
        radius: (ux * ux + uy * uy).sqrt(),
    })
}

/// Interior angles of triangle `abc` in radians, one per vertex in input order.
///
/// All three angles share a single cross-product magnitude, so the identity
/// `radius_edge_ratio = 1 / (2 sin(min_angle))` holds to roundoff even for
/// near-degenerate triangles. Exactly collinear input is rejected.
pub fn angles(a: Point2, b: Point2, c: Point2) -> Result<[f64; 3], GeometryError> {
    if orient2d(a, b, c) == 0 {
        return Err(GeometryError::DegenerateTriangle);
    }
    let x = cross(a, b, c).abs();
    let dot_a = (b.x - a.x) * (c.x - a.x) + (b.y - a.y) * (c.y - a.y);
    let dot_b = (a.x - b.x) * (c.x - b.x) + (a.y - b.y) * (c.y - b.y);
    let dot_c = (a.x - c.x) * (b.x - c.x) + (a.y - c.y) * (b.y - c.y);
    Ok([x.atan2(dot_a), x.atan2(dot_b), x.atan2(dot_c)])
}

/// Smallest interior angle of triangle `abc` in radians.
pub fn min_angle(a: Point2, b: Point2, c: Point2) -> Result<f64, GeometryError> {
    let ang = angles(a, b, c)?;
    Ok(ang[0].min(ang[1]).min(ang[2]))
}

/// Largest interior angle of triangle `abc` in radians.
pub fn max_angle(a: Point2, b: Point2, c: Point2) -> Result<f64, GeometryError> {
    let ang = angles(a, b, c)?;
    Ok(ang[0].max(ang[1]).max(ang[2]))
}

/// Circumradius divided by shortest edge length.
///
/// Equals `1 / (2 sin(min_angle))`; large values mean a skinny triangle.
pub fn radius_edge_ratio(a: Point2, b: Point2, c: Point2) -> Result<f64, GeometryError> {
    if orient2d(a, b, c) == 0 {
        return Err(GeometryError::DegenerateTriangle);
    }
    let x = cross(a, b, c).abs();
    let lab = a.dist(b);
    let lbc = b.dist(c);
    let lca = c.dist(a);
    // r = |ab| |bc| |ca| / (2 X); dividing by the shortest edge cancels it.
    let ratio = lab * lbc * lca / (2.0 * x * lab.min(lbc).min(lca));
    Ok(ratio)
}

/// Squared distance from `p` to the closed segment `[a, b]`.
pub fn dist2_point_segment(p: Point2, a: Point2, b: Point2) -> f64 {
    let abx = b.x - a.x;
    let aby = b.y - a.y;
    let apx = p.x - a.x;
    let apy = p.y - a.y;
    let len2 = abx * abx + aby * aby;
    if len2 == 0.0 {
        return p.dist2(a);
    }
    let t = ((apx * abx + apy * aby) / len2).clamp(0.0, 1.0);
    let qx = a.x + t * abx;
    let qy = a.y + t * aby;
    p.dist2(Point2::new(qx, qy))
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn dist_point_segment(p: Point2, a: Point2, b: Point2) -> f64 {
    dist2_point_segment(p, a, b).sqrt()
}

/// Whether the open segment `(p, q)` intersects the closed segment `[a, b]`.
///
/// Used for visibility tests: a sight line is blocked if it crosses a
/// constrained edge anywhere, including touching an endpoint of `[a, b]` or
/// running collinearly through it.
pub fn open_segment_hits_segment(p: Point2, q: Point2, a: Point2, b: Point2) -> bool {
    let o_pqa = orient2d(p, q, a);
    let o_pqb = orient2d(p, q, b);
    let o_abp = orient2d(a, b, p);
    let o_abq = orient2d(a, b, q);
    if o_pqa != o_pqb && o_abp != o_abq {
        // General position: the open part of pq is crossed unless the
        // intersection is exactly at p or q, which shows up as a zero below.
        if o_abp == 0 || o_abq == 0 {
            return false;
        }
        return true;
    }
    // Collinear configurations: check whether any interior point of pq lies
    // on [a, b]. Project on the dominant axis of pq.
    if o_pqa == 0 && o_pqb == 0 {
        let (plo, phi, alo, ahi) = if (q.x - p.x).abs() >= (q.y - p.y).abs() {
            (p.x.min(q.x), p.x.max(q.x), a.x.min(b.x), a.x.max(b.x))
        } else {
            (p.y.min(q.y), p.y.max(q.y), a.y.min(b.y), a.y.max(b.y))
        };
        return alo.max(plo) < ahi.min(phi);
    }
    // An endpoint of [a, b] may lie in the interior of pq.
    if o_pqa == 0 && o_abp != o_abq && between(p, q, a) {
        return true;
    }
    if o_pqb == 0 && o_abp != o_abq && between(p, q, b) {
        return true;
    }
    false
}

/// Whether collinear point `c` lies strictly between `p` and `q`.
fn between(p: Point2, q: Point2, c: Point2) -> bool {
    if (q.x - p.x).abs() >= (q.y - p.y).abs() {
        (p.x < c.x && c.x < q.x) || (q.x < c.x && c.x < p.x)
    } else {
        (p.y < c.y && c.y < q.y) || (q.y < c.y && c.y < p.y)
    }
}
