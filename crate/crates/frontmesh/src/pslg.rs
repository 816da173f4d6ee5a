//! Planar straight-line graph input: `.poly` parsing and validation.
//!
//! A PSLG is a set of vertices, non-crossing segments between them, and hole
//! seed points. Segments may share endpoints but must not cross, overlap, or
//! touch each other's interiors; refinement quality guarantees also require
//! that no vertex lies in the interior of a segment it does not bound.

use crate::geometry::{self, orient2d, Point2};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

/// An input segment between two vertex indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub a: usize,
    pub b: usize,
    pub marker: i32,
}

/// A planar straight-line graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Pslg {
    pub vertices: Vec<Point2>,
    pub vertex_markers: Vec<i32>,
    pub segments: Vec<Segment>,
    pub holes: Vec<Point2>,
}

/// A pair of adjacent segments meeting at `apex` at an angle small enough to
/// require the skip rule during refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallAngleRecord {
    pub apex: usize,
    pub segments: (usize, usize),
    /// Angle between the two segments at the apex, radians.
    pub angle: f64,
}

/// A structural defect found by [`Pslg::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    /// Two vertex indices with exactly equal coordinates.
    DuplicateVertex(usize, usize),
    /// Segment whose endpoints coincide.
    ZeroLengthSegment(usize),
    /// Segment referencing a vertex index outside the vertex list.
    IndexOutOfRange(usize),
    /// Two segments with the same endpoint pair.
    DuplicateSegment(usize, usize),
    /// Two segments crossing at a point interior to both.
    ProperIntersection(usize, usize),
    /// Two segments touching at a point interior to at least one of them,
    /// including collinear overlap.
    TouchingIntersection(usize, usize),
    /// A vertex lying in the interior of a segment it does not bound.
    VertexOnSegment(usize, usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::DuplicateVertex(a, b) => write!(f, "vertices {a} and {b} coincide"),
            Violation::ZeroLengthSegment(s) => write!(f, "segment {s} has zero length"),
            Violation::IndexOutOfRange(s) => write!(f, "segment {s} references a missing vertex"),
            Violation::DuplicateSegment(a, b) => write!(f, "segments {a} and {b} coincide"),
            Violation::ProperIntersection(a, b) => write!(f, "segments {a} and {b} cross"),
            Violation::TouchingIntersection(a, b) => {
                write!(f, "segments {a} and {b} touch at an interior point")
            }
            Violation::VertexOnSegment(v, s) => {
                write!(f, "vertex {v} lies in the interior of segment {s}")
            }
        }
    }
}

/// Parse failure, reported with the 1-based source line.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParsePolyError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Error, PartialEq)]
pub enum PslgError {
    #[error("segments {0} and {1} are not adjacent")]
    NotAdjacent(usize, usize),
    #[error("segment index {0} out of range")]
    BadSegment(usize),
}

impl Pslg {
    pub fn new(vertices: Vec<Point2>, segments: Vec<Segment>, holes: Vec<Point2>) -> Self {
        let markers = vec![0; vertices.len()];
        Pslg {
            vertices,
            vertex_markers: markers,
            segments,
            holes,
        }
    }

    /// Endpoint coordinates of segment `i`.
    pub fn segment_points(&self, i: usize) -> (Point2, Point2) {
        let s = &self.segments[i];
        (self.vertices[s.a], self.vertices[s.b])
    }

    /// Length of segment `i`.
    pub fn segment_length(&self, i: usize) -> f64 {
        let (p, q) = self.segment_points(i);
        p.dist(q)
    }

    /// Whether vertex `v` is an endpoint of segment `s`.
    pub fn vertex_on_segment_boundary(&self, v: usize, s: usize) -> bool {
        let seg = &self.segments[s];
        seg.a == v || seg.b == v
    }

    /// Whether segments `i` and `j` share an endpoint.
    pub fn segments_adjacent(&self, i: usize, j: usize) -> bool {
        let si = &self.segments[i];
        let sj = &self.segments[j];
        si.a == sj.a || si.a == sj.b || si.b == sj.a || si.b == sj.b
    }

    /// Exhaustive structural validation. An empty result means the PSLG is
    /// well formed: no duplicates, no zero-length segments, and segments meet
    /// only at shared endpoints.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for i in 0..self.vertices.len() {
            for j in (i + 1)..self.vertices.len() {
                if self.vertices[i] == self.vertices[j] {
                    out.push(Violation::DuplicateVertex(i, j));
                }
            }
        }
        for (i, s) in self.segments.iter().enumerate() {
            if s.a >= self.vertices.len() || s.b >= self.vertices.len() {
                out.push(Violation::IndexOutOfRange(i));
            } else if s.a == s.b || self.vertices[s.a] == self.vertices[s.b] {
                out.push(Violation::ZeroLengthSegment(i));
            }
        }
        // Pairwise segment tests skip any segment already known to be broken.
        let ok: Vec<bool> = (0..self.segments.len())
            .map(|i| {
                !out.iter().any(|v| {
                    matches!(v, Violation::IndexOutOfRange(s) | Violation::ZeroLengthSegment(s) if *s == i)
                })
            })
            .collect();
        for i in 0..self.segments.len() {
            if !ok[i] {
                continue;
            }
            for j in (i + 1)..self.segments.len() {
                if !ok[j] {
                    continue;
                }
                if let Some(v) = self.segment_pair_violation(i, j) {
                    out.push(v);
                }
            }
        }
        for v in 0..self.vertices.len() {
            for (s, seg) in self.segments.iter().enumerate() {
                if !ok[s] || seg.a == v || seg.b == v {
                    continue;
                }
                let (p, q) = self.segment_points(s);
                let c = self.vertices[v];
                if orient2d(p, q, c) == 0 && collinear_strictly_between(p, q, c) {
                    out.push(Violation::VertexOnSegment(v, s));
                }
            }
        }
        out
    }

    fn segment_pair_violation(&self, i: usize, j: usize) -> Option<Violation> {
        let si = &self.segments[i];
        let sj = &self.segments[j];
        if (si.a == sj.a && si.b == sj.b) || (si.a == sj.b && si.b == sj.a) {
            return Some(Violation::DuplicateSegment(i, j));
        }
        if self.segments_adjacent(i, j) {
            // Overlap of adjacent segments surfaces as a vertex-on-segment
            // violation; nothing more to test here.
            return None;
        }
        let (a, b) = self.segment_points(i);
        let (c, d) = self.segment_points(j);
        let o1 = orient2d(a, b, c);
        let o2 = orient2d(a, b, d);
        let o3 = orient2d(c, d, a);
        let o4 = orient2d(c, d, b);
        if o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0 {
            return Some(Violation::ProperIntersection(i, j));
        }
        if o1 == 0 && o2 == 0 {
            // Collinear pair: any interior overlap is a touch.
            let (lo1, hi1, lo2, hi2) = if (b.x - a.x).abs() >= (b.y - a.y).abs() {
                (a.x.min(b.x), a.x.max(b.x), c.x.min(d.x), c.x.max(d.x))
            } else {
                (a.y.min(b.y), a.y.max(b.y), c.y.min(d.y), c.y.max(d.y))
            };
            if lo1.max(lo2) < hi1.min(hi2) {
                return Some(Violation::TouchingIntersection(i, j));
            }
            return None;
        }
        let touch = (o1 == 0 && o3 != o4 && collinear_strictly_between(a, b, c))
            || (o2 == 0 && o3 != o4 && collinear_strictly_between(a, b, d))
            || (o3 == 0 && o1 != o2 && collinear_strictly_between(c, d, a))
            || (o4 == 0 && o1 != o2 && collinear_strictly_between(c, d, b));
        if touch {
            return Some(Violation::TouchingIntersection(i, j));
        }
        None
    }

    /// Interior angle between adjacent segments `i` and `j` at their shared
    /// endpoint, in `(0, pi]`. Collinear continuation gives exactly `pi`.
    pub fn angle_between_adjacent(&self, i: usize, j: usize) -> Result<f64, PslgError> {
        if i >= self.segments.len() {
            return Err(PslgError::BadSegment(i));
        }
        if j >= self.segments.len() {
            return Err(PslgError::BadSegment(j));
        }
        if i == j {
            return Err(PslgError::NotAdjacent(i, j));
        }
        let si = &self.segments[i];
        let sj = &self.segments[j];
        let (apex, u1, u2) = if si.a == sj.a {
            (si.a, si.b, sj.b)
        } else if si.a == sj.b {
            (si.a, si.b, sj.a)
        } else if si.b == sj.a {
            (si.b, si.a, sj.b)
        } else if si.b == sj.b {
            (si.b, si.a, sj.a)
        } else {
            return Err(PslgError::NotAdjacent(i, j));
        };
        let v = self.vertices[apex];
        let e1 = self.vertices[u1];
        let e2 = self.vertices[u2];
        let cross = geometry::cross(v, e1, e2).abs();
        let dot = (e1.x - v.x) * (e2.x - v.x) + (e1.y - v.y) * (e2.y - v.y);
        let angle = cross.atan2(dot);
        // Collinear continuation has cross exactly 0 and negative dot.
        Ok(if angle == 0.0 && dot < 0.0 {
            std::f64::consts::PI
        } else {
            angle
        })
    }

    /// All adjacent segment pairs whose angle is at most `acos(1/(2r))`,
    /// the small-angle threshold for subsegment ratio bound `r >= 1`.
    ///
    /// The threshold is inclusive: an angle exactly equal to it is classified
    /// small.
    pub fn classify_small_angles(&self, r: f64) -> Vec<SmallAngleRecord> {
        assert!(r >= 1.0, "subsegment ratio bound must be at least 1");
        let threshold = (1.0 / (2.0 * r)).acos();
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); self.vertices.len()];
        for (s, seg) in self.segments.iter().enumerate() {
            incident[seg.a].push(s);
            incident[seg.b].push(s);
        }
        let mut out = Vec::new();
        for (apex, segs) in incident.iter().enumerate() {
            for (k, &i) in segs.iter().enumerate() {
                for &j in &segs[k + 1..] {
                    let angle = self
                        .angle_between_adjacent(i, j)
                        .expect("incident segments are adjacent");
                    if angle <= threshold {
                        out.push(SmallAngleRecord {
                            apex,
                            segments: (i, j),
                            angle,
                        });
                    }
                }
            }
        }
        out
    }
}

/// Whether collinear point `c` lies strictly between `p` and `q`.
fn collinear_strictly_between(p: Point2, q: Point2, c: Point2) -> bool {
    if (q.x - p.x).abs() >= (q.y - p.y).abs() {
        (p.x < c.x && c.x < q.x) || (q.x < c.x && c.x < p.x)
    } else {
        (p.y < c.y && c.y < q.y) || (q.y < c.y && c.y < p.y)
    }
}

/// Parse a `.poly` file in the Triangle format.
///
/// Layout: a vertex header `N 2 A M`, `N` vertex lines `id x y [attrs] [marker]`,
/// a segment header `S M`, `S` segment lines `id v1 v2 [marker]`, a hole header
/// `H`, and `H` hole lines `id x y`. `#` starts a comment. Vertex ids may be
/// 0- or 1-based; the base is detected from the ids actually present and
/// segment endpoint references are resolved against it.
pub fn parse_poly(text: &str) -> Result<Pslg, ParsePolyError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, raw)| {
            let body = raw.split('#').next().unwrap_or("");
            (n + 1, body.trim())
        })
        .filter(|(_, body)| !body.is_empty());

    let mut next_line = |what: &str| {
        lines
            .next()
            .ok_or_else(|| ParsePolyError {
                line: text.lines().count() + 1,
                message: format!("unexpected end of file, expected {what}"),
            })
    };

    let (hline, header) = next_line("vertex header")?;
    let head = parse_numbers(header, hline, "vertex header")?;
    if head.len() < 2 || head.len() > 4 {
        return Err(err(hline, "vertex header must be `N 2 A M`"));
    }
    let nv = head[0] as usize;
    if head[1] as i64 != 2 {
        return Err(err(hline, "dimension must be 2"));
    }
    let nattr = if head.len() > 2 { head[2] as usize } else { 0 };
    let has_marker = if head.len() > 3 { head[3] as i64 != 0 } else { false };

    let mut ids = Vec::with_capacity(nv);
    let mut vertices = Vec::with_capacity(nv);
    let mut vertex_markers = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, body) = next_line("a vertex line")?;
        let nums = parse_numbers(body, ln, "vertex line")?;
        let want = 3 + nattr + usize::from(has_marker);
        if nums.len() != want {
            return Err(err(ln, &format!("expected {want} fields on vertex line")));
        }
        let id = nums[0] as i64;
        ids.push((id, ln));
        vertices.push(Point2::new(nums[1], nums[2]));
        vertex_markers.push(if has_marker { nums[3 + nattr] as i32 } else { 0 });
    }
    let mut index_of = HashMap::with_capacity(nv);
    for (pos, &(id, ln)) in ids.iter().enumerate() {
        if index_of.insert(id, pos).is_some() {
            return Err(err(ln, &format!("duplicate vertex id {id}")));
        }
    }

    let (sline, sheader) = next_line("segment header")?;
    let shead = parse_numbers(sheader, sline, "segment header")?;
    if shead.is_empty() || shead.len() > 2 {
        return Err(err(sline, "segment header must be `S M`"));
    }
    let ns = shead[0] as usize;
    let seg_marker = if shead.len() > 1 { shead[1] as i64 != 0 } else { false };

    let mut segments = Vec::with_capacity(ns);
    for _ in 0..ns {
        let (ln, body) = next_line("a segment line")?;
        let nums = parse_numbers(body, ln, "segment line")?;
        let want = 3 + usize::from(seg_marker);
        if nums.len() != want {
            return Err(err(ln, &format!("expected {want} fields on segment line")));
        }
        let a = resolve(&index_of, nums[1], ln)?;
        let b = resolve(&index_of, nums[2], ln)?;
        let marker = if seg_marker { nums[3] as i32 } else { 0 };
        segments.push(Segment { a, b, marker });
    }

    let (hl, hheader) = next_line("hole header")?;
    let hhead = parse_numbers(hheader, hl, "hole header")?;
    if hhead.len() != 1 {
        return Err(err(hl, "hole header must be a single count"));
    }
    let nh = hhead[0] as usize;
    let mut holes = Vec::with_capacity(nh);
    for _ in 0..nh {
        let (ln, body) = next_line("a hole line")?;
        let nums = parse_numbers(body, ln, "hole line")?;
        if nums.len() != 3 {
            return Err(err(ln, "expected `id x y` on hole line"));
        }
        holes.push(Point2::new(nums[1], nums[2]));
    }

    Ok(Pslg {
        vertices,
        vertex_markers,
        segments,
        holes,
    })
}

fn resolve(index_of: &HashMap<i64, usize>, id: f64, line: usize) -> Result<usize, ParsePolyError> {
    index_of
        .get(&(id as i64))
        .copied()
        .ok_or_else(|| err(line, &format!("unknown vertex id {}", id as i64)))
}

fn parse_numbers(body: &str, line: usize, what: &str) -> Result<Vec<f64>, ParsePolyError> {
    body.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| err(line, &format!("bad number `{tok}` in {what}")))
        })
        .collect()
}

fn err(line: usize, message: &str) -> ParsePolyError {
    ParsePolyError {
        line,
        message: message.to_string(),
    }
}
