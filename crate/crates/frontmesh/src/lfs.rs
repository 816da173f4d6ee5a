//! Local feature size along PSLG segments.
//!
//! For a point x on an input segment, the feature size is the smaller of the
//! distance to the nearest feature not adjacent to that segment and the
//! distance to the segment's farther endpoint. Restricted to one segment and
//! parameterized by arclength, every contributing distance is either an affine
//! function or the square root of a quadratic, so the feature size is the
//! lower envelope of finitely many such pieces. The envelope is what the
//! splitter integrates; [`lfs_oracle`] is the independent brute-force ground
//! truth used to check it.

use crate::geometry::{dist_point_segment, Point2};
use crate::pslg::Pslg;
use thiserror::Error;

/// One distance contribution along a segment, valid on `[lo, hi]` of the
/// arclength parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceFunction {
    pub lo: f64,
    pub hi: f64,
    pub kind: DistanceKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistanceKind {
    /// Distance to a fixed point at frame coordinates `(a, b)`:
    /// `sqrt((x - a)^2 + b^2)`.
    Point { a: f64, b: f64 },
    /// Distance to a nonadjacent segment across its perpendicular-projection
    /// band: the affine function `c0 + c1 x`.
    Line { c0: f64, c1: f64 },
    /// Distance to the farther of the segment's own endpoints:
    /// `max(l - x, x)`.
    FarthestEndpoint { l: f64 },
}

impl DistanceFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            DistanceKind::Point { a, b } => ((x - a) * (x - a) + b * b).sqrt(),
            DistanceKind::Line { c0, c1 } => c0 + c1 * x,
            DistanceKind::FarthestEndpoint { l } => (l - x).max(x),
        }
    }
}

/// Closed form of one envelope piece.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PieceForm {
    /// `F(x) = b - a x`.
    Linear { a: f64, b: f64 },
    /// `F(x) = sqrt(x^2 + 2 a x + b)`; `d` caches `b - a^2 >= 0`, the squared
    /// perpendicular offset, kept separately to avoid cancellation when the
    /// source point lies close to the segment's line.
    SqrtQuadratic { a: f64, b: f64, d: f64 },
}

impl PieceForm {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            PieceForm::Linear { a, b } => b - a * x,
            PieceForm::SqrtQuadratic { a, d, .. } => {
                let u = x + a;
                (u * u + d).sqrt()
            }
        }
    }
}

/// One piece of the feature size envelope, valid on `[x_lo, x_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopePiece {
    pub x_lo: f64,
    pub x_hi: f64,
    pub form: PieceForm,
}

/// The feature size function of one segment: a contiguous chain of pieces
/// covering `[0, length]`, continuous and strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSizeFunction {
    pub length: f64,
    pub pieces: Vec<EnvelopePiece>,
}

impl FeatureSizeFunction {
    /// Evaluate the envelope at arclength `x` in `[0, length]`.
    pub fn eval(&self, x: f64) -> f64 {
        lfs_eval(self, x)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LfsError {
    /// The feature size vanishes somewhere on the segment: features touch.
    #[error("degenerate input: feature size is not strictly positive on segment")]
    DegenerateInput,
    /// No distance function covers part of the domain (internal misuse; the
    /// farthest-endpoint function always covers a well-formed call).
    #[error("distance functions do not cover the segment")]
    IncompleteCover,
}

/// Distance functions whose lower envelope is the feature size along segment
/// `seg` of `pslg`, in the frame where the segment runs from `(0,0)` to
/// `(l, 0)`.
///
/// Every vertex other than the segment's own endpoints contributes a point
/// distance over the full domain. Every nonadjacent segment contributes a
/// line distance over its perpendicular-projection band clipped to `[0, l]`
/// (outside the band its endpoints' point distances take over). The farthest
/// endpoint function is always present.
pub fn distance_functions_for(pslg: &Pslg, seg: usize) -> Vec<DistanceFunction> {
    let s = &pslg.segments[seg];
    let (p, q) = pslg.segment_points(seg);
    let l = p.dist(q);
    let ux = (q.x - p.x) / l;
    let uy = (q.y - p.y) / l;
    // Frame coordinates: along = (v-p).u, across = (v-p).n with n = perp(u).
    let frame = |v: Point2| -> (f64, f64) {
        let dx = v.x - p.x;
        let dy = v.y - p.y;
        (dx * ux + dy * uy, -dx * uy + dy * ux)
    };

    let mut out = Vec::new();
    for (vi, &v) in pslg.vertices.iter().enumerate() {
        if vi == s.a || vi == s.b {
            continue;
        }
        let (a, b) = frame(v);
        out.push(DistanceFunction {
            lo: 0.0,
            hi: l,
            kind: DistanceKind::Point { a, b: b.abs() },
        });
    }
    for (sj, _) in pslg.segments.iter().enumerate() {
        if sj == seg || pslg.segments_adjacent(seg, sj) {
            continue;
        }
        let (c, d) = pslg.segment_points(sj);
        let (cx, cy) = frame(c);
        let (dx, dy) = frame(d);
        let ex = dx - cx;
        let ey = dy - cy;
        let len2 = ex * ex + ey * ey;
        // The foot of (x, 0) on the line through (c, d) has the affine
        // parameter s(x) = ((x - cx) ex - cy ey) / len2; the band is where s
        // lies in [0, 1]. For a perpendicular feature s is constant and the
        // host projects either entirely into the feature or not at all.
        let s0 = (-cx * ex - cy * ey) / len2;
        let s1 = ((l - cx) * ex - cy * ey) / len2;
        let (lo, hi) = if s0 == s1 {
            if !(0.0..=1.0).contains(&s0) {
                continue;
            }
            (0.0, l)
        } else {
            let xa = l * (0.0 - s0) / (s1 - s0);
            let xb = l * (1.0 - s0) / (s1 - s0);
            (xa.min(xb).max(0.0), xa.max(xb).min(l))
        };
        if hi - lo <= 1e-15 * l.max(1.0) {
            continue;
        }
        // Distance from (x, 0) to the line through (c, d) is |A + B x| / |e|;
        // on a valid PSLG it keeps one sign across the band.
        let len = len2.sqrt();
        let a0 = (cx * ey - cy * ex) / len;
        let b0 = -ey / len;
        let sign = if a0 + b0 * 0.5 * (lo + hi) >= 0.0 { 1.0 } else { -1.0 };
        out.push(DistanceFunction {
            lo,
            hi,
            kind: DistanceKind::Line {
                c0: sign * a0,
                c1: sign * b0,
            },
        });
    }
    out.push(DistanceFunction {
        lo: 0.0,
        hi: l,
        kind: DistanceKind::FarthestEndpoint { l },
    });
    out
}

/// A candidate piece during envelope construction.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    lo: f64,
    hi: f64,
    form: PieceForm,
}

fn candidates(funcs: &[DistanceFunction], l: f64) -> Vec<Candidate> {
    let mut out = Vec::new();
    for f in funcs {
        let lo = f.lo.max(0.0);
        let hi = f.hi.min(l);
        if hi <= lo {
            continue;
        }
        match f.kind {
            DistanceKind::Point { a, b } => out.push(Candidate {
                lo,
                hi,
                form: PieceForm::SqrtQuadratic {
                    a: -a,
                    b: a * a + b * b,
                    d: b * b,
                },
            }),
            DistanceKind::Line { c0, c1 } => out.push(Candidate {
                lo,
                hi,
                form: PieceForm::Linear { a: -c1, b: c0 },
            }),
            DistanceKind::FarthestEndpoint { l: fl } => {
                let mid = 0.5 * fl;
                out.push(Candidate {
                    lo: lo.min(mid),
                    hi: hi.min(mid),
                    form: PieceForm::Linear { a: 1.0, b: fl },
                });
                out.push(Candidate {
                    lo: lo.max(mid),
                    hi: hi.max(mid),
                    form: PieceForm::Linear { a: -1.0, b: 0.0 },
                });
            }
        }
    }
    out.retain(|c| c.hi > c.lo);
    out
}

/// Real roots of `f1(x) = f2(x)` for the closed piece forms, unpolished.
fn crossing_roots(f1: PieceForm, f2: PieceForm) -> Vec<f64> {
    match (f1, f2) {
        (PieceForm::Linear { a: a1, b: b1 }, PieceForm::Linear { a: a2, b: b2 }) => {
            if (a1 - a2).abs() < 1e-300 {
                vec![]
            } else {
                vec![(b1 - b2) / (a1 - a2)]
            }
        }
        (PieceForm::SqrtQuadratic { a: a1, b: b1, .. }, PieceForm::SqrtQuadratic { a: a2, b: b2, .. }) => {
            if (a1 - a2).abs() < 1e-300 {
                vec![]
            } else {
                vec![(b2 - b1) / (2.0 * (a1 - a2))]
            }
        }
        (PieceForm::Linear { a: la, b: lb }, PieceForm::SqrtQuadratic { a, b, .. })
        | (PieceForm::SqrtQuadratic { a, b, .. }, PieceForm::Linear { a: la, b: lb }) => {
            // (lb - la x)^2 = x^2 + 2 a x + b, restricted to lb - la x >= 0.
            let qa = la * la - 1.0;
            let qb = -2.0 * (la * lb + a);
            let qc = lb * lb - b;
            let mut roots = quadratic_roots(qa, qb, qc);
            roots.retain(|&x| lb - la * x >= 0.0);
            roots
        }
    }
}

/// Real roots of `qa x^2 + qb x + qc = 0`, in a cancellation-stable form.
fn quadratic_roots(qa: f64, qb: f64, qc: f64) -> Vec<f64> {
    if qa.abs() < 1e-300 {
        if qb.abs() < 1e-300 {
            return vec![];
        }
        return vec![-qc / qb];
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return vec![];
    }
    let sq = disc.sqrt();
    let q = -0.5 * (qb + qb.signum() * sq);
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / qa, qc / q]
}

/// Sharpen a crossing root by bisection on `f1 - f2` near `x0`.
fn polish_root(f1: PieceForm, f2: PieceForm, x0: f64, lo: f64, hi: f64, scale: f64) -> f64 {
    let g = |x: f64| f1.eval(x) - f2.eval(x);
    let mut h = 1e-9 * scale.max(1.0);
    let (mut a, mut b) = (x0, x0);
    // Grow a bracket around the closed-form root; give up on tangency.
    for _ in 0..24 {
        a = (x0 - h).max(lo);
        b = (x0 + h).min(hi);
        if g(a) == 0.0 {
            return a;
        }
        if g(b) == 0.0 {
            return b;
        }
        if g(a).signum() != g(b).signum() {
            break;
        }
        h *= 4.0;
        if a <= lo && b >= hi {
            return x0;
        }
    }
    if g(a).signum() == g(b).signum() {
        return x0;
    }
    let tol = 1e-13 * scale.max(1.0);
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        let gm = g(m);
        if gm == 0.0 || b - a < tol {
            return m;
        }
        if gm.signum() == g(a).signum() {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Lower envelope of the distance functions over `[0, l]`.
///
/// Breakpoints are the candidate domain limits plus every pairwise crossing
/// root (closed form, then bisection-polished). Between consecutive
/// breakpoints the minimizing candidate cannot change, so it is found by one
/// evaluation at the interval midpoint. Returns a degenerate-input error if
/// the envelope is not strictly positive.
pub fn lower_envelope(funcs: &[DistanceFunction], l: f64) -> Result<FeatureSizeFunction, LfsError> {
    let cands = candidates(funcs, l);
    if cands.is_empty() {
        return Err(LfsError::IncompleteCover);
    }
    let mut cuts = vec![0.0, l];
    for c in &cands {
        cuts.push(c.lo);
        cuts.push(c.hi);
    }
    for i in 0..cands.len() {
        for j in (i + 1)..cands.len() {
            let lo = cands[i].lo.max(cands[j].lo);
            let hi = cands[i].hi.min(cands[j].hi);
            if hi <= lo {
                continue;
            }
            for r in crossing_roots(cands[i].form, cands[j].form) {
                if r.is_finite() && r > lo && r < hi {
                    cuts.push(polish_root(cands[i].form, cands[j].form, r, lo, hi, l));
                }
            }
        }
    }
    cuts.retain(|x| x.is_finite() && *x >= 0.0 && *x <= l);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * l.max(1.0));

    let covers = |c: &Candidate, x: f64| -> bool {
        let pad = 1e-12 * l.max(1.0);
        c.lo - pad <= x && x <= c.hi + pad
    };
    let mut pieces: Vec<(usize, EnvelopePiece)> = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= 1e-14 * l.max(1.0) {
            continue;
        }
        let mid = 0.5 * (a + b);
        let mut best: Option<(usize, f64)> = None;
        for (ci, c) in cands.iter().enumerate() {
            if !covers(c, mid) {
                continue;
            }
            let v = c.form.eval(mid);
            if best.is_none_or(|(_, bv)| v < bv) {
                best = Some((ci, v));
            }
        }
        let (ci, _) = best.ok_or(LfsError::IncompleteCover)?;
        match pieces.last_mut() {
            Some((prev, piece)) if *prev == ci => piece.x_hi = b,
            _ => pieces.push((
                ci,
                EnvelopePiece {
                    x_lo: a,
                    x_hi: b,
                    form: cands[ci].form,
                },
            )),
        }
    }
    let mut pieces: Vec<EnvelopePiece> = pieces.into_iter().map(|(_, p)| p).collect();
    if let Some(first) = pieces.first_mut() {
        first.x_lo = 0.0;
    }
    if let Some(last) = pieces.last_mut() {
        last.x_hi = l;
    }
    for p in &pieces {
        let vals = [p.form.eval(p.x_lo), p.form.eval(0.5 * (p.x_lo + p.x_hi)), p.form.eval(p.x_hi)];
        if vals.iter().any(|v| !(*v > 0.0)) {
            return Err(LfsError::DegenerateInput);
        }
    }
    Ok(FeatureSizeFunction { length: l, pieces })
}

/// Build the feature size envelope of segment `seg`.
pub fn feature_size_for(pslg: &Pslg, seg: usize) -> Result<FeatureSizeFunction, LfsError> {
    let funcs = distance_functions_for(pslg, seg);
    lower_envelope(&funcs, pslg.segment_length(seg))
}

/// Evaluate the envelope at arclength `x` in `[0, length]`.
pub fn lfs_eval(fsf: &FeatureSizeFunction, x: f64) -> f64 {
    debug_assert!(
        (-1e-9..=fsf.length * (1.0 + 1e-9) + 1e-9).contains(&x),
        "arclength {x} outside [0, {}]",
        fsf.length
    );
    let i = fsf
        .pieces
        .partition_point(|p| p.x_hi < x)
        .min(fsf.pieces.len() - 1);
    fsf.pieces[i].form.eval(x)
}

/// Brute-force local feature size of `pslg` at an arbitrary point `p`.
///
/// For a point on a segment this is the on-segment specialization: the
/// distance to the nearest feature not adjacent to that segment, capped by
/// the distance to the segment's farther endpoint. Elsewhere it is the
/// radius of the smallest circle centered at `p` meeting two mutually
/// nonadjacent features, enumerated over all feature pairs. Vertices count as
/// adjacent only to the segments they bound; two vertices are never adjacent.
pub fn lfs_oracle(pslg: &Pslg, p: Point2) -> f64 {
    let nseg = pslg.segments.len();
    let seg_dist: Vec<f64> = (0..nseg)
        .map(|s| {
            let (a, b) = pslg.segment_points(s);
            dist_point_segment(p, a, b)
        })
        .collect();
    let on: Vec<usize> = (0..nseg)
        .filter(|&s| seg_dist[s] <= 1e-9 * pslg.segment_length(s))
        .collect();

    if !on.is_empty() {
        let mut best = f64::INFINITY;
        for &s in &on {
            let seg = &pslg.segments[s];
            let mut nearest = f64::INFINITY;
            for (vi, &v) in pslg.vertices.iter().enumerate() {
                if vi != seg.a && vi != seg.b {
                    nearest = nearest.min(p.dist(v));
                }
            }
            for t in 0..nseg {
                if t != s && !pslg.segments_adjacent(s, t) {
                    nearest = nearest.min(seg_dist[t]);
                }
            }
            let farther = p.dist(pslg.vertices[seg.a]).max(p.dist(pslg.vertices[seg.b]));
            best = best.min(nearest.min(farther));
        }
        return best;
    }

    let vdist: Vec<f64> = pslg.vertices.iter().map(|&v| p.dist(v)).collect();
    let mut best = f64::INFINITY;
    for i in 0..pslg.vertices.len() {
        for j in (i + 1)..pslg.vertices.len() {
            best = best.min(vdist[i].max(vdist[j]));
        }
    }
    for (vi, _) in pslg.vertices.iter().enumerate() {
        for s in 0..nseg {
            if !pslg.vertex_on_segment_boundary(vi, s) {
                best = best.min(vdist[vi].max(seg_dist[s]));
            }
        }
    }
    for s in 0..nseg {
        for t in (s + 1)..nseg {
            if !pslg.segments_adjacent(s, t) {
                best = best.min(seg_dist[s].max(seg_dist[t]));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pslg::Segment;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn seg(a: usize, b: usize) -> Segment {
        Segment { a, b, marker: 0 }
    }

    fn unit_square() -> Pslg {
        Pslg::new(
            vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)],
            vec![seg(0, 1), seg(1, 2), seg(2, 3), seg(3, 0)],
            vec![],
        )
    }

    fn isolated_segment() -> Pslg {
        Pslg::new(vec![p(0.0, 0.0), p(1.0, 0.0)], vec![seg(0, 1)], vec![])
    }

    #[test]
    fn functions_for_square_bottom() {
        // Bottom side: point distances to the two top corners, a line distance
        // to the top side, and the farthest-endpoint function.
        let funcs = distance_functions_for(&unit_square(), 0);
        assert_eq!(funcs.len(), 4);
        let points: Vec<_> = funcs
            .iter()
            .filter_map(|f| match f.kind {
                DistanceKind::Point { a, b } => Some((a, b)),
                _ => None,
            })
            .collect();
        assert_eq!(points.len(), 2);
        assert!(points.contains(&(0.0, 1.0)));
        assert!(points.contains(&(1.0, 1.0)));
        let lines: Vec<_> = funcs
            .iter()
            .filter_map(|f| match f.kind {
                DistanceKind::Line { c0, c1 } => Some((f.lo, f.hi, c0, c1)),
                _ => None,
            })
            .collect();
        assert_eq!(lines.len(), 1);
        let (lo, hi, c0, c1) = lines[0];
        assert!((lo - 0.0).abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
        assert!((c0 - 1.0).abs() < 1e-15 && c1.abs() < 1e-15);
    }

    #[test]
    fn functions_for_segment_with_lone_vertex() {
        let pslg = Pslg::new(
            vec![p(0.0, 0.0), p(1.0, 0.0), p(0.3, 0.2)],
            vec![seg(0, 1)],
            vec![],
        );
        let funcs = distance_functions_for(&pslg, 0);
        assert_eq!(funcs.len(), 2);
        assert_eq!(
            funcs[0].kind,
            DistanceKind::Point { a: 0.3, b: 0.2 }
        );
        assert_eq!(funcs[1].kind, DistanceKind::FarthestEndpoint { l: 1.0 });
    }

    #[test]
    fn envelope_isolated_segment() {
        let fsf = feature_size_for(&isolated_segment(), 0).unwrap();
        assert_eq!(fsf.pieces.len(), 2);
        assert_eq!(fsf.pieces[0].form, PieceForm::Linear { a: 1.0, b: 1.0 });
        assert_eq!(fsf.pieces[1].form, PieceForm::Linear { a: -1.0, b: 0.0 });
        assert!((fsf.pieces[0].x_hi - 0.5).abs() < 1e-12);
        assert!((fsf.eval(0.3) - 0.7).abs() < 1e-12);
        assert!((fsf.eval(0.5) - 0.5).abs() < 1e-12);
        assert!((fsf.eval(1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn envelope_square_bottom() {
        let fsf = feature_size_for(&unit_square(), 0).unwrap();
        assert!((fsf.eval(0.25) - 0.75).abs() < 1e-12);
        assert!((fsf.eval(0.5) - 0.5).abs() < 1e-12);
        assert!((fsf.eval(0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn envelope_close_parallel_segments() {
        // Second segment 0.1 above: the line distance dominates everywhere.
        let pslg = Pslg::new(
            vec![p(0.0, 0.0), p(1.0, 0.0), p(0.0, 0.1), p(1.0, 0.1)],
            vec![seg(0, 1), seg(2, 3)],
            vec![],
        );
        let fsf = feature_size_for(&pslg, 0).unwrap();
        for &x in &[0.0, 0.2, 0.5, 0.9, 1.0] {
            assert!((fsf.eval(x) - 0.1).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn envelope_is_continuous_and_positive() {
        let pslg = unit_square();
        for s in 0..pslg.segments.len() {
            let fsf = feature_size_for(&pslg, s).unwrap();
            assert!((fsf.pieces[0].x_lo).abs() < 1e-15);
            assert!((fsf.pieces.last().unwrap().x_hi - fsf.length).abs() < 1e-15);
            for w in fsf.pieces.windows(2) {
                assert!((w[0].x_hi - w[1].x_lo).abs() < 1e-15);
                let a = w[0].form.eval(w[0].x_hi);
                let b = w[1].form.eval(w[1].x_lo);
                assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "jump {a} vs {b}");
            }
            for i in 0..=100 {
                let x = fsf.length * i as f64 / 100.0;
                assert!(fsf.eval(x) > 0.0);
            }
        }
    }

    #[test]
    fn oracle_square_center_and_midside() {
        let sq = unit_square();
        assert!((lfs_oracle(&sq, p(0.5, 0.5)) - 0.5).abs() < 1e-12);
        // On the bottom side: capped by farther endpoint at the quarter point.
        assert!((lfs_oracle(&sq, p(0.25, 0.0)) - 0.75).abs() < 1e-12);
        assert!((lfs_oracle(&sq, p(0.5, 0.0)) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn oracle_isolated_segment_midpoint() {
        let pslg = isolated_segment();
        assert!((lfs_oracle(&pslg, p(0.5, 0.0)) - 0.5).abs() < 1e-12);
        assert!((lfs_oracle(&pslg, p(0.9, 0.0)) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn oracle_wedge_apex_uses_far_features() {
        let phi = 20.0_f64.to_radians();
        let pslg = Pslg::new(
            vec![p(0.0, 0.0), p(1.0, 0.0), p(phi.cos(), phi.sin())],
            vec![seg(0, 1), seg(0, 2)],
            vec![],
        );
        // At the apex both arms are adjacent features; the nearest admissible
        // features are the far endpoints at distance 1.
        assert!((lfs_oracle(&pslg, p(0.0, 0.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn envelope_matches_oracle_on_square_and_wedge() {
        let phi = 20.0_f64.to_radians();
        let wedge = Pslg::new(
            vec![p(0.0, 0.0), p(1.0, 0.0), p(phi.cos(), phi.sin())],
            vec![seg(0, 1), seg(0, 2)],
            vec![],
        );
        for pslg in [unit_square(), wedge] {
            for s in 0..pslg.segments.len() {
                let fsf = feature_size_for(&pslg, s).unwrap();
                let (a, b) = pslg.segment_points(s);
                let l = fsf.length;
                for i in 0..=1000 {
                    let x = l * i as f64 / 1000.0;
                    let t = x / l;
                    let pt = p(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
                    let env = fsf.eval(x);
                    let ora = lfs_oracle(&pslg, pt);
                    assert!(
                        (env - ora).abs() <= 1e-9 * ora.abs().max(1.0),
                        "seg {s} x {x}: env {env} oracle {ora}"
                    );
                }
            }
        }
    }

    #[test]
    fn envelope_scales_with_input() {
        // Scaling coordinates by s scales the envelope values by s at the
        // scaled arclength.
        let base = unit_square();
        for scale in [0.01, 3.0, 17.5] {
            let scaled = Pslg::new(
                base.vertices.iter().map(|v| p(v.x * scale, v.y * scale)).collect(),
                base.segments.clone(),
                vec![],
            );
            let f0 = feature_size_for(&base, 0).unwrap();
            let f1 = feature_size_for(&scaled, 0).unwrap();
            for i in 0..=50 {
                let x = i as f64 / 50.0;
                let a = f0.eval(x) * scale;
                let b = f1.eval(x * scale);
                assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-12), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn vertex_exactly_on_segment_is_degenerate() {
        // A lone vertex sitting on the segment interior drives the feature
        // size to zero there.
        let pslg = Pslg::new(
            vec![p(0.0, 0.0), p(1.0, 0.0), p(0.5, 0.0)],
            vec![seg(0, 1)],
            vec![],
        );
        assert_eq!(feature_size_for(&pslg, 0), Err(LfsError::DegenerateInput));
    }
}
