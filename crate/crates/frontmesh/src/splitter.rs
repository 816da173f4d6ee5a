//! Feature-size driven segment splitting.
//!
//! Splitting a segment so that every subsegment is proportional to the local
//! feature size amounts to solving the autonomous ODE `M'(t) = F(M(t))` with
//! `M(0) = 0`, where `F` is the segment's feature size envelope: equal steps
//! in `t` then map to subsegments whose lengths track `F`. Because every
//! envelope piece is affine or the square root of a quadratic, the solution is
//! assembled from closed forms piece by piece. The value `t*` at which the
//! mapping reaches the far endpoint is the segment's reference length; the
//! shortest one, `t*_min`, calibrates how many subsegments every segment gets,
//! and with it the provable lower and upper bounds `A*`, `B*` on the ratio of
//! feature size to subsegment length at every split vertex.

use crate::geometry::Point2;
use crate::lfs::{EnvelopePiece, FeatureSizeFunction, PieceForm};
use crate::pslg::Pslg;
use crate::{Mode, VertexOrigin};
use thiserror::Error;

/// Half of `1 / sin` at the reference split of an isolated segment: the
/// reference length of any segment is at least `2 ln 2`.
pub const T_STAR_ISOLATED: f64 = 2.0 * std::f64::consts::LN_2;

/// Closed form of one mapping piece, in the local time `tau = t - t_lo`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MappingForm {
    /// Solution of `y' = b - a y`, `|a| > 0`: `y = b/a + c e^(-a tau)`.
    Exponential { a: f64, b: f64, c: f64 },
    /// Solution of `y' = b` for an effectively constant envelope piece:
    /// `y = b tau + c`.
    Affine { b: f64, c: f64 },
    /// Solution of `y' = sqrt(y^2 + 2 a y + b)`, equivalently `y'' = y + a`:
    /// `y = c1 e^tau + c2 e^(-tau) - a`.
    Hyperbolic { a: f64, c1: f64, c2: f64 },
}

/// One piece of the mapping, covering `t` in `[t_lo, t_hi]` and carrying
/// `y` from `x_lo` to `x_hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappingPiece {
    pub t_lo: f64,
    pub t_hi: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    pub form: MappingForm,
}

impl MappingPiece {
    /// Mapping value at local time `tau` in `[0, t_hi - t_lo]`.
    pub fn eval(&self, tau: f64) -> f64 {
        match self.form {
            MappingForm::Exponential { a, b, .. } => {
                // b/a + c e^(-a tau) rewritten through expm1 so that small
                // |a| keeps full precision: y = x_lo + F(x_lo) (1 - e^(-a tau)) / a.
                let f_lo = b - a * self.x_lo;
                self.x_lo + f_lo * (-f64::exp_m1(-a * tau)) / a
            }
            MappingForm::Affine { b, c } => c + b * tau,
            MappingForm::Hyperbolic { a, c1, c2 } => c1 * tau.exp() + c2 * (-tau).exp() - a,
        }
    }

    /// Mapping derivative at local time `tau`.
    pub fn deriv(&self, tau: f64) -> f64 {
        match self.form {
            MappingForm::Exponential { a, b, .. } => {
                let f_lo = b - a * self.x_lo;
                f_lo * (-a * tau).exp()
            }
            MappingForm::Affine { b, .. } => b,
            MappingForm::Hyperbolic { c1, c2, .. } => c1 * tau.exp() - c2 * (-tau).exp(),
        }
    }
}

/// The solved mapping of one segment: `M(0) = 0`, `M(t_star) = length`,
/// strictly increasing, one closed-form piece per envelope piece.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingFunction {
    pub length: f64,
    pub t_star: f64,
    pub pieces: Vec<MappingPiece>,
}

impl MappingFunction {
    /// Evaluate `M(t)` for `t` in `[0, t_star]`.
    pub fn eval(&self, t: f64) -> f64 {
        let i = self
            .pieces
            .partition_point(|p| p.t_hi < t)
            .min(self.pieces.len() - 1);
        let p = &self.pieces[i];
        if t >= p.t_hi {
            return p.x_hi;
        }
        p.eval(t - p.t_lo)
    }

    /// Evaluate `M'(t)` for `t` in `[0, t_star]`.
    pub fn deriv(&self, t: f64) -> f64 {
        let i = self
            .pieces
            .partition_point(|p| p.t_hi < t)
            .min(self.pieces.len() - 1);
        let p = &self.pieces[i];
        p.deriv((t - p.t_lo).min(p.t_hi - p.t_lo))
    }
}

/// Ratio bounds realized by a split with `n_star` subsegments on the shortest
/// reference length `t_min`: at every split vertex the feature size divided by
/// an adjacent subsegment length lies in `[a_star, b_star]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitBounds {
    pub n_star: u32,
    pub t_min: f64,
    pub a_star: f64,
    pub b_star: f64,
    /// Adjacent subsegment length ratio bound `b_star / a_star`.
    pub r: f64,
}

/// The split of one segment: `n` subsegments, interior parameter values and
/// the arclength positions they map to.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSplit {
    pub n: u32,
    pub t_star: f64,
    /// Interior parameter values `j t_star / n`, `j = 1 .. n-1`.
    pub ts: Vec<f64>,
    /// Interior arclength positions `M(ts[j])`, strictly increasing.
    pub xs: Vec<f64>,
}

/// The full split plan with the bounds it realizes.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPlan {
    pub bounds: SplitBounds,
    pub segments: Vec<SegmentSplit>,
}

/// A subsegment of the refined PSLG, tracking its source input segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubSegment {
    pub a: usize,
    pub b: usize,
    pub marker: i32,
    pub source: usize,
}

/// The refined PSLG produced by splitting: all input vertices first, split
/// vertices appended, segments replaced by subsegment chains.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedPslg {
    pub vertices: Vec<Point2>,
    pub markers: Vec<i32>,
    pub origins: Vec<VertexOrigin>,
    /// Input segments through each vertex (empty for vertices on none).
    pub sources: Vec<Vec<usize>>,
    /// Feature size at each vertex, cached from the envelope at split time;
    /// infinity for vertices on no segment.
    pub lfs: Vec<f64>,
    pub subsegments: Vec<SubSegment>,
    pub holes: Vec<Point2>,
    /// Per input segment, the vertex chain from its first to second endpoint.
    pub chains: Vec<Vec<usize>>,
}

#[derive(Debug, Error, PartialEq)]
pub enum SplitError {
    #[error("feature size envelope is not strictly positive")]
    DegenerateEnvelope,
    #[error("mapping solve failed on piece {0}: non-monotone or non-finite")]
    BadPiece(usize),
    #[error("split bounds infeasible: A* = {0} is not positive")]
    InfeasibleBounds(f64),
    #[error("minimum angle target must lie strictly between 0 and 30 degrees")]
    BadAngleTarget,
    #[error("split positions are not strictly increasing on segment {0}")]
    NonMonotone(usize),
}

/// Solve `M'(t) = F(M(t))`, `M(0) = 0`, across all envelope pieces.
///
/// Each envelope piece yields one closed-form mapping piece; the time to
/// traverse a piece is inverted in closed form (with `ln_1p`/`expm1`
/// formulations where naive evaluation would cancel) and checked against the
/// piece end, falling back to bisection on the monotone closed form if the
/// inversion drifted.
pub fn solve_mapping(fsf: &FeatureSizeFunction) -> Result<MappingFunction, SplitError> {
    let mut pieces = Vec::with_capacity(fsf.pieces.len());
    let mut t = 0.0_f64;
    for (idx, ep) in fsf.pieces.iter().enumerate() {
        let w = ep.x_hi - ep.x_lo;
        if w <= 0.0 {
            continue;
        }
        let f_lo = ep.form.eval(ep.x_lo);
        let f_hi = ep.form.eval(ep.x_hi);
        if !(f_lo > 0.0) || !(f_hi > 0.0) {
            return Err(SplitError::DegenerateEnvelope);
        }
        let (form, mut dt) = match ep.form {
            PieceForm::Linear { a, b } => {
                if a.abs() <= 1e-12 {
                    (MappingForm::Affine { b: f_lo, c: ep.x_lo }, w / f_lo)
                } else {
                    let c = ep.x_lo - b / a;
                    // e^(-a dt) = F(x_hi) / F(x_lo); via ln_1p of the exact
                    // difference -a w / F(x_lo).
                    let dt = -f64::ln_1p(-a * w / f_lo) / a;
                    (MappingForm::Exponential { a, b, c }, dt)
                }
            }
            PieceForm::SqrtQuadratic { a, d, .. } => {
                let s_lo = ep.x_lo + a;
                let s_hi = ep.x_hi + a;
                // c1 = (s + F)/2 and c2 = (s - F)/2 with the cancelling branch
                // rewritten through d = F^2 - s^2.
                let c1 = if s_lo >= 0.0 { 0.5 * (s_lo + f_lo) } else { 0.5 * d / (f_lo - s_lo) };
                let c2 = if s_lo <= 0.0 { 0.5 * (s_lo - f_lo) } else { -0.5 * d / (f_lo + s_lo) };
                let dt = if c1 == 0.0 {
                    // Pure decaying branch: e^(-dt) = (x_hi + a) / c2.
                    -((s_hi) / c2).ln()
                } else {
                    let num = if s_hi >= 0.0 { s_hi + f_hi } else { d / (f_hi - s_hi) };
                    (num / (2.0 * c1)).ln()
                };
                (MappingForm::Hyperbolic { a, c1, c2 }, dt)
            }
        };
        if !dt.is_finite() || dt <= 0.0 {
            return Err(SplitError::BadPiece(idx));
        }
        let mut piece = MappingPiece {
            t_lo: t,
            t_hi: t + dt,
            x_lo: ep.x_lo,
            x_hi: ep.x_hi,
            form,
        };
        // Guarded bisection: the closed-form inversion should land on x_hi to
        // roundoff; if not, refine dt on the monotone piece.
        let err = (piece.eval(dt) - ep.x_hi).abs();
        if err > 1e-12 * fsf.length.max(1.0) {
            dt = bisect_dt(&piece, ep, dt, fsf.length);
            piece.t_hi = t + dt;
        }
        t = piece.t_hi;
        pieces.push(piece);
    }
    if pieces.is_empty() {
        return Err(SplitError::DegenerateEnvelope);
    }
    Ok(MappingFunction {
        length: fsf.length,
        t_star: t,
        pieces,
    })
}

fn bisect_dt(piece: &MappingPiece, ep: &EnvelopePiece, dt0: f64, scale: f64) -> f64 {
    let g = |tau: f64| piece.eval(tau) - ep.x_hi;
    let mut lo = 0.0_f64;
    let mut hi = dt0.max(1e-300);
    for _ in 0..200 {
        if g(hi) >= 0.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..100 {
        let m = 0.5 * (lo + hi);
        if g(m) < 0.0 {
            lo = m;
        } else {
            hi = m;
        }
        if hi - lo <= 1e-15 * hi.max(1e-15) || (piece.eval(hi) - piece.eval(lo)).abs() <= 1e-15 * scale {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Reference length `t*` of a solved mapping.
pub fn reference_length(mapping: &MappingFunction) -> f64 {
    mapping.t_star
}

/// Ratio bounds realized by cutting the calibrating segment into `n_star`
/// parts: `A* = n*/t*_min - 1/(2 ln 2) - 1` and `B* = n*/t*_min + 1`.
pub fn bounds_for(n_star: u32, t_min: f64) -> Result<SplitBounds, SplitError> {
    let nt = n_star as f64 / t_min;
    let a_star = nt - 1.0 / (2.0 * std::f64::consts::LN_2) - 1.0;
    let b_star = nt + 1.0;
    if !(a_star > 0.0) {
        return Err(SplitError::InfeasibleBounds(a_star));
    }
    Ok(SplitBounds {
        n_star,
        t_min,
        a_star,
        b_star,
        r: b_star / a_star,
    })
}

/// Margin added to strict inequalities before solving them for `A*`.
const STRICT_MARGIN: f64 = 1e-9;

/// Smallest `A*` for which refinement with minimum-angle target `theta_star`
/// (radians, strictly between 0 and 30 degrees) is guaranteed to terminate
/// without encroachment in the given mode.
///
/// Uses the worst-case relation `B* <= A* + 1/ln 2 + 2` to reduce the
/// mode's encroachment conditions to linear inequalities in `A*`:
/// in truly mode `(B* + alpha/(alpha-1) + 2) / A* <= sqrt 2` together with
/// `A* > 1/sqrt 2`; in constrained mode the same left side bounded by
/// `2 cos theta_star`, plus `(A* - 1/sqrt 2)/(B* + alpha/(alpha-1) + 1) >
/// 1/(2 cos theta_star)`.
pub fn required_astar(theta_star: f64, mode: Mode) -> f64 {
    assert!(
        theta_star > 0.0 && theta_star < 30.0_f64.to_radians(),
        "angle target out of range"
    );
    let alpha = 1.0 / (2.0 * theta_star.sin());
    let k = 1.0 / std::f64::consts::LN_2 + 2.0;
    let gain = alpha / (alpha - 1.0);
    let lemma6 = std::f64::consts::FRAC_1_SQRT_2 + STRICT_MARGIN;
    match mode {
        Mode::Truly => {
            let main = (k + gain + 2.0) / (std::f64::consts::SQRT_2 - 1.0);
            main.max(lemma6)
        }
        Mode::Constrained => {
            let two_cos = 2.0 * theta_star.cos();
            let visibility = (k + gain + 2.0) / (two_cos - 1.0);
            let separation = (std::f64::consts::FRAC_1_SQRT_2 + (k + gain + 1.0) / two_cos)
                / (1.0 - 1.0 / two_cos)
                + STRICT_MARGIN;
            visibility.max(separation).max(lemma6)
        }
    }
}

/// Smallest `n* >= 2` whose realized `A*` meets `required_astar` for the
/// angle target and mode, given the shortest reference length.
pub fn choose_nstar(theta_star: f64, mode: Mode, t_min: f64) -> Result<SplitBounds, SplitError> {
    if !(theta_star > 0.0 && theta_star < 30.0_f64.to_radians()) {
        return Err(SplitError::BadAngleTarget);
    }
    let required = required_astar(theta_star, mode);
    let guess = ((required + 1.0 / (2.0 * std::f64::consts::LN_2) + 1.0) * t_min).ceil();
    let mut n = (guess as u32).saturating_sub(2).max(2);
    loop {
        match bounds_for(n, t_min) {
            Ok(b) if b.a_star >= required => return Ok(b),
            _ => n += 1,
        }
    }
}

/// Split every segment of `pslg` into `n_i = floor(n* t*_i / t*_min)`
/// subsegments at equal parameter steps of its mapping.
///
/// Split vertices inherit the segment marker; every refined vertex caches the
/// envelope value at its position so refinement never re-derives feature
/// sizes.
pub fn split(
    pslg: &Pslg,
    envelopes: &[FeatureSizeFunction],
    mappings: &[MappingFunction],
    bounds: SplitBounds,
) -> Result<(RefinedPslg, SplitPlan), SplitError> {
    assert_eq!(pslg.segments.len(), mappings.len());
    assert_eq!(pslg.segments.len(), envelopes.len());
    let nv = pslg.vertices.len();
    let mut refined = RefinedPslg {
        vertices: pslg.vertices.clone(),
        markers: pslg.vertex_markers.clone(),
        origins: vec![VertexOrigin::Input; nv],
        sources: vec![Vec::new(); nv],
        lfs: vec![f64::INFINITY; nv],
        subsegments: Vec::new(),
        holes: pslg.holes.clone(),
        chains: Vec::with_capacity(pslg.segments.len()),
    };
    let mut plan = SplitPlan {
        bounds,
        segments: Vec::with_capacity(pslg.segments.len()),
    };
    for (si, seg) in pslg.segments.iter().enumerate() {
        refined.sources[seg.a].push(si);
        refined.sources[seg.b].push(si);
        refined.lfs[seg.a] = refined.lfs[seg.a].min(envelopes[si].eval(0.0));
        refined.lfs[seg.b] = refined.lfs[seg.b].min(envelopes[si].eval(envelopes[si].length));
    }
    for (si, seg) in pslg.segments.iter().enumerate() {
        let m = &mappings[si];
        let t_star = m.t_star;
        let n = ((bounds.n_star as f64 * t_star / bounds.t_min) + 1e-9).floor() as u32;
        let n = n.max(2);
        let (p, q) = pslg.segment_points(si);
        let l = m.length;
        let mut ts = Vec::with_capacity(n as usize - 1);
        let mut xs = Vec::with_capacity(n as usize - 1);
        let mut chain = vec![seg.a];
        let mut prev_x = 0.0;
        for j in 1..n {
            let t = t_star * j as f64 / n as f64;
            let x = m.eval(t);
            if !(x > prev_x) || !(x < l) {
                return Err(SplitError::NonMonotone(si));
            }
            prev_x = x;
            ts.push(t);
            xs.push(x);
            let frac = x / l;
            let v = Point2::new(p.x + frac * (q.x - p.x), p.y + frac * (q.y - p.y));
            let vid = refined.vertices.len();
            refined.vertices.push(v);
            refined.markers.push(seg.marker);
            refined.origins.push(VertexOrigin::Split);
            refined.sources.push(vec![si]);
            refined.lfs.push(envelopes[si].eval(x));
            chain.push(vid);
        }
        chain.push(seg.b);
        for w in chain.windows(2) {
            refined.subsegments.push(SubSegment {
                a: w[0],
                b: w[1],
                marker: seg.marker,
                source: si,
            });
        }
        refined.chains.push(chain);
        plan.segments.push(SegmentSplit { n, t_star, ts, xs });
    }
    Ok((refined, plan))
}

/// Refinement that keeps every segment whole: one subsegment per input
/// segment and no added vertices. Feature sizes are not computed (left
/// infinite); intended for triangulating inputs that need no splitting.
pub fn trivial_refinement(pslg: &Pslg) -> RefinedPslg {
    let nv = pslg.vertices.len();
    let mut sources = vec![Vec::new(); nv];
    for (si, seg) in pslg.segments.iter().enumerate() {
        sources[seg.a].push(si);
        sources[seg.b].push(si);
    }
    RefinedPslg {
        vertices: pslg.vertices.clone(),
        markers: pslg.vertex_markers.clone(),
        origins: vec![VertexOrigin::Input; nv],
        sources,
        lfs: vec![f64::INFINITY; nv],
        subsegments: pslg
            .segments
            .iter()
            .enumerate()
            .map(|(si, seg)| SubSegment {
                a: seg.a,
                b: seg.b,
                marker: seg.marker,
                source: si,
            })
            .collect(),
        holes: pslg.holes.clone(),
        chains: pslg.segments.iter().map(|seg| vec![seg.a, seg.b]).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfs::{feature_size_for, lfs_oracle};
    use crate::pslg::Segment;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn seg(a: usize, b: usize) -> Segment {
        Segment { a, b, marker: 0 }
    }

    fn isolated_segment() -> Pslg {
        Pslg::new(vec![p(0.0, 0.0), p(1.0, 0.0)], vec![seg(0, 1)], vec![])
    }

    fn solve(pslg: &Pslg, s: usize) -> MappingFunction {
        solve_mapping(&feature_size_for(pslg, s).unwrap()).unwrap()
    }

    #[test]
    fn isolated_segment_reference_length_is_2_ln_2() {
        let m = solve(&isolated_segment(), 0);
        assert!((m.t_star - T_STAR_ISOLATED).abs() < 1e-9, "t* = {}", m.t_star);
        assert_eq!(m.pieces.len(), 2);
        // First piece: y = 1 - e^(-t) up to ln 2.
        assert!((m.pieces[0].t_hi - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((m.eval(0.3) - (1.0 - (-0.3_f64).exp())).abs() < 1e-12);
        // Second piece: y = 0.5 e^(t - ln 2).
        let t = 1.2 * std::f64::consts::LN_2;
        assert!((m.eval(t) - 0.5 * (t - std::f64::consts::LN_2).exp()).abs() < 1e-12);
        assert_eq!(m.eval(0.0), 0.0);
        assert!((m.eval(m.t_star) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn isolated_segment_four_way_split_positions() {
        let pslg = isolated_segment();
        let env = vec![feature_size_for(&pslg, 0).unwrap()];
        let m = vec![solve_mapping(&env[0]).unwrap()];
        let bounds = bounds_for(4, m[0].t_star).unwrap();
        let (refined, plan) = split(&pslg, &env, &m, bounds).unwrap();
        let xs = &plan.segments[0].xs;
        assert_eq!(xs.len(), 3);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert!((xs[0] - (1.0 - inv_sqrt2)).abs() < 1e-9, "{}", xs[0]);
        assert!((xs[1] - 0.5).abs() < 1e-9);
        assert!((xs[2] - inv_sqrt2).abs() < 1e-9);
        assert_eq!(refined.vertices.len(), 5);
        assert_eq!(refined.subsegments.len(), 4);
        assert_eq!(refined.chains[0], vec![0, 2, 3, 4, 1]);
        assert_eq!(refined.origins[2], VertexOrigin::Split);
    }

    #[test]
    fn bounds_for_matches_hand_evaluation() {
        let b = bounds_for(10, T_STAR_ISOLATED).unwrap();
        assert!((b.a_star - 5.49213).abs() < 1e-5, "A* = {}", b.a_star);
        assert!((b.b_star - 8.21348).abs() < 1e-5, "B* = {}", b.b_star);
        assert!((b.r - b.b_star / b.a_star).abs() < 1e-15);
        // Too few pieces for the reference length makes A* nonpositive.
        assert!(matches!(bounds_for(2, 2.0), Err(SplitError::InfeasibleBounds(_))));
    }

    /// Independent evaluation of the required bound: search for the smallest
    /// `A*` satisfying the mode's inequalities directly, with
    /// `B* = A* + 1/ln 2 + 2` substituted numerically.
    fn required_astar_search(theta: f64, mode: Mode) -> f64 {
        let alpha = 1.0 / (2.0 * theta.sin());
        let k = 1.0 / std::f64::consts::LN_2 + 2.0;
        let ok = |a: f64| -> bool {
            let b = a + k;
            let lhs = b / a + alpha / (a * (alpha - 1.0)) + 2.0 / a;
            let first = match mode {
                Mode::Truly => lhs <= std::f64::consts::SQRT_2,
                Mode::Constrained => lhs <= 2.0 * theta.cos(),
            };
            let second = match mode {
                Mode::Truly => true,
                Mode::Constrained => {
                    (a - std::f64::consts::FRAC_1_SQRT_2)
                        / (b + alpha / (alpha - 1.0) + 1.0)
                        > 1.0 / (2.0 * theta.cos())
                }
            };
            first && second && a > std::f64::consts::FRAC_1_SQRT_2
        };
        let mut lo = 1e-3;
        let mut hi = 1e6;
        assert!(ok(hi) && !ok(lo));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    #[test]
    fn required_astar_truly_20_degrees() {
        let theta = 20.0_f64.to_radians();
        let expect = required_astar_search(theta, Mode::Truly);
        let got = required_astar(theta, Mode::Truly);
        assert!(
            (got - expect).abs() < 1e-3,
            "required A* {got} vs search {expect}"
        );
        // Closed form: (1/ln2 + 2 + alpha/(alpha-1) + 2) / (sqrt 2 - 1).
        let alpha = 1.0 / (2.0 * theta.sin());
        let closed = (1.0 / std::f64::consts::LN_2 + 2.0 + alpha / (alpha - 1.0) + 2.0)
            / (std::f64::consts::SQRT_2 - 1.0);
        assert!((got - closed).abs() < 1e-9);
    }

    #[test]
    fn required_astar_constrained_dominated_by_separation() {
        let theta = 20.0_f64.to_radians();
        let expect = required_astar_search(theta, Mode::Constrained);
        let got = required_astar(theta, Mode::Constrained);
        assert!(
            (got - expect).abs() < 1e-3,
            "required A* {got} vs search {expect}"
        );
        // At 20 degrees the separation condition dominates visibility.
        let alpha = 1.0 / (2.0 * theta.sin());
        let k = 1.0 / std::f64::consts::LN_2 + 2.0;
        let visibility = (k + alpha / (alpha - 1.0) + 2.0) / (2.0 * theta.cos() - 1.0);
        assert!(got > visibility);
    }

    #[test]
    fn choose_nstar_is_minimal() {
        let t_min = T_STAR_ISOLATED;
        for (theta_deg, mode) in [(20.0_f64, Mode::Truly), (25.0, Mode::Truly), (20.0, Mode::Constrained)] {
            let theta = theta_deg.to_radians();
            let b = choose_nstar(theta, mode, t_min).unwrap();
            let required = required_astar(theta, mode);
            assert!(b.a_star >= required);
            assert!(b.n_star >= 2);
            if b.n_star > 2 {
                let prev = bounds_for(b.n_star - 1, t_min);
                assert!(prev.is_err() || prev.unwrap().a_star < required);
            }
        }
        assert_eq!(
            choose_nstar(30.0_f64.to_radians(), Mode::Truly, t_min),
            Err(SplitError::BadAngleTarget)
        );
    }

    #[test]
    fn ode_residual_small_everywhere() {
        // Square with a lone interior vertex exercises all three forms.
        let pslg = Pslg::new(
            vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0), p(0.3, 0.2)],
            vec![seg(0, 1), seg(1, 2), seg(2, 3), seg(3, 0)],
            vec![],
        );
        for s in 0..4 {
            let fsf = feature_size_for(&pslg, s).unwrap();
            let m = solve_mapping(&fsf).unwrap();
            for piece in &m.pieces {
                for i in 1..100 {
                    let t = piece.t_lo + (piece.t_hi - piece.t_lo) * i as f64 / 100.0;
                    let y = m.eval(t);
                    let dy = m.deriv(t);
                    let f = fsf.eval(y.clamp(0.0, fsf.length));
                    assert!(
                        (dy - f).abs() <= 1e-8 * f.max(1e-12),
                        "seg {s}: residual {dy} vs {f} at t={t}"
                    );
                }
            }
        }
    }

    #[test]
    fn hyperbolic_piece_matches_sinh() {
        // A single sqrt-quadratic envelope piece F(y) = sqrt(y^2 + d^2) has
        // the solution y = d sinh(t).
        let d = 0.25_f64;
        let fsf = FeatureSizeFunction {
            length: 1.0,
            pieces: vec![EnvelopePiece {
                x_lo: 0.0,
                x_hi: 1.0,
                form: PieceForm::SqrtQuadratic { a: 0.0, b: d * d, d: d * d },
            }],
        };
        let m = solve_mapping(&fsf).unwrap();
        let t_star_expect = (1.0 / d + ((1.0 / (d * d)) + 1.0).sqrt()).ln();
        assert!((m.t_star - t_star_expect).abs() < 1e-12);
        for i in 0..=20 {
            let t = m.t_star * i as f64 / 20.0;
            assert!((m.eval(t) - d * t.sinh()).abs() < 1e-12);
        }
    }

    #[test]
    fn mapping_is_strictly_monotone() {
        let pslg = Pslg::new(
            vec![p(0.0, 0.0), p(2.0, 0.0), p(0.5, 0.4), p(1.5, 0.4)],
            vec![seg(0, 1), seg(2, 3)],
            vec![],
        );
        let m = solve(&pslg, 0);
        let mut prev = -1.0;
        for i in 0..=500 {
            let t = m.t_star * i as f64 / 500.0;
            let x = m.eval(t);
            assert!(x > prev);
            prev = x;
        }
        assert_eq!(m.eval(0.0), 0.0);
        assert!((m.eval(m.t_star) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn split_ratio_law_on_isolated_segment() {
        let pslg = isolated_segment();
        let env = vec![feature_size_for(&pslg, 0).unwrap()];
        let m = vec![solve_mapping(&env[0]).unwrap()];
        for n in [3_u32, 4, 7, 16] {
            let bounds = bounds_for(n, m[0].t_star).unwrap();
            let (refined, _) = split(&pslg, &env, &m, bounds).unwrap();
            for sub in &refined.subsegments {
                let a = refined.vertices[sub.a];
                let b = refined.vertices[sub.b];
                let len = a.dist(b);
                for v in [a, b] {
                    let ratio = lfs_oracle(&pslg, v) / len;
                    assert!(
                        ratio >= bounds.a_star - 1e-9 && ratio <= bounds.b_star + 1e-9,
                        "n={n}: ratio {ratio} outside [{}, {}]",
                        bounds.a_star,
                        bounds.b_star
                    );
                }
            }
        }
    }

    #[test]
    fn split_scale_invariance() {
        // Scaling the PSLG scales split positions; parameter values are
        // unchanged.
        let base = isolated_segment();
        let scaled = Pslg::new(vec![p(0.0, 0.0), p(40.0, 0.0)], vec![seg(0, 1)], vec![]);
        let (mb, ms) = (solve(&base, 0), solve(&scaled, 0));
        assert!((mb.t_star - ms.t_star).abs() < 1e-9);
        for i in 0..=10 {
            let t = mb.t_star * i as f64 / 10.0;
            assert!((mb.eval(t) * 40.0 - ms.eval(t)).abs() < 1e-9 * 40.0);
        }
    }

    #[test]
    fn adjacent_subsegment_ratio_bounded_by_r() {
        let pslg = Pslg::new(
            vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)],
            vec![seg(0, 1), seg(1, 2), seg(2, 3), seg(3, 0)],
            vec![],
        );
        let envs: Vec<_> = (0..4).map(|s| feature_size_for(&pslg, s).unwrap()).collect();
        let ms: Vec<_> = envs.iter().map(|e| solve_mapping(e).unwrap()).collect();
        let t_min = ms.iter().map(|m| m.t_star).fold(f64::INFINITY, f64::min);
        let bounds = bounds_for(8, t_min).unwrap();
        let (refined, _) = split(&pslg, &envs, &ms, bounds).unwrap();
        for chain in &refined.chains {
            let lens: Vec<f64> = chain
                .windows(2)
                .map(|w| refined.vertices[w[0]].dist(refined.vertices[w[1]]))
                .collect();
            for w in lens.windows(2) {
                let ratio = (w[0] / w[1]).max(w[1] / w[0]);
                assert!(ratio <= bounds.r + 1e-9, "ratio {ratio} vs R {}", bounds.r);
            }
        }
    }
}
