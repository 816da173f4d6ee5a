//! Post-hoc verification oracles and the quantitative quality report.
//!
//! Every report field is recomputed from the finished mesh with brute-force
//! oracles; nothing is copied from refinement counters. A report therefore
//! doubles as an independent audit of a run: the Delaunay check replays the
//! incircle test exhaustively, conformity re-walks the subsegment list, and
//! all size ratios are measured against the brute-force feature size rather
//! than the envelope cache used at runtime.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::cdt::{shortest_edge_of, Mesh, Region};
use crate::geometry::{max_angle, min_angle, open_segment_hits_segment};
use crate::lfs::lfs_oracle;
use crate::pslg::Pslg;
use crate::refine::across_small_angle;
use crate::splitter::{RefinedPslg, SplitBounds};
use crate::Mode;

/// Angle bounds that hold across a small input angle `phi` after refinement
/// with adjacent subsegment ratio at most `r`.
///
/// For subsegments `xp`, `ps` on one arm and a vertex `q` on the other with
/// `|xq| >= |xp|`, the sine rule gives `sin(psq) >= sin(xqs) / (1 + r)` since
/// `|xs| <= (1 + r)|xq|`; expanding `sin(xqs) = sin(phi + qsx)` yields
/// `tan(psq) >= sin phi / (1 + r - cos phi)`. The bound weakens as `r` grows
/// and tends to `arctan(sin phi / (2 - cos phi))` as splits refine, where the
/// maximum angle across the apex tends to `pi/2 + phi/2`.
pub fn small_angle_bounds(phi: f64, r: f64) -> (f64, f64) {
    let min_bound = (phi.sin() / (1.0 + r - phi.cos())).atan();
    (min_bound, FRAC_PI_2 + phi / 2.0)
}

/// Size-optimality constant: every vertex's feature size divided by its
/// shortest incident edge stays below `2 (B* + alpha/(alpha-1) + 1)` with
/// `alpha = 1/(2 sin theta_star)`.
pub fn theorem1_bound(theta_star: f64, b_star: f64) -> f64 {
    let alpha = 1.0 / (2.0 * theta_star.sin());
    2.0 * (b_star + alpha / (alpha - 1.0) + 1.0)
}

/// Inputs the verifier needs beyond the mesh itself.
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    /// Target minimum angle, radians.
    pub theta_star: f64,
    pub mode: Mode,
    /// Realized split bounds of the run under audit.
    pub bounds: SplitBounds,
}

/// Bound evaluation and realized measurements for one small input angle.
#[derive(Debug, Clone, Serialize)]
pub struct SmallAngleQuality {
    /// Input vertex at the angle's apex.
    pub apex: usize,
    /// The angle itself, radians.
    pub angle: f64,
    /// Guaranteed minimum angle of triangles spanning this input angle.
    pub theorem2_bound: f64,
    /// Limiting maximum angle `pi/2 + angle/2` across this input angle.
    pub max_angle_bound: f64,
    /// Realized minimum angle among triangles whose shortest edge spans
    /// this input angle below the skip threshold; absent if none do.
    pub min_angle_skipped: Option<f64>,
    /// Realized maximum angle of triangles adjacent to a spanning edge.
    pub max_angle_across: Option<f64>,
}

/// The quantitative quality report for a finished run.
#[derive(Debug, Clone, Serialize)]
pub struct QualityReport {
    pub vertex_count: usize,
    /// Triangles inside the domain.
    pub triangle_count: usize,
    /// Minimum angle over all interior triangles, radians.
    pub min_angle_overall: f64,
    /// Minimum angle over interior triangles not skipped across a small
    /// input angle; equals `min_angle_overall` when nothing is skipped.
    pub min_angle_excluding_skipped: f64,
    /// Maximum angle over all interior triangles, radians.
    pub max_angle: f64,
    /// Max over vertices of feature size divided by shortest incident edge.
    pub worst_size_ratio: f64,
    /// Size-optimality ceiling for `worst_size_ratio`.
    pub theorem1_bound: f64,
    /// Per small input angle: bounds and realized values.
    pub small_angles: Vec<SmallAngleQuality>,
    /// Subsegment encroachments found in the final mesh.
    pub encroachment_events: usize,
    pub delaunay_ok: bool,
    /// True when every subsegment is present as a mesh edge.
    pub pslg_conforming: bool,
}

/// Finds subsegments whose diametral circle strictly contains a mesh vertex
/// other than its endpoints, returned as `(subsegment index, vertex)` pairs.
/// In constrained mode only vertices visible from the subsegment midpoint
/// count, mirroring the visibility-restricted empty-circle contract.
pub fn encroached_subsegments(
    mesh: &Mesh,
    refined: &RefinedPslg,
    mode: Mode,
) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (si, s) in refined.subsegments.iter().enumerate() {
        let pa = refined.vertices[s.a];
        let pb = refined.vertices[s.b];
        let mid = pa.midpoint(pb);
        for (w, &pw) in mesh.points.iter().enumerate() {
            if w == s.a || w == s.b {
                continue;
            }
            // Strictly inside the diametral circle iff the subsegment
            // subtends an obtuse angle at the vertex.
            let dot = (pa.x - pw.x) * (pb.x - pw.x) + (pa.y - pw.y) * (pb.y - pw.y);
            if dot >= 0.0 {
                continue;
            }
            let visible = mode == Mode::Truly
                || refined.subsegments.iter().enumerate().all(|(ti, t)| {
                    ti == si
                        || !open_segment_hits_segment(
                            mid,
                            pw,
                            refined.vertices[t.a],
                            refined.vertices[t.b],
                        )
                });
            if visible {
                out.push((si, w));
            }
        }
    }
    out
}

/// Audits a finished mesh: exhaustive Delaunay check, subsegment presence,
/// full angle scan, size-ratio scan against the optimality bound, and per
/// small-angle bound evaluation. Deterministic; never fails, failures are
/// report fields.
pub fn verify(mesh: &Mesh, pslg: &Pslg, refined: &RefinedPslg, config: &VerifyConfig) -> QualityReport {
    let recs = pslg.classify_small_angles(config.bounds.r);
    let interior: Vec<usize> = mesh.interior_triangles().collect();

    let mut min_overall = f64::INFINITY;
    let mut max_overall: f64 = 0.0;
    let mut min_excluding = f64::INFINITY;
    // Shortest interior edge incident to each vertex, and the largest angle
    // of any interior triangle containing each edge.
    let mut shortest_at: HashMap<usize, f64> = HashMap::new();
    let mut edge_max_angle: HashMap<(usize, usize), f64> = HashMap::new();

    for &t in &interior {
        let [pa, pb, pc] = mesh.points_of(t);
        let lo = min_angle(pa, pb, pc).expect("interior triangle degenerate");
        let hi = max_angle(pa, pb, pc).expect("interior triangle degenerate");
        min_overall = min_overall.min(lo);
        max_overall = max_overall.max(hi);

        let vs = mesh.vertices_of(t);
        let ps = mesh.points_of(t);
        for i in 0..3 {
            let (u, v) = (vs[i], vs[(i + 1) % 3]);
            let len = ps[i].dist(ps[(i + 1) % 3]);
            let key = (u.min(v), u.max(v));
            let su = shortest_at.entry(u).or_insert(f64::INFINITY);
            *su = su.min(len);
            let sv = shortest_at.entry(v).or_insert(f64::INFINITY);
            *sv = sv.min(len);
            let m = edge_max_angle.entry(key).or_insert(0.0);
            *m = m.max(hi);
        }

        let (len, (u, v)) = shortest_edge_of(mesh, t);
        if !across_small_angle(refined, &recs, u, v, len, config.bounds.b_star) {
            min_excluding = min_excluding.min(lo);
        }
    }
    if !min_overall.is_finite() {
        min_overall = 0.0;
    }
    if !min_excluding.is_finite() {
        min_excluding = min_overall;
    }

    let mut worst_size_ratio: f64 = 0.0;
    for (v, &p) in mesh.points.iter().enumerate() {
        if let Some(&len) = shortest_at.get(&v) {
            worst_size_ratio = worst_size_ratio.max(lfs_oracle(pslg, p) / len);
        }
    }

    let mut small_angles = Vec::new();
    for rec in &recs {
        let (t2, mb) = small_angle_bounds(rec.angle, config.bounds.r);
        let one = std::slice::from_ref(rec);
        let mut min_skipped = f64::INFINITY;
        let mut max_across: f64 = 0.0;
        for &t in &interior {
            let [pa, pb, pc] = mesh.points_of(t);
            let (len, (u, v)) = shortest_edge_of(mesh, t);
            if across_small_angle(refined, one, u, v, len, config.bounds.b_star) {
                min_skipped = min_skipped.min(min_angle(pa, pb, pc).unwrap());
            }
            let vs = mesh.vertices_of(t);
            let ps = mesh.points_of(t);
            for i in 0..3 {
                let (eu, ev) = (vs[i], vs[(i + 1) % 3]);
                let elen = ps[i].dist(ps[(i + 1) % 3]);
                if across_small_angle(refined, one, eu, ev, elen, config.bounds.b_star) {
                    let key = (eu.min(ev), eu.max(ev));
                    max_across = max_across.max(edge_max_angle[&key]);
                }
            }
        }
        small_angles.push(SmallAngleQuality {
            apex: rec.apex,
            angle: rec.angle,
            theorem2_bound: t2,
            max_angle_bound: mb,
            min_angle_skipped: min_skipped.is_finite().then_some(min_skipped),
            max_angle_across: (max_across > 0.0).then_some(max_across),
        });
    }

    QualityReport {
        vertex_count: mesh.vertex_count(),
        triangle_count: interior.len(),
        min_angle_overall: min_overall,
        min_angle_excluding_skipped: min_excluding,
        max_angle: max_overall,
        worst_size_ratio,
        theorem1_bound: theorem1_bound(config.theta_star, config.bounds.b_star),
        small_angles,
        encroachment_events: encroached_subsegments(mesh, refined, config.mode).len(),
        delaunay_ok: mesh.is_delaunay(config.mode),
        pslg_conforming: mesh.pslg_recovered(refined),
    }
}

/// Per-bin triangle counts over minimum and maximum angles, bins spanning
/// `[0, pi)` uniformly. Ghost and exterior triangles are excluded.
#[derive(Debug, Clone, Serialize)]
pub struct AngleHistogram {
    pub bins: usize,
    /// Bin width in radians, `pi / bins`.
    pub bin_width: f64,
    pub min_angle_counts: Vec<usize>,
    pub max_angle_counts: Vec<usize>,
}

impl AngleHistogram {
    pub fn total(&self) -> usize {
        self.min_angle_counts.iter().sum()
    }
}

/// Histograms the minimum and maximum angle of every non-exterior triangle.
pub fn angle_histogram(mesh: &Mesh, bins: usize) -> AngleHistogram {
    assert!(bins > 0, "histogram needs at least one bin");
    let width = PI / bins as f64;
    let index = |ang: f64| ((ang / width) as usize).min(bins - 1);
    let mut min_counts = vec![0usize; bins];
    let mut max_counts = vec![0usize; bins];
    for t in mesh.real_triangles() {
        if mesh.region_of(t) == Region::Exterior {
            continue;
        }
        let [pa, pb, pc] = mesh.points_of(t);
        min_counts[index(min_angle(pa, pb, pc).expect("degenerate triangle"))] += 1;
        max_counts[index(max_angle(pa, pb, pc).expect("degenerate triangle"))] += 1;
    }
    AngleHistogram {
        bins,
        bin_width: width,
        min_angle_counts: min_counts,
        max_angle_counts: max_counts,
    }
}
