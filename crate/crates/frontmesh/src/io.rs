//! Mesh serialization: Triangle-compatible `.node`/`.ele` writers and
//! readers, an SVG emitter, and debug dump formats.
//!
//! Coordinates are printed with 17 significant digits so that re-parsing
//! reproduces every `f64` bit for bit; all writers iterate in index order,
//! making outputs a pure function of the mesh.

use std::fmt::Write as _;

use thiserror::Error;

use crate::cdt::{shortest_edge_of, Mesh, Region};
use crate::geometry::Point2;
use crate::pslg::SmallAngleRecord;
use crate::refine::across_small_angle;
use crate::splitter::{RefinedPslg, SplitBounds};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("mesh has no triangles to emit")]
    EmptyMesh,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T, IoError> {
    Err(IoError::Parse {
        line,
        msg: msg.into(),
    })
}

/// Triangles drawn and counted by the emitters: every real triangle not
/// classified exterior.
fn domain_triangles(mesh: &Mesh) -> Vec<usize> {
    mesh.real_triangles()
        .filter(|&t| mesh.region_of(t) != Region::Exterior)
        .collect()
}

/// Serializes vertices in Triangle's `.node` format: a `"N 2 0 1"` header,
/// then one `"id x y marker"` line per vertex, ids starting at 1. Markers
/// for vertices beyond the refined PSLG (Steiner points) are 0.
pub fn write_node(mesh: &Mesh, refined: &RefinedPslg) -> String {
    let mut out = String::new();
    writeln!(out, "{} 2 0 1", mesh.points.len()).unwrap();
    for (i, p) in mesh.points.iter().enumerate() {
        let marker = refined.markers.get(i).copied().unwrap_or(0);
        writeln!(out, "{} {:.16e} {:.16e} {}", i + 1, p.x, p.y, marker).unwrap();
    }
    out
}

/// Serializes domain triangles in Triangle's `.ele` format: a `"T 3 0"`
/// header, then one `"id v1 v2 v3"` line per triangle with 1-based vertex
/// ids.
pub fn write_ele(mesh: &Mesh) -> String {
    let tris = domain_triangles(mesh);
    let mut out = String::new();
    writeln!(out, "{} 3 0", tris.len()).unwrap();
    for (i, &t) in tris.iter().enumerate() {
        let [a, b, c] = mesh.vertices_of(t);
        writeln!(out, "{} {} {} {}", i + 1, a + 1, b + 1, c + 1).unwrap();
    }
    out
}

/// Parses a `.node` file back into points and markers.
pub fn read_node(text: &str) -> Result<(Vec<Point2>, Vec<i32>), IoError> {
    let mut lines = numbered_lines(text);
    let (ln, header) = lines
        .next()
        .ok_or_else(|| IoError::Parse {
            line: 0,
            msg: "empty file".into(),
        })?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 4 || head[1] != "2" {
        return parse_err(ln, "expected header \"N 2 0 1\"");
    }
    let count: usize = head[0]
        .parse()
        .map_err(|_| IoError::Parse {
            line: ln,
            msg: "bad vertex count".into(),
        })?;
    let mut points = Vec::with_capacity(count);
    let mut markers = Vec::with_capacity(count);
    for (ln, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() < 3 {
            return parse_err(ln, "vertex line needs id, x, y");
        }
        let x: f64 = f[1]
            .parse()
            .map_err(|_| IoError::Parse {
                line: ln,
                msg: "bad x coordinate".into(),
            })?;
        let y: f64 = f[2]
            .parse()
            .map_err(|_| IoError::Parse {
                line: ln,
                msg: "bad y coordinate".into(),
            })?;
        let marker: i32 = match f.get(3) {
            Some(m) => m.parse().map_err(|_| IoError::Parse {
                line: ln,
                msg: "bad marker".into(),
            })?,
            None => 0,
        };
        points.push(Point2::new(x, y));
        markers.push(marker);
    }
    if points.len() != count {
        return parse_err(0, format!("header promised {count} vertices, found {}", points.len()));
    }
    Ok((points, markers))
}

/// Parses an `.ele` file back into 0-based vertex triples.
pub fn read_ele(text: &str) -> Result<Vec<[usize; 3]>, IoError> {
    let mut lines = numbered_lines(text);
    let (ln, header) = lines
        .next()
        .ok_or_else(|| IoError::Parse {
            line: 0,
            msg: "empty file".into(),
        })?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() < 2 || head[1] != "3" {
        return parse_err(ln, "expected header \"T 3 0\"");
    }
    let count: usize = head[0]
        .parse()
        .map_err(|_| IoError::Parse {
            line: ln,
            msg: "bad triangle count".into(),
        })?;
    let mut tris = Vec::with_capacity(count);
    for (ln, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() < 4 {
            return parse_err(ln, "triangle line needs id and three vertices");
        }
        let mut v = [0usize; 3];
        for (k, s) in f[1..4].iter().enumerate() {
            let id: usize = s.parse().map_err(|_| IoError::Parse {
                line: ln,
                msg: "bad vertex id".into(),
            })?;
            if id == 0 {
                return parse_err(ln, "vertex ids are 1-based");
            }
            v[k] = id - 1;
        }
        tris.push(v);
    }
    if tris.len() != count {
        return parse_err(0, format!("header promised {count} triangles, found {}", tris.len()));
    }
    Ok(tris)
}

fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Renders the mesh as SVG: one polygon per domain triangle, one bold line
/// per subsegment, inside a root whose viewBox is the bounding box plus a
/// 5% margin. Triangles whose shortest edge spans a small input angle are
/// shaded.
pub fn svg_string(
    mesh: &Mesh,
    refined: &RefinedPslg,
    small_angles: &[SmallAngleRecord],
    bounds: &SplitBounds,
) -> Result<String, IoError> {
    let tris = domain_triangles(mesh);
    if tris.is_empty() {
        return Err(IoError::EmptyMesh);
    }
    let (mut lo, mut hi) = (mesh.points[0], mesh.points[0]);
    for p in &mesh.points {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let (w, h) = (hi.x - lo.x, hi.y - lo.y);
    let margin = 0.05 * w.max(h).max(f64::MIN_POSITIVE);
    let stroke = 0.004 * w.max(h).max(f64::MIN_POSITIVE);

    let mut out = String::new();
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.6} {:.6} {:.6} {:.6}\">",
        lo.x - margin,
        lo.y - margin,
        w + 2.0 * margin,
        h + 2.0 * margin
    )
    .unwrap();
    for &t in &tris {
        let [pa, pb, pc] = mesh.points_of(t);
        let (len, (u, v)) = shortest_edge_of(mesh, t);
        let fill = if across_small_angle(refined, small_angles, u, v, len, bounds.b_star) {
            "#f4c7c3"
        } else {
            "none"
        };
        writeln!(
            out,
            "<polygon points=\"{:.6},{:.6} {:.6},{:.6} {:.6},{:.6}\" fill=\"{}\" stroke=\"#444\" stroke-width=\"{:.6}\"/>",
            pa.x, pa.y, pb.x, pb.y, pc.x, pc.y, fill, stroke
        )
        .unwrap();
    }
    for s in &refined.subsegments {
        let pa = refined.vertices[s.a];
        let pb = refined.vertices[s.b];
        writeln!(
            out,
            "<line x1=\"{:.6}\" y1=\"{:.6}\" x2=\"{:.6}\" y2=\"{:.6}\" stroke=\"#023\" stroke-width=\"{:.6}\"/>",
            pa.x,
            pa.y,
            pb.x,
            pb.y,
            3.0 * stroke
        )
        .unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    Ok(out)
}

/// Serializes a PSLG in `.poly` format with 1-based ids, suitable for
/// [`crate::pslg::parse_poly`].
pub fn write_poly(pslg: &crate::pslg::Pslg) -> String {
    let mut out = String::new();
    writeln!(out, "{} 2 0 1", pslg.vertices.len()).unwrap();
    for (i, p) in pslg.vertices.iter().enumerate() {
        writeln!(
            out,
            "{} {:.16e} {:.16e} {}",
            i + 1,
            p.x,
            p.y,
            pslg.vertex_markers[i]
        )
        .unwrap();
    }
    writeln!(out, "{} 1", pslg.segments.len()).unwrap();
    for (i, s) in pslg.segments.iter().enumerate() {
        writeln!(out, "{} {} {} {}", i + 1, s.a + 1, s.b + 1, s.marker).unwrap();
    }
    writeln!(out, "{}", pslg.holes.len()).unwrap();
    for (i, h) in pslg.holes.iter().enumerate() {
        writeln!(out, "{} {:.16e} {:.16e}", i + 1, h.x, h.y).unwrap();
    }
    out
}

/// Debug dump: one `"id x y lfs"` line per refined PSLG vertex, with the
/// feature size the splitter cached for it.
pub fn lfs_dump(refined: &RefinedPslg) -> String {
    let mut out = String::new();
    for (i, p) in refined.vertices.iter().enumerate() {
        writeln!(out, "{} {:.16e} {:.16e} {:.16e}", i, p.x, p.y, refined.lfs[i]).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pslg::{Pslg, Segment};
    use crate::refine::{prepare, refine, RefineConfig};
    use crate::splitter::{bounds_for, trivial_refinement, T_STAR_ISOLATED};
    use crate::{Mode, VertexOrigin};
    use std::f64::consts::PI;

    fn deg(d: f64) -> f64 {
        d * PI / 180.0
    }

    fn seg(a: usize, b: usize) -> Segment {
        Segment { a, b, marker: 0 }
    }

    fn refined_square(theta_deg: f64, mode: Mode) -> crate::refine::Prepared {
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        let s = vec![seg(0, 1), seg(1, 2), seg(2, 3), seg(3, 0)];
        let pslg = Pslg::new(v, s, vec![]);
        let mut prep = prepare(&pslg, deg(theta_deg), mode, None).unwrap();
        let config = RefineConfig::new(deg(theta_deg), mode);
        refine(
            &mut prep.mesh,
            &prep.refined,
            &prep.small_angles,
            &prep.bounds,
            &config,
        )
        .unwrap();
        prep
    }

    #[test]
    fn node_ele_round_trip_is_bit_exact() {
        let prep = refined_square(25.0, Mode::Truly);
        let node = write_node(&prep.mesh, &prep.refined);
        let ele = write_ele(&prep.mesh);

        let (points, markers) = read_node(&node).unwrap();
        assert_eq!(points.len(), prep.mesh.points.len());
        for (p, q) in points.iter().zip(prep.mesh.points.iter()) {
            assert_eq!(p.x.to_bits(), q.x.to_bits());
            assert_eq!(p.y.to_bits(), q.y.to_bits());
        }
        assert_eq!(markers.len(), points.len());

        let tris = read_ele(&ele).unwrap();
        let expect: Vec<[usize; 3]> = prep
            .mesh
            .interior_triangles()
            .map(|t| prep.mesh.vertices_of(t))
            .collect();
        assert_eq!(tris, expect);
    }

    #[test]
    fn node_and_ele_headers_follow_the_format() {
        let prep = refined_square(25.0, Mode::Truly);
        let node = write_node(&prep.mesh, &prep.refined);
        let first = node.lines().next().unwrap();
        assert_eq!(
            first,
            format!("{} 2 0 1", prep.mesh.points.len())
        );
        assert_eq!(node.lines().count(), prep.mesh.points.len() + 1);

        let ele = write_ele(&prep.mesh);
        let count = prep.mesh.interior_triangles().count();
        assert_eq!(ele.lines().next().unwrap(), format!("{} 3 0", count));
        assert_eq!(ele.lines().count(), count + 1);
    }

    #[test]
    fn readers_reject_malformed_input() {
        assert!(matches!(read_node(""), Err(IoError::Parse { .. })));
        assert!(matches!(
            read_node("2 2 0 1\n1 0.0 0.0 0\n"),
            Err(IoError::Parse { .. })
        ));
        assert!(matches!(
            read_ele("1 3 0\n1 0 1 2\n"),
            Err(IoError::Parse { .. })
        ));
        assert!(matches!(
            read_ele("1 4 0\n1 1 2 3 4\n"),
            Err(IoError::Parse { .. })
        ));
    }

    #[test]
    fn svg_element_counts_match_the_mesh() {
        let prep = refined_square(25.0, Mode::Truly);
        let svg = svg_string(&prep.mesh, &prep.refined, &prep.small_angles, &prep.bounds).unwrap();
        let polygons = svg.matches("<polygon").count();
        let lines = svg.matches("<line").count();
        let roots = svg.matches("<svg").count();
        assert_eq!(roots, 1);
        assert_eq!(polygons, prep.mesh.interior_triangles().count());
        assert_eq!(lines, prep.refined.subsegments.len());
        assert!(svg.contains("viewBox="));
    }

    #[test]
    fn svg_of_a_single_triangle_has_one_polygon() {
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.4, 0.8),
        ];
        let pslg = Pslg::new(v, vec![seg(0, 1), seg(1, 2), seg(2, 0)], vec![]);
        let refined = trivial_refinement(&pslg);
        let mesh = Mesh::triangulate(&refined.vertices, &refined.origins).unwrap();
        let bounds = bounds_for(4, T_STAR_ISOLATED).unwrap();
        let svg = svg_string(&mesh, &refined, &[], &bounds).unwrap();
        assert_eq!(svg.matches("<polygon").count(), 1);
        assert_eq!(svg.matches("<line").count(), 3);
    }

    #[test]
    fn svg_shades_skipped_triangles_and_rejects_empty_meshes() {
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(deg(12.0).cos(), deg(12.0).sin()),
        ];
        let pslg = Pslg::new(v, vec![seg(0, 1), seg(0, 2), seg(1, 2)], vec![]);
        let mut prep = prepare(&pslg, deg(26.0), Mode::Constrained, None).unwrap();
        let config = RefineConfig::new(deg(26.0), Mode::Constrained);
        refine(
            &mut prep.mesh,
            &prep.refined,
            &prep.small_angles,
            &prep.bounds,
            &config,
        )
        .unwrap();
        let svg = svg_string(&prep.mesh, &prep.refined, &prep.small_angles, &prep.bounds).unwrap();
        assert!(svg.contains("fill=\"#f4c7c3\""), "no shaded triangle");

        let lone = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)];
        let pslg2 = Pslg::new(lone, vec![seg(0, 1)], vec![]);
        let refined2 = trivial_refinement(&pslg2);
        let mesh2 = Mesh::triangulate(
            &[
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(0.5, 1.0),
            ],
            &[VertexOrigin::Input; 3],
        )
        .unwrap();
        // Kill the only real triangle by classifying it exterior.
        let t = mesh2.real_triangles().next().unwrap();
        let mut mesh2 = mesh2;
        mesh2.set_region(t, Region::Exterior);
        assert!(matches!(
            svg_string(&mesh2, &refined2, &[], &bounds_for(4, T_STAR_ISOLATED).unwrap()),
            Err(IoError::EmptyMesh)
        ));
    }

    #[test]
    fn poly_round_trip_preserves_the_pslg() {
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 2.0),
            Point2::new(0.0, 2.0),
            Point2::new(0.75, 0.75),
            Point2::new(1.25, 0.75),
            Point2::new(1.25, 1.25),
            Point2::new(0.75, 1.25),
        ];
        let s = vec![
            seg(0, 1),
            seg(1, 2),
            seg(2, 3),
            seg(3, 0),
            seg(4, 5),
            seg(5, 6),
            seg(6, 7),
            seg(7, 4),
        ];
        let pslg = Pslg::new(v, s, vec![Point2::new(1.0, 1.0)]);
        let text = write_poly(&pslg);
        let back = crate::pslg::parse_poly(&text).unwrap();
        assert_eq!(back.vertices, pslg.vertices);
        assert_eq!(back.segments, pslg.segments);
        assert_eq!(back.holes, pslg.holes);
    }

    #[test]
    fn lfs_dump_lists_every_refined_vertex() {
        let prep = refined_square(25.0, Mode::Truly);
        let dump = lfs_dump(&prep.refined);
        assert_eq!(dump.lines().count(), prep.refined.vertices.len());
        let first: Vec<&str> = dump.lines().next().unwrap().split_whitespace().collect();
        assert_eq!(first.len(), 4);
        let lfs: f64 = first[3].parse().unwrap();
        assert!(lfs.is_finite() && lfs > 0.0);
    }
}
