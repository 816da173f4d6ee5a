//! C ABI for the frontmesh refinement engine.
//!
//! The surface is handle-based: parse or assemble a [`FrontmeshPslg`], run
//! [`frontmesh_refine`] to get a [`FrontmeshRun`], read the mesh out of the
//! run through the accessor functions, and free both handles. Every pointer
//! returned by an accessor is owned by its handle and stays valid until the
//! handle is freed; nothing needs a separate free call except the handles
//! themselves.
//!
//! All functions are safe to call with null handles (accessors return zero
//! or null, frees are no-ops) so bindings do not have to guard teardown
//! paths. Failing calls store a message retrievable on the same thread via
//! [`frontmesh_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use frontmesh::cdt::Region;
use frontmesh::geometry::Point2;
use frontmesh::pipeline::{execute, hard_checks_pass, RunError};
use frontmesh::pslg::{parse_poly, Pslg, Segment};
use frontmesh::Mode;

/// Result of any fallible API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrontmeshStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The input text could not be parsed as a `.poly` description.
    ParseFailed = 3,
    /// The configuration or geometry was rejected before refinement.
    Invalid = 4,
    /// Refinement hit a termination safety valve (insertion cap or
    /// recovery limit).
    Nontermination = 5,
    /// A strict-mode invariant was breached during the run.
    Verification = 6,
    /// An unexpected internal failure; the run state was discarded.
    Internal = 7,
}

/// Which empty-circle discipline the mesh is verified against.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrontmeshMode {
    /// Every triangle has an empty circumcircle.
    Truly = 0,
    /// Subsegments are constraint edges; circumcircles may only contain
    /// vertices invisible across them.
    Constrained = 1,
}

/// Refinement parameters. Obtain defaults from
/// [`frontmesh_options_default`] and override fields as needed.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FrontmeshOptions {
    /// Target minimum angle in degrees; must lie strictly between 0 and 30.
    pub theta_deg: f64,
    pub mode: FrontmeshMode,
    /// Segment split density; 0 derives the smallest density satisfying
    /// the protection conditions for `theta_deg`.
    pub nstar: u32,
    /// Abort on the first encroachment instead of recording it.
    pub strict: bool,
    /// Safety valve on Steiner insertions.
    pub max_insertions: u64,
}

/// An input planar straight line graph. Opaque; create with
/// [`frontmesh_pslg_parse`] or [`frontmesh_pslg_from_arrays`], destroy with
/// [`frontmesh_pslg_free`].
pub struct FrontmeshPslg {
    inner: Pslg,
}

/// A completed refinement run holding the output mesh and its audit
/// report. Opaque; destroy with [`frontmesh_run_free`].
pub struct FrontmeshRun {
    coords: Vec<f64>,
    markers: Vec<i32>,
    triangles: Vec<u32>,
    min_angle_deg: f64,
    passed: bool,
    report_json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn fail(status: FrontmeshStatus, msg: String) -> FrontmeshStatus {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).ok();
    });
    status
}

/// Returns the message of the most recent failing call on this thread, or
/// null if none has failed yet. The pointer stays valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn frontmesh_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |msg| msg.as_ptr())
    })
}

/// Returns the library version as a static string.
#[no_mangle]
pub extern "C" fn frontmesh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Returns the default refinement options: 25 degrees, truly Delaunay,
/// derived split density, non-strict, one million insertions.
#[no_mangle]
pub extern "C" fn frontmesh_options_default() -> FrontmeshOptions {
    FrontmeshOptions {
        theta_deg: 25.0,
        mode: FrontmeshMode::Truly,
        nstar: 0,
        strict: false,
        max_insertions: 1_000_000,
    }
}

/// Parses Triangle-format `.poly` text into a PSLG handle and stores it in
/// `*out`. On failure `*out` is untouched and the status describes why.
///
/// # Safety
/// `text` must point to a nul-terminated byte string and `out` to a
/// writable `FrontmeshPslg*` slot; both must stay valid for the call.
#[no_mangle]
pub unsafe extern "C" fn frontmesh_pslg_parse(
    text: *const c_char,
    out: *mut *mut FrontmeshPslg,
) -> FrontmeshStatus {
    if text.is_null() || out.is_null() {
        return fail(FrontmeshStatus::NullArgument, "null argument".into());
    }
    let text = match CStr::from_ptr(text).to_str() {
        Ok(t) => t,
        Err(e) => return fail(FrontmeshStatus::InvalidUtf8, e.to_string()),
    };
    match parse_poly(text) {
        Ok(pslg) => {
            *out = Box::into_raw(Box::new(FrontmeshPslg { inner: pslg }));
            FrontmeshStatus::Ok
        }
        Err(e) => fail(FrontmeshStatus::ParseFailed, e.to_string()),
    }
}

/// Assembles a PSLG handle from flat arrays and stores it in `*out`.
///
/// `vertices` holds `vertex_count` interleaved `x, y` pairs, `segments`
/// holds `segment_count` pairs of zero-based endpoint indices, and `holes`
/// holds `hole_count` interleaved hole-marker coordinates. `segment_markers`
/// may be null, in which case every segment gets marker 1; `holes` may be
/// null when `hole_count` is 0. Geometry is validated when the handle is
/// refined, but endpoint indices are range-checked here.
///
/// # Safety
/// Each non-null array must be readable at the length its count implies
/// (`2 * vertex_count` doubles, `2 * segment_count` ids, `segment_count`
/// markers, `2 * hole_count` doubles) and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn frontmesh_pslg_from_arrays(
    vertices: *const f64,
    vertex_count: usize,
    segments: *const u32,
    segment_count: usize,
    segment_markers: *const i32,
    holes: *const f64,
    hole_count: usize,
    out: *mut *mut FrontmeshPslg,
) -> FrontmeshStatus {
    if out.is_null()
        || (vertices.is_null() && vertex_count > 0)
        || (segments.is_null() && segment_count > 0)
        || (holes.is_null() && hole_count > 0)
    {
        return fail(FrontmeshStatus::NullArgument, "null argument".into());
    }
    let coords = std::slice::from_raw_parts(vertices, 2 * vertex_count);
    let ids = std::slice::from_raw_parts(segments, 2 * segment_count);
    let verts: Vec<Point2> = coords
        .chunks_exact(2)
        .map(|c| Point2::new(c[0], c[1]))
        .collect();
    let mut segs = Vec::with_capacity(segment_count);
    for (i, pair) in ids.chunks_exact(2).enumerate() {
        let (a, b) = (pair[0] as usize, pair[1] as usize);
        if a >= vertex_count || b >= vertex_count {
            return fail(
                FrontmeshStatus::Invalid,
                format!("segment {i} references vertex out of range"),
            );
        }
        let marker = if segment_markers.is_null() {
            1
        } else {
            *segment_markers.add(i)
        };
        segs.push(Segment { a, b, marker });
    }
    let hole_pts: Vec<Point2> = if hole_count == 0 {
        Vec::new()
    } else {
        std::slice::from_raw_parts(holes, 2 * hole_count)
            .chunks_exact(2)
            .map(|c| Point2::new(c[0], c[1]))
            .collect()
    };
    let pslg = Pslg::new(verts, segs, hole_pts);
    *out = Box::into_raw(Box::new(FrontmeshPslg { inner: pslg }));
    FrontmeshStatus::Ok
}

/// Frees a PSLG handle. Null is a no-op.
///
/// # Safety
/// `pslg` must be null or a pointer returned by one of the constructors
/// that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn frontmesh_pslg_free(pslg: *mut FrontmeshPslg) {
    if !pslg.is_null() {
        drop(Box::from_raw(pslg));
    }
}

fn build_run(pslg: &Pslg, options: &FrontmeshOptions) -> Result<FrontmeshRun, FrontmeshStatus> {
    let mode = match options.mode {
        FrontmeshMode::Truly => Mode::Truly,
        FrontmeshMode::Constrained => Mode::Constrained,
    };
    let nstar = (options.nstar > 0).then_some(options.nstar);
    let result = execute(
        pslg,
        options.theta_deg,
        mode,
        nstar,
        options.strict,
        options.max_insertions,
    )
    .map_err(|e| {
        let status = match e {
            RunError::Invalid(_) => FrontmeshStatus::Invalid,
            RunError::Nontermination(_) => FrontmeshStatus::Nontermination,
            RunError::Verification(_) => FrontmeshStatus::Verification,
        };
        fail(status, e.to_string())
    })?;

    let mesh = &result.prepared.mesh;
    let refined = &result.prepared.refined;
    let mut coords = Vec::with_capacity(2 * mesh.points.len());
    let mut markers = Vec::with_capacity(mesh.points.len());
    for (i, p) in mesh.points.iter().enumerate() {
        coords.push(p.x);
        coords.push(p.y);
        markers.push(refined.markers.get(i).copied().unwrap_or(0));
    }
    // Same triangle set and order as the .ele writer: every real triangle
    // not classified exterior.
    let mut triangles = Vec::new();
    for t in mesh.real_triangles() {
        if mesh.region_of(t) == Region::Exterior {
            continue;
        }
        for v in mesh.vertices_of(t) {
            let id = u32::try_from(v).map_err(|_| {
                fail(
                    FrontmeshStatus::Internal,
                    "vertex id exceeds 32 bits".into(),
                )
            })?;
            triangles.push(id);
        }
    }
    let report_json = serde_json::to_string(&result.report)
        .ok()
        .and_then(|s| CString::new(s).ok())
        .ok_or_else(|| {
            fail(
                FrontmeshStatus::Internal,
                "report serialization failed".into(),
            )
        })?;
    Ok(FrontmeshRun {
        coords,
        markers,
        triangles,
        min_angle_deg: result.report.min_angle_excluding_skipped.to_degrees(),
        passed: hard_checks_pass(&result.report, options.theta_deg.to_radians()),
        report_json,
    })
}

/// Refines a PSLG into a quality mesh and stores the run handle in `*out`.
/// A null `options` uses [`frontmesh_options_default`]. On failure `*out`
/// is untouched.
///
/// # Safety
/// `pslg` must be a live handle from one of the constructors, `options`
/// null or a pointer to a valid options struct, and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn frontmesh_refine(
    pslg: *const FrontmeshPslg,
    options: *const FrontmeshOptions,
    out: *mut *mut FrontmeshRun,
) -> FrontmeshStatus {
    if pslg.is_null() || out.is_null() {
        return fail(FrontmeshStatus::NullArgument, "null argument".into());
    }
    let defaults = frontmesh_options_default();
    let options = if options.is_null() { &defaults } else { &*options };
    let inner = &(*pslg).inner;
    match catch_unwind(AssertUnwindSafe(|| build_run(inner, options))) {
        Ok(Ok(run)) => {
            *out = Box::into_raw(Box::new(run));
            FrontmeshStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => fail(FrontmeshStatus::Internal, "refinement panicked".into()),
    }
}

/// Frees a run handle and every buffer it owns. Null is a no-op.
///
/// # Safety
/// `run` must be null or a pointer returned by [`frontmesh_refine`] that
/// has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn frontmesh_run_free(run: *mut FrontmeshRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Number of mesh vertices, or 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn frontmesh_run_vertex_count(run: *const FrontmeshRun) -> usize {
    run.as_ref().map_or(0, |r| r.coords.len() / 2)
}

/// Number of domain triangles, or 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn frontmesh_run_triangle_count(run: *const FrontmeshRun) -> usize {
    run.as_ref().map_or(0, |r| r.triangles.len() / 3)
}

/// Vertex coordinates as interleaved `x, y` pairs of length
/// `2 * frontmesh_run_vertex_count`. Owned by the run; null for a null
/// handle.
///
/// # Safety
/// `run` must be null or a live run handle; the buffer dies with it.
#[no_mangle]
pub unsafe extern "C" fn frontmesh_run_vertices(run: *const FrontmeshRun) -> *const f64 {
    run.as_ref().map_or(ptr::null(), |r| r.coords.as_ptr())
}

/// Per-vertex boundary markers of length `frontmesh_run_vertex_count`;
/// Steiner vertices carry marker 0. Owned by the run; null for a null
/// handle.
///
/// # Safety
/// `run` must be null or a live run handle; the buffer dies with it.
#[no_mangle]
pub unsafe extern "C" fn frontmesh_run_vertex_markers(run: *const FrontmeshRun) -> *const i32 {
    run.as_ref().map_or(ptr::null(), |r| r.markers.as_ptr())
}

/// Triangle corners as zero-based vertex-index triples of length
/// `3 * frontmesh_run_triangle_count`, counterclockwise. Owned by the run;
/// null for a null handle.
///
/// # Safety
/// `run` must be null or a live run handle; the buffer dies with it.
#[no_mangle]
pub unsafe extern "C" fn frontmesh_run_triangles(run: *const FrontmeshRun) -> *const u32 {
    run.as_ref().map_or(ptr::null(), |r| r.triangles.as_ptr())
}

/// Minimum angle in degrees over all triangles outside skipped
/// small-angle neighborhoods, or 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn frontmesh_run_min_angle_deg(run: *const FrontmeshRun) -> f64 {
    run.as_ref().map_or(0.0, |r| r.min_angle_deg)
}

/// Whether the run passed every hard verification check: the Delaunay
/// property for its mode, PSLG conformity, zero encroachment events, and
/// the target angle outside skipped triangles. False for a null handle.
///
/// # Safety
/// `run` must be null or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn frontmesh_run_passed(run: *const FrontmeshRun) -> bool {
    run.as_ref().is_some_and(|r| r.passed)
}

/// The full audit report as a JSON string. Owned by the run; null for a
/// null handle.
///
/// # Safety
/// `run` must be null or a live run handle; the string dies with it.
#[no_mangle]
pub unsafe extern "C" fn frontmesh_run_report_json(run: *const FrontmeshRun) -> *const c_char {
    run.as_ref()
        .map_or(ptr::null(), |r| r.report_json.as_ptr())
}
