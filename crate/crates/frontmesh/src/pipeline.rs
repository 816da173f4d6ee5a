//! End-to-end orchestration: parse, validate, size, split, triangulate,
//! refine, verify, emit. Shared by the command line and the C API.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::io::{lfs_dump, svg_string, write_ele, write_node};
use crate::pslg::{parse_poly, Pslg};
use crate::quality::{verify, QualityReport, VerifyConfig};
use crate::refine::{prepare, refine, Prepared, PrepareError, RefineConfig, RefineError, RefineStats};
use crate::splitter::required_astar;
use crate::Mode;

/// Everything a run needs to know, assembled by the front end.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub input: PathBuf,
    /// Target minimum angle in degrees, strictly between 0 and 30.
    pub theta_deg: f64,
    pub mode: Mode,
    /// Split density override; `None` derives it from the lemma conditions.
    pub nstar: Option<u32>,
    /// Abort on the first encroachment instead of recording it.
    pub strict: bool,
    pub max_insertions: u64,
    /// Write an SVG rendering here when set.
    pub svg: Option<PathBuf>,
    /// Report path override; default is the input with `.report.json`.
    pub report: Option<PathBuf>,
    pub dump_lfs: bool,
    pub dump_events: bool,
}

impl RunManifest {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        RunManifest {
            input: input.into(),
            theta_deg: 25.0,
            mode: Mode::Truly,
            nstar: None,
            strict: false,
            max_insertions: 1_000_000,
            svg: None,
            report: None,
            dump_lfs: false,
            dump_events: false,
        }
    }
}

/// A completed refinement run with its audit report.
pub struct RunResult {
    pub prepared: Prepared,
    pub stats: RefineStats,
    pub report: QualityReport,
}

#[derive(Debug, Error)]
pub enum RunError {
    /// Bad configuration or unusable input; maps to exit 1.
    #[error("{0}")]
    Invalid(String),
    /// The run hit a termination safety valve; maps to exit 2.
    #[error("{0}")]
    Nontermination(String),
    /// A strict-mode invariant was breached; maps to exit 3.
    #[error("{0}")]
    Verification(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Invalid(_) => 1,
            RunError::Nontermination(_) => 2,
            RunError::Verification(_) => 3,
        }
    }
}

/// The checks behind a zero exit code: Delaunay by mode, every subsegment
/// present, no encroached subsegment, and the target angle met outside
/// skipped triangles.
pub fn hard_checks_pass(report: &QualityReport, theta_star: f64) -> bool {
    report.delaunay_ok
        && report.pslg_conforming
        && report.encroachment_events == 0
        && report.min_angle_excluding_skipped >= theta_star - 1e-12
}

/// Runs the pipeline on an in-memory PSLG. All filesystem concerns live in
/// [`run`]; this is the entry point for library and C API callers.
pub fn execute(
    pslg: &Pslg,
    theta_deg: f64,
    mode: Mode,
    nstar: Option<u32>,
    strict: bool,
    max_insertions: u64,
) -> Result<RunResult, RunError> {
    if !theta_deg.is_finite() || theta_deg <= 0.0 {
        return Err(RunError::Invalid("theta must be positive".into()));
    }
    if theta_deg >= 30.0 {
        return Err(RunError::Invalid("theta must be below 30 degrees".into()));
    }
    let theta = theta_deg.to_radians();

    let mut prepared = prepare(pslg, theta, mode, nstar).map_err(|e| match e {
        e @ PrepareError::RecoveryFailed(_) => RunError::Nontermination(e.to_string()),
        other => RunError::Invalid(other.to_string()),
    })?;

    if nstar.is_some() {
        let required = required_astar(theta, mode);
        if prepared.bounds.a_star < required {
            log::warn!(
                "lemma conditions unsatisfied: A* = {:.3} below required {:.3}; encroachment possible",
                prepared.bounds.a_star,
                required
            );
        }
    }

    let config = RefineConfig {
        theta_star: theta,
        mode,
        strict,
        max_insertions,
    };
    let stats = refine(
        &mut prepared.mesh,
        &prepared.refined,
        &prepared.small_angles,
        &prepared.bounds,
        &config,
    )
    .map_err(|e| match e {
        RefineError::InsertionCap(_) => RunError::Nontermination(e.to_string()),
        RefineError::StrictEncroachment { .. } => RunError::Verification(e.to_string()),
    })?;

    let report = verify(
        &prepared.mesh,
        pslg,
        &prepared.refined,
        &VerifyConfig {
            theta_star: theta,
            mode,
            bounds: prepared.bounds,
        },
    );
    Ok(RunResult {
        prepared,
        stats,
        report,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    fs::write(path, contents)
        .map_err(|e| RunError::Invalid(format!("cannot write {}: {e}", path.display())))
}

/// Runs a manifest end to end: reads the `.poly` input, meshes it, writes
/// `.node`, `.ele`, the JSON report, and any requested extras, and returns
/// the process exit code.
pub fn run(manifest: &RunManifest) -> i32 {
    match run_inner(manifest) {
        Ok(code) => code,
        Err(e) => {
            log::error!("{e}");
            e.exit_code()
        }
    }
}

fn run_inner(manifest: &RunManifest) -> Result<i32, RunError> {
    let text = fs::read_to_string(&manifest.input).map_err(|e| {
        RunError::Invalid(format!("cannot read {}: {e}", manifest.input.display()))
    })?;
    let pslg = parse_poly(&text).map_err(|e| {
        RunError::Invalid(format!("{}: {e}", manifest.input.display()))
    })?;

    let result = execute(
        &pslg,
        manifest.theta_deg,
        manifest.mode,
        manifest.nstar,
        manifest.strict,
        manifest.max_insertions,
    )?;

    let mesh = &result.prepared.mesh;
    let refined = &result.prepared.refined;
    write_file(&manifest.input.with_extension("node"), &write_node(mesh, refined))?;
    write_file(&manifest.input.with_extension("ele"), &write_ele(mesh))?;

    let report_path = manifest
        .report
        .clone()
        .unwrap_or_else(|| manifest.input.with_extension("report.json"));
    let mut report_json = serde_json::to_string_pretty(&result.report)
        .map_err(|e| RunError::Invalid(format!("report serialization failed: {e}")))?;
    report_json.push('\n');
    write_file(&report_path, &report_json)?;

    if let Some(svg_path) = &manifest.svg {
        let svg = svg_string(
            mesh,
            refined,
            &result.prepared.small_angles,
            &result.prepared.bounds,
        )
        .map_err(|e| RunError::Invalid(e.to_string()))?;
        write_file(svg_path, &svg)?;
    }
    if manifest.dump_lfs {
        write_file(&manifest.input.with_extension("lfs.txt"), &lfs_dump(refined))?;
    }
    if manifest.dump_events {
        let mut events = serde_json::to_string_pretty(&result.stats.events)
            .map_err(|e| RunError::Invalid(format!("event serialization failed: {e}")))?;
        events.push('\n');
        write_file(&manifest.input.with_extension("events.json"), &events)?;
    }

    let theta = manifest.theta_deg.to_radians();
    if hard_checks_pass(&result.report, theta) {
        Ok(0)
    } else {
        log::error!(
            "verification failed: delaunay_ok={} pslg_conforming={} encroachment_events={} min_angle_excluding_skipped={:.4}deg",
            result.report.delaunay_ok,
            result.report.pslg_conforming,
            result.report.encroachment_events,
            result.report.min_angle_excluding_skipped.to_degrees()
        );
        Ok(3)
    }
}
