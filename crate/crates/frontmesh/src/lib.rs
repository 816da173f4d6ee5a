//! Guaranteed-quality 2D Delaunay mesh refinement.
//!
//! The pipeline takes a planar straight-line graph (PSLG), splits every input
//! segment according to the local feature size by solving a mapping ODE, builds
//! a Delaunay or constrained Delaunay triangulation over the split vertices,
//! and then eliminates skinny triangles with advancing-front off-center Steiner
//! insertion. The result is a size-optimal mesh whose triangles respect a
//! caller-chosen minimum-angle target, with small input angles handled by a
//! provably safe skip rule.

pub mod cdt;
pub mod geometry;
pub mod io;
pub mod lfs;
pub mod pipeline;
pub mod pslg;
pub mod quality;
pub mod refine;
pub mod splitter;

pub use geometry::Point2;

use serde::{Deserialize, Serialize};

/// Which Delaunay property the final mesh must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Unrestricted empty-circumcircle property; input subsegments appear as
    /// mesh edges without being protected.
    Truly,
    /// Constrained Delaunay: subsegments are constraint edges and the
    /// empty-circumcircle test excuses vertices hidden behind them.
    Constrained,
}

/// Where a mesh vertex came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexOrigin {
    /// Original PSLG vertex.
    Input,
    /// Placed on an input segment by the splitter.
    Split,
    /// Inserted during refinement.
    Steiner,
}
