//! Convex geometry kernel for planar and spatial cells.
//!
//! Cells are bounded convex polytopes that only ever shrink by one
//! halfspace at a time, so planar cells are kept as counter-clockwise
//! vertex rings and spatial cells as indexed face loops updated by
//! clipping. No general vertex enumeration is needed.

mod cuboid;
mod facet;
mod hyperplane;
mod polyhedron;
mod polytope;
mod vector;

pub use cuboid::CuboidRegion;
pub use facet::Facet;
pub use hyperplane::{Halfspace, Hyperplane};
pub use polytope::{ConvexPolytope, IntrinsicFeatures, SplitOutcome};
pub use vector::{Dim, Vector};
pub(crate) use polyhedron::plane_basis;

use thiserror::Error;

/// Relative tolerance of geometric predicates, scaled by cell diameter.
pub const PREDICATE_TOL: f64 = 1e-9;

/// Children smaller than this fraction of the parent volume are rejected.
pub const DEGENERATE_VOLUME_FRACTION: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("unsupported dimension {0}; only 2 and 3 are supported")]
    UnsupportedDimension(usize),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degenerate polytope: {0}")]
    Degenerate(&'static str),
    #[error("hyperplane normal must be nonzero")]
    ZeroNormal,
    #[error("split child has volume fraction {fraction:e} below threshold")]
    DegenerateSplit { fraction: f64 },
    #[error("empty cuboid: lower corner must be strictly below upper corner")]
    EmptyCuboid,
}
