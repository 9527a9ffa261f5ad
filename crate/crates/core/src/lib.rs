//! Geodesic distance fields on triangle meshes.
//!
//! The distance from a source set is computed in squared form `u = d²` as a
//! piecewise-quadratic (P2) finite-element field, obtained as the maximal
//! subsolution of the squared eikonal condition `u ≥ ¼|∇u|²` under a linear
//! objective. The constraint is a product of small second-order cones, so the
//! whole problem is a conic program solved by an interior-point method.
//! Because zeros of a quadratic can sit anywhere inside a triangle, sources
//! may be placed at vertices, on edges, or in face interiors.
//!
//! A piecewise-linear baseline (`|∇d| ≤ 1` per face, vertex sources only) is
//! included for comparison, together with error metrics, analytic oracles and
//! a subdivision-based convergence harness.

pub mod fem;
pub mod mesh;
pub mod metrics;
pub mod solver;
pub mod sources;
pub mod sparse;

mod geom;

pub use fem::DofLayout;
pub use mesh::TriMesh;
pub use solver::{DistanceField, PlDistanceField, SolveSettings, SolveStatus};
pub use sources::{SourcePoint, SourceSet};
pub use sparse::SparseOperator;
