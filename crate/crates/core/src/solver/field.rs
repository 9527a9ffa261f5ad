//! Solved distance fields: nodal squared distance with pointwise evaluation.

use std::sync::Arc;

use crate::fem::{self, DofLayout};
use crate::mesh::TriMesh;

use super::{SolveError, SolveStatus};

/// Post-solve feasibility numbers, in the units of the stored field.
#[derive(Debug, Clone, Copy, Default)]
pub struct FieldResiduals {
    /// Largest |u| over source interpolation rows.
    pub max_source_abs: f64,
    /// Smallest cone slack `u(p) − ¼|∇u(p)|²` over all sample points.
    pub min_cone_slack: f64,
    /// Smallest nodal u before clamping.
    pub min_nodal_u: f64,
}

/// Nodal squared geodesic distance over a P2 layout, with `d = √u`.
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub mesh: Arc<TriMesh>,
    pub layout: DofLayout,
    /// Squared distance per node, in the mesh's own length² units.
    pub u: Vec<f64>,
    /// Distance per node.
    pub d: Vec<f64>,
    pub status: SolveStatus,
    pub residuals: FieldResiduals,
}

impl DistanceField {
    /// Squared distance at a point of a face (P2 interpolation).
    pub fn evaluate_u(&self, face: usize, lambda: [f64; 3]) -> Result<f64, SolveError> {
        Ok(fem::eval_p2_field(&self.mesh, &self.layout, &self.u, face, lambda)?)
    }

    /// Distance at a point of a face; tiny negative interpolated values are
    /// clamped to zero before the square root.
    pub fn evaluate_d(&self, face: usize, lambda: [f64; 3]) -> Result<f64, SolveError> {
        Ok(self.evaluate_u(face, lambda)?.max(0.0).sqrt())
    }

    /// Distance at the vertex nodes only (a piecewise-linear view).
    pub fn vertex_distances(&self) -> &[f64] {
        &self.d[..self.layout.n_vertex]
    }
}

/// Vertex-based distance field of the piecewise-linear baseline.
#[derive(Debug, Clone)]
pub struct PlDistanceField {
    pub mesh: Arc<TriMesh>,
    /// Distance per vertex.
    pub d: Vec<f64>,
    pub status: SolveStatus,
    /// Largest |d| over source vertices.
    pub max_source_abs: f64,
    /// Smallest per-face slack `1 − ‖∇d‖`.
    pub min_cone_slack: f64,
}

/// Rescales a solved squared-distance vector back to original units, clamps
/// round-off negatives, and takes the pointwise square root.
///
/// `scale` is the normalization factor (`original = scale × normalized`), so
/// u gains a factor `scale²`. Negative nodal values beyond
/// `tol_neg = 1e-7 × bbox_diag²` are a solver failure and rejected.
pub fn extract_distance(
    u_normalized: &[f64],
    mesh: &Arc<TriMesh>,
    layout: &DofLayout,
    scale: f64,
    status: SolveStatus,
    mut residuals: FieldResiduals,
) -> Result<DistanceField, SolveError> {
    if u_normalized.len() != layout.total() {
        return Err(SolveError::Dimension {
            expected: layout.total(),
            got: u_normalized.len(),
        });
    }
    let s2 = scale * scale;
    let tol_neg = 1e-7 * mesh.bbox_diagonal().powi(2);
    let mut u = Vec::with_capacity(u_normalized.len());
    let mut min_u = f64::INFINITY;
    for (node, &raw) in u_normalized.iter().enumerate() {
        let v = raw * s2;
        min_u = min_u.min(v);
        if v < -tol_neg {
            return Err(SolveError::NegativeField { node, value: v, tol: tol_neg });
        }
        u.push(v.max(0.0));
    }
    residuals.min_nodal_u = min_u;
    let d = u.iter().map(|&v| v.sqrt()).collect();
    Ok(DistanceField { mesh: mesh.clone(), layout: *layout, u, d, status, residuals })
}
