//! Conic programs for geodesic distance and their solution.
//!
//! The quadratic route maximizes ∫u (via the P2 mass matrix) subject to
//! `u ≥ ¼|∇u|²` sampled at seven points per face (three corners, three edge
//! midpoints, barycenter) and `u = 0` at the sources. Each sample point
//! contributes one rotated second-order cone `2·u(p)·2 ≥ ‖∇u(p)‖²` over the
//! nodal variables. The linear baseline maximizes ∫d subject to a per-face
//! gradient bound `‖∇d‖ ≤ 1` with vertex sources pinned to zero.
//!
//! Boundary nodes carry no constraints of their own; their values come out
//! of the optimization like everyone else's.
//!
//! Meshes are normalized to unit bounding-box diagonal before solving and
//! the fields rescaled afterwards (u by scale², d by scale).

mod backend;
mod field;
pub mod program;

use std::sync::Arc;

use thiserror::Error;

pub use field::{extract_distance, DistanceField, FieldResiduals, PlDistanceField};
pub use program::{BlockMeta, ConeBlock, ConicProgram, Equality, LinearExpr, SampleKind};

use crate::fem::{self, DofLayout, SamplingOps};
use crate::mesh::{self, TriMesh};
use crate::sources::SourceSet;
use crate::sparse::SparseOperator;

/// Environment variable overriding the default solver tolerance.
pub const TOL_ENV_VAR: &str = "GEO_SOLVER_TOL";

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("source set is empty")]
    NoSource,
    #[error("the linear baseline needs vertex sources; source {index} is not at a vertex")]
    NonVertexSource { index: usize },
    #[error("malformed program: {0}")]
    MalformedProgram(String),
    #[error("solver backend error: {0}")]
    Backend(String),
    #[error("solver finished {status:?} ({diagnostics})")]
    NonOptimal { status: SolveStatus, diagnostics: String },
    #[error("negative squared distance {value:.3e} at node {node} exceeds tolerance {tol:.3e}")]
    NegativeField { node: usize, value: f64, tol: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Fem(#[from] fem::FemError),
    #[error(transparent)]
    Sparse(#[from] crate::sparse::SparseError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveSettings {
    /// Interior-point feasibility/gap tolerance (relative).
    pub tol: f64,
    pub max_iter: u32,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 200 }
    }
}

impl SolveSettings {
    /// Default settings, honoring the `GEO_SOLVER_TOL` override.
    pub fn from_env() -> Self {
        let mut s = Self::default();
        if let Ok(v) = std::env::var(TOL_ENV_VAR) {
            if let Ok(tol) = v.parse::<f64>() {
                if tol > 0.0 {
                    s.tol = tol;
                }
            }
        }
        s
    }
}

/// Raw solver output for one program.
#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    pub status: SolveStatus,
    pub iterations: u32,
    pub solve_time_s: f64,
    pub objective_value: f64,
    pub diagnostics: String,
}

/// Solves a conic program with an interior-point method. Termination other
/// than `Optimal` is reported in the solution's status together with the
/// backend's diagnostic string.
pub fn solve(program: &ConicProgram, settings: &SolveSettings) -> Result<Solution, SolveError> {
    backend::solve(program, settings)
}

/// The assembled operators the quadratic program needs, all on one mesh.
pub struct PqOperators {
    pub layout: DofLayout,
    pub gradient: SparseOperator,
    /// Global P2 mass matrix (nodal × nodal).
    pub mass_global: SparseOperator,
    pub sampling: SamplingOps,
    /// Gradient sampled at the 7 per-face points: `Q̄χ · G` (14|F| × nodal).
    pub sampled_gradient: SparseOperator,
}

impl PqOperators {
    pub fn assemble(mesh: &TriMesh) -> Self {
        let layout = DofLayout::new(mesh);
        let gradient = fem::assemble_gradient(mesh, &layout);
        let mass_global = fem::assemble_mass_p2(mesh, &layout);
        let sampling = fem::assemble_sampling(mesh, &layout);
        let sampled_gradient =
            sampling.qchi_bar.multiply(&gradient).expect("Q̄χ·G dimensions");
        Self { layout, gradient, mass_global, sampling, sampled_gradient }
    }
}

/// Builds the quadratic-element program: minimize −(M₂·1)ᵀu with one rotated
/// cone per sample point and `B₂u = 0` at the sources.
pub fn build_pq_program(
    mesh: &TriMesh,
    ops: &PqOperators,
    sources: &SourceSet,
) -> Result<ConicProgram, SolveError> {
    if sources.is_empty() {
        return Err(SolveError::NoSource);
    }
    let n = ops.layout.total();
    let weights = ops.mass_global.apply(&vec![1.0; n])?;
    let objective: Vec<f64> = weights.iter().map(|w| -w).collect();

    let b2 = fem::assemble_b2(mesh, &ops.layout, &sources.points)?;
    let equalities = (0..b2.rows())
        .map(|r| Equality { lhs: LinearExpr::from_row(&b2, r), rhs: 0.0 })
        .collect();

    let mut cones = Vec::with_capacity(7 * mesh.n_faces());
    for f in 0..mesh.n_faces() {
        for s in 0..7 {
            let x = LinearExpr::from_row(&ops.sampling.q2_bar, 7 * f + s);
            let z = [
                LinearExpr::from_row(&ops.sampled_gradient, 14 * f + 2 * s),
                LinearExpr::from_row(&ops.sampled_gradient, 14 * f + 2 * s + 1),
            ];
            cones.push(ConeBlock::Rotated {
                x,
                y: LinearExpr::constant(2.0),
                z,
                meta: BlockMeta { face: f, sample: SampleKind::from_sample_index(s) },
            });
        }
    }

    Ok(ConicProgram { n_vars: n, objective, equalities, cones })
}

/// Builds the linear-baseline program: minimize −(M₁·1)ᵀd with one standard
/// cone `‖∇d‖ ≤ 1` per face and `d = 0` at the source vertices.
pub fn build_pl_program(
    mesh: &TriMesh,
    source_vertices: &[usize],
) -> Result<ConicProgram, SolveError> {
    if source_vertices.is_empty() {
        return Err(SolveError::NoSource);
    }
    let n = mesh.n_vertices();
    let m1 = fem::assemble_mass_p1(mesh);
    let weights = m1.apply(&vec![1.0; n])?;
    let objective: Vec<f64> = weights.iter().map(|w| -w).collect();

    let equalities = source_vertices
        .iter()
        .map(|&v| Equality { lhs: LinearExpr::unit(v), rhs: 0.0 })
        .collect();

    let g1 = fem::assemble_gradient_p1(mesh);
    let cones = (0..mesh.n_faces())
        .map(|f| ConeBlock::Soc {
            t: LinearExpr::constant(1.0),
            z: [LinearExpr::from_row(&g1, 2 * f), LinearExpr::from_row(&g1, 2 * f + 1)],
            meta: BlockMeta { face: f, sample: SampleKind::FaceGradient },
        })
        .collect();

    Ok(ConicProgram { n_vars: n, objective, equalities, cones })
}

/// Full quadratic pipeline: normalize, assemble, solve, rescale, extract.
pub fn solve_geodesic(
    mesh: &TriMesh,
    sources: &SourceSet,
    settings: &SolveSettings,
) -> Result<DistanceField, SolveError> {
    let (normalized, scale) = mesh::normalize_mesh(mesh);
    let ops = PqOperators::assemble(&normalized);
    let program = build_pq_program(&normalized, &ops, sources)?;
    let sol = solve(&program, settings)?;
    if sol.status != SolveStatus::Optimal {
        return Err(SolveError::NonOptimal { status: sol.status, diagnostics: sol.diagnostics });
    }
    let s2 = scale * scale;
    let residuals = FieldResiduals {
        max_source_abs: program.equality_residual(&sol.x) * s2,
        min_cone_slack: program.min_cone_slack(&sol.x) * s2,
        min_nodal_u: 0.0, // filled by extract_distance
    };
    extract_distance(&sol.x, &Arc::new(mesh.clone()), &ops.layout, scale, sol.status, residuals)
}

/// Full linear-baseline pipeline over vertex sources.
pub fn solve_geodesic_pl(
    mesh: &TriMesh,
    source_vertices: &[usize],
    settings: &SolveSettings,
) -> Result<PlDistanceField, SolveError> {
    let (normalized, scale) = mesh::normalize_mesh(mesh);
    let program = build_pl_program(&normalized, source_vertices)?;
    let sol = solve(&program, settings)?;
    if sol.status != SolveStatus::Optimal {
        return Err(SolveError::NonOptimal { status: sol.status, diagnostics: sol.diagnostics });
    }
    let d = sol.x.iter().map(|&v| v * scale).collect();
    Ok(PlDistanceField {
        mesh: Arc::new(mesh.clone()),
        d,
        status: sol.status,
        max_source_abs: program.equality_residual(&sol.x) * scale,
        min_cone_slack: program.min_cone_slack(&sol.x),
    })
}

/// Converts a source set to vertex indices for the linear baseline; fails on
/// edge- or face-interior points, which linear elements cannot represent.
pub fn vertex_sources(mesh: &TriMesh, sources: &SourceSet) -> Result<Vec<usize>, SolveError> {
    sources
        .points
        .iter()
        .enumerate()
        .map(|(index, p)| p.as_vertex(mesh).ok_or(SolveError::NonVertexSource { index }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;
    use crate::sources::SourcePoint;

    #[test]
    fn pq_program_counts_on_single_triangle() {
        let m = shapes::single_triangle();
        let ops = PqOperators::assemble(&m);
        let sources =
            SourceSet::from_points(vec![SourcePoint { face: 0, lambda: [1.0, 0.0, 0.0] }]);
        let p = build_pq_program(&m, &ops, &sources).unwrap();
        assert_eq!(p.n_vars, 6);
        assert_eq!(p.equalities.len(), 1);
        assert_eq!(p.cones.len(), 7);
        p.validate().unwrap();
    }

    #[test]
    fn pq_objective_weights_match_mass_row_sums() {
        // single triangle: vertex weights vanish, edge weights are area/3
        let m = shapes::single_triangle();
        let ops = PqOperators::assemble(&m);
        let sources =
            SourceSet::from_points(vec![SourcePoint { face: 0, lambda: [1.0, 0.0, 0.0] }]);
        let p = build_pq_program(&m, &ops, &sources).unwrap();
        let a = m.face_area(0);
        for v in 0..3 {
            assert!(p.objective[v].abs() < 1e-15);
        }
        for e in 3..6 {
            assert!((p.objective[e] + a / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_is_feasible_for_both_programs() {
        let m = shapes::unit_square();
        let ops = PqOperators::assemble(&m);
        let sources =
            SourceSet::from_points(vec![SourcePoint { face: 0, lambda: [1.0, 0.0, 0.0] }]);
        let pq = build_pq_program(&m, &ops, &sources).unwrap();
        let zero = vec![0.0; pq.n_vars];
        assert!(pq.equality_residual(&zero) == 0.0);
        assert!(pq.min_cone_slack(&zero) >= 0.0);
        let pl = build_pl_program(&m, &[0]).unwrap();
        let zero = vec![0.0; pl.n_vars];
        assert!(pl.equality_residual(&zero) == 0.0);
        assert!(pl.min_cone_slack(&zero) >= 0.0);
    }

    #[test]
    fn no_source_is_an_error() {
        let m = shapes::single_triangle();
        let ops = PqOperators::assemble(&m);
        assert!(matches!(
            build_pq_program(&m, &ops, &SourceSet::default()),
            Err(SolveError::NoSource)
        ));
    }

    #[test]
    fn non_vertex_source_rejected_for_baseline() {
        let m = shapes::unit_square();
        let sources =
            SourceSet::from_points(vec![SourcePoint { face: 0, lambda: [1.0 / 3.0; 3] }]);
        assert!(matches!(
            vertex_sources(&m, &sources),
            Err(SolveError::NonVertexSource { index: 0 })
        ));
    }

    #[test]
    fn program_dump_is_self_describing() {
        let m = shapes::single_triangle();
        let ops = PqOperators::assemble(&m);
        let sources =
            SourceSet::from_points(vec![SourcePoint { face: 0, lambda: [1.0, 0.0, 0.0] }]);
        let p = build_pq_program(&m, &ops, &sources).unwrap();
        let mut buf = Vec::new();
        p.write_dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("conic-program n_vars=6"));
        assert_eq!(text.matches("rotated-soc").count(), 7);
        assert_eq!(text.matches("\neq:").count(), 1);
    }
}
