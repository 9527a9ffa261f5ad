//! Error measurement and benchmark machinery: subdivision hierarchies with
//! exact field prolongation, L₂/L∞/RMSE norms in the piecewise-linear space
//! of the finest mesh, analytic distance oracles, and the convergence and
//! noise-robustness harnesses.

use serde::Serialize;
use thiserror::Error;

use crate::fem::{self, DofLayout};
use crate::geom::{self, Vec3};
use crate::mesh::{self, TriMesh};
use crate::solver::{self, SolveError, SolveSettings};
use crate::sources::{self, SourceError, SourcePoint};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("field length {got} does not match mesh ({expected})")]
    Dimension { expected: usize, got: usize },
    #[error("field does not belong to hierarchy level {level}: {detail}")]
    MeshLineage { level: usize, detail: String },
    #[error("hierarchy level {level} out of range (levels 0..={max})")]
    LevelRange { level: usize, max: usize },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Source(#[from] SourceError),
}

/// Per-level error report of a convergence run.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub method: String,
    pub level: usize,
    /// Mean edge length of the mesh the method solved on.
    pub h_mean: f64,
    pub l2: f64,
    pub linf: f64,
    pub rmse: f64,
    pub n_fine_vertices: usize,
    pub wall_time_s: f64,
}

impl ErrorReport {
    pub fn csv_header() -> &'static str {
        "method,level,h_mean,l2,linf,rmse,n_fine_vertices,wall_time_s"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.method,
            self.level,
            self.h_mean,
            self.l2,
            self.linf,
            self.rmse,
            self.n_fine_vertices,
            self.wall_time_s
        )
    }
}

/// L₂, L∞ and relative RMS norms of a vertex error field: `L₂ = √(eᵀM₁e)`,
/// `RMSE = L₂(e)/L₂(1)`, `L∞ = max|e|`.
#[derive(Debug, Clone, Copy)]
pub struct ErrorNorms {
    pub l2: f64,
    pub linf: f64,
    pub rmse: f64,
}

pub fn l2_error(e: &[f64], fine_mesh: &TriMesh) -> Result<ErrorNorms, MetricsError> {
    if e.len() != fine_mesh.n_vertices() {
        return Err(MetricsError::Dimension { expected: fine_mesh.n_vertices(), got: e.len() });
    }
    let m1 = fem::assemble_mass_p1(fine_mesh);
    let me = m1.apply(e).expect("dimensions checked");
    let l2 = e.iter().zip(&me).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt();
    let l2_ones = fine_mesh.total_area().sqrt();
    let linf = e.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    Ok(ErrorNorms { l2, linf, rmse: l2 / l2_ones })
}

/// Euclidean distances from a source position (exact geodesics on flat
/// star-shaped regions seen from the kernel).
pub fn oracle_flat(source: Vec3, queries: &[Vec3]) -> Vec<f64> {
    queries.iter().map(|&q| geom::distance(source, q)).collect()
}

/// Great-circle distances on the sphere of given center and radius; inputs
/// are projected radially, the arccos argument clamped against round-off.
pub fn oracle_sphere(center: Vec3, radius: f64, source: Vec3, queries: &[Vec3]) -> Vec<f64> {
    let su = geom::normalize(geom::sub(source, center));
    queries
        .iter()
        .map(|&q| {
            let qu = geom::normalize(geom::sub(q, center));
            radius * geom::dot(su, qu).clamp(-1.0, 1.0).acos()
        })
        .collect()
}

/// A chain of 1-to-4 subdivisions with the lineage needed for exact
/// prolongation onto the finest level.
pub struct MeshHierarchy {
    meshes: Vec<TriMesh>,
    /// Optional sphere each level is projected onto after subdividing.
    sphere: Option<(Vec3, f64)>,
}

impl MeshHierarchy {
    /// Builds `levels + 1` meshes (the base plus `levels` refinements).
    pub fn build(base: TriMesh, levels: usize) -> Self {
        Self::build_inner(base, levels, None)
    }

    /// Same, projecting every level (including the base) onto a sphere.
    pub fn build_on_sphere(base: TriMesh, levels: usize, center: Vec3, radius: f64) -> Self {
        Self::build_inner(base, levels, Some((center, radius)))
    }

    fn build_inner(base: TriMesh, levels: usize, sphere: Option<(Vec3, f64)>) -> Self {
        let mut meshes = Vec::with_capacity(levels + 1);
        let mut current = match sphere {
            Some((c, r)) => mesh::project_to_sphere(&base, c, r).expect("projectable base"),
            None => base,
        };
        for _ in 0..levels {
            let (mut fine, _) = mesh::subdivide_1to4(&current);
            if let Some((c, r)) = sphere {
                fine = mesh::project_to_sphere(&fine, c, r).expect("projectable refinement");
            }
            meshes.push(current);
            current = fine;
        }
        meshes.push(current);
        Self { meshes, sphere }
    }

    pub fn levels(&self) -> usize {
        self.meshes.len() - 1
    }

    pub fn level(&self, k: usize) -> &TriMesh {
        &self.meshes[k]
    }

    pub fn finest(&self) -> &TriMesh {
        self.meshes.last().expect("nonempty hierarchy")
    }

    pub fn is_sphere(&self) -> Option<(Vec3, f64)> {
        self.sphere
    }

    /// For every face of the finest mesh: the ancestor face at `from` and the
    /// barycentric coordinates of the three fine corners within it.
    ///
    /// Children of face f are 4f+0..4f+3 in the order produced by
    /// `subdivide_1to4`: three corner triangles then the center triangle.
    fn lineage(&self, from: usize) -> Vec<(usize, [[f64; 3]; 3])> {
        let mut lin: Vec<(usize, [[f64; 3]; 3])> = (0..self.meshes[from].n_faces())
            .map(|f| (f, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]))
            .collect();
        for _ in from..self.levels() {
            let mut next = Vec::with_capacity(lin.len() * 4);
            for &(base, [b0, b1, b2]) in &lin {
                let m01 = mid(b0, b1);
                let m12 = mid(b1, b2);
                let m20 = mid(b2, b0);
                next.push((base, [b0, m01, m20]));
                next.push((base, [m01, b1, m12]));
                next.push((base, [m20, m12, b2]));
                next.push((base, [m01, m12, m20]));
            }
            lin = next;
        }
        lin
    }

    /// Prolongs P2 nodal values from level `from` onto the finest mesh's
    /// vertices by evaluating the quadratic interpolant. Exact for the field
    /// itself; no resampling loss.
    pub fn prolong_p2(&self, from: usize, u: &[f64]) -> Result<Vec<f64>, MetricsError> {
        self.check_level(from)?;
        let coarse = &self.meshes[from];
        let layout = DofLayout::new(coarse);
        if u.len() != layout.total() {
            return Err(MetricsError::MeshLineage {
                level: from,
                detail: format!("P2 field has {} values, layout needs {}", u.len(), layout.total()),
            });
        }
        let fine = self.finest();
        let mut out = vec![0.0; fine.n_vertices()];
        for (ff, &(base, barys)) in self.lineage(from).iter().enumerate() {
            let nodes = fem::face_nodes(coarse, &layout, base);
            let corners = fine.face(ff);
            for c in 0..3 {
                let basis = fem::eval_p2_basis(barys[c]).expect("lineage barycentric");
                out[corners[c]] = (0..6).map(|l| basis[l] * u[nodes[l]]).sum();
            }
        }
        Ok(out)
    }

    /// Prolongs vertex values from level `from` onto the finest mesh's
    /// vertices by linear interpolation.
    pub fn prolong_p1(&self, from: usize, d: &[f64]) -> Result<Vec<f64>, MetricsError> {
        self.check_level(from)?;
        let coarse = &self.meshes[from];
        if d.len() != coarse.n_vertices() {
            return Err(MetricsError::MeshLineage {
                level: from,
                detail: format!(
                    "P1 field has {} values, mesh has {} vertices",
                    d.len(),
                    coarse.n_vertices()
                ),
            });
        }
        let fine = self.finest();
        let mut out = vec![0.0; fine.n_vertices()];
        for (ff, &(base, barys)) in self.lineage(from).iter().enumerate() {
            let face = coarse.face(base);
            let corners = fine.face(ff);
            for c in 0..3 {
                out[corners[c]] = (0..3).map(|l| barys[c][l] * d[face[l]]).sum();
            }
        }
        Ok(out)
    }

    /// Prolongs a solved squared-distance field as `√(prolonged u)`, clamping
    /// interpolation round-off below zero.
    pub fn prolong_distance(
        &self,
        from: usize,
        field: &solver::DistanceField,
    ) -> Result<Vec<f64>, MetricsError> {
        let u = self.prolong_p2(from, &field.u)?;
        Ok(u.into_iter().map(|v| v.max(0.0).sqrt()).collect())
    }

    /// Re-locates a base-mesh source point on level `k` by descending the
    /// subdivision pattern. Vertex points keep their vertex index.
    pub fn source_at_level(
        &self,
        base_point: &SourcePoint,
        k: usize,
    ) -> Result<SourcePoint, MetricsError> {
        self.check_level(k)?;
        if let Some(v) = base_point.as_vertex(&self.meshes[0]) {
            return Ok(sources::source_from_vertex(&self.meshes[k], v)?);
        }
        let mut face = base_point.face;
        let mut lambda = base_point.lambda;
        for _ in 0..k {
            let (child, l) = descend(lambda);
            face = 4 * face + child;
            lambda = l;
        }
        Ok(SourcePoint { face, lambda })
    }

    fn check_level(&self, k: usize) -> Result<(), MetricsError> {
        if k > self.levels() {
            return Err(MetricsError::LevelRange { level: k, max: self.levels() });
        }
        Ok(())
    }
}

fn mid(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, (a[2] + b[2]) / 2.0]
}

/// One subdivision descent step: which child triangle contains `lambda` and
/// the coordinates within it.
fn descend(lambda: [f64; 3]) -> (usize, [f64; 3]) {
    let [l0, l1, l2] = lambda;
    if l0 >= 0.5 {
        (0, [1.0 - 2.0 * l1 - 2.0 * l2, 2.0 * l1, 2.0 * l2])
    } else if l1 >= 0.5 {
        (1, [2.0 * l0, 1.0 - 2.0 * l0 - 2.0 * l2, 2.0 * l2])
    } else if l2 >= 0.5 {
        (2, [2.0 * l0, 2.0 * l1, 1.0 - 2.0 * l0 - 2.0 * l1])
    } else {
        (3, [l0 + l1 - l2, l1 + l2 - l0, l2 + l0 - l1])
    }
}

/// Reference field of a convergence run.
#[derive(Debug, Clone, Copy)]
pub enum ConvergenceOracle {
    /// Euclidean distance; valid on flat meshes with kernel sources.
    Flat,
    /// Great circles on a sphere; every level is projected onto it.
    Sphere { center: Vec3, radius: f64 },
    /// Quadratic solve on the finest level (stated in reports as
    /// self-convergence, not ground truth).
    SelfReference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Pq,
    PlDfa,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Pq => "pq",
            Method::PlDfa => "dfa-pl",
        }
    }
}

/// Runs the subdivision convergence protocol for one method.
///
/// A hierarchy M₀..M_N is built (N = `levels`). The quadratic method solves
/// on M₀..M_{N−1}, the linear baseline on M₁..M_N — one level finer, which
/// equalizes the nodal count (|V|+|E| quadratic nodes on M_k are the vertices
/// of M_{k+1}). All solutions are prolonged onto M_N and measured there
/// against the oracle.
pub fn convergence_run(
    base: &TriMesh,
    source: &SourcePoint,
    method: Method,
    oracle: ConvergenceOracle,
    levels: usize,
    settings: &SolveSettings,
) -> Result<Vec<ErrorReport>, MetricsError> {
    let hierarchy = match oracle {
        ConvergenceOracle::Sphere { center, radius } => {
            MeshHierarchy::build_on_sphere(base.clone(), levels, center, radius)
        }
        _ => MeshHierarchy::build(base.clone(), levels),
    };

    let fine_vertices = hierarchy.finest().vertices();
    let d_ref: Vec<f64> = match oracle {
        ConvergenceOracle::Flat => {
            let pos = source.position(hierarchy.level(0));
            oracle_flat(pos, fine_vertices)
        }
        ConvergenceOracle::Sphere { center, radius } => {
            let pos = source.position(hierarchy.level(0));
            oracle_sphere(center, radius, pos, fine_vertices)
        }
        ConvergenceOracle::SelfReference => {
            let src = hierarchy.source_at_level(source, hierarchy.levels())?;
            let set = crate::sources::SourceSet::from_points(vec![src]);
            let field = solver::solve_geodesic(hierarchy.finest(), &set, settings)?;
            field.vertex_distances().to_vec()
        }
    };

    let solve_levels: Vec<usize> = match method {
        Method::Pq => (0..levels).collect(),
        Method::PlDfa => (1..=levels).collect(),
    };

    let mut reports = Vec::with_capacity(solve_levels.len());
    for k in solve_levels {
        let level_mesh = hierarchy.level(k);
        let src = hierarchy.source_at_level(source, k)?;
        let start = std::time::Instant::now();
        let d_fine = match method {
            Method::Pq => {
                let set = crate::sources::SourceSet::from_points(vec![src]);
                let field = solver::solve_geodesic(level_mesh, &set, settings)?;
                hierarchy.prolong_distance(k, &field)?
            }
            Method::PlDfa => {
                let v = src
                    .as_vertex(level_mesh)
                    .ok_or(SolveError::NonVertexSource { index: 0 })?;
                let field = solver::solve_geodesic_pl(level_mesh, &[v], settings)?;
                hierarchy.prolong_p1(k, &field.d)?
            }
        };
        let wall = start.elapsed().as_secs_f64();
        let e: Vec<f64> = d_fine.iter().zip(&d_ref).map(|(a, b)| a - b).collect();
        let norms = l2_error(&e, hierarchy.finest())?;
        reports.push(ErrorReport {
            method: method.name().to_string(),
            level: k,
            h_mean: level_mesh.mean_edge_length(),
            l2: norms.l2,
            linf: norms.linf,
            rmse: norms.rmse,
            n_fine_vertices: hierarchy.finest().n_vertices(),
            wall_time_s: wall,
        });
    }
    Ok(reports)
}

/// One noise-robustness measurement.
#[derive(Debug, Clone, Serialize)]
pub struct NoiseReport {
    pub sigma: f64,
    pub seed: u64,
    pub l2: f64,
    pub linf: f64,
}

impl NoiseReport {
    pub fn csv_header() -> &'static str {
        "sigma,seed,l2,linf"
    }

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{}", self.sigma, self.seed, self.l2, self.linf)
    }
}

/// Solves on Gaussian-perturbed copies of the mesh and measures the nodal
/// deviation from the clean solution. Connectivity is unchanged, so nodal
/// fields compare directly; the norm is taken in the linear space of the
/// once-subdivided clean mesh, whose vertices are exactly the P2 nodes.
pub fn noise_sweep(
    mesh: &TriMesh,
    source: &SourcePoint,
    sigmas: &[f64],
    seeds: &[u64],
    settings: &SolveSettings,
) -> Result<Vec<NoiseReport>, MetricsError> {
    let set = crate::sources::SourceSet::from_points(vec![*source]);
    let clean = solver::solve_geodesic(mesh, &set, settings)?;
    let (nodal_mesh, _) = mesh::subdivide_1to4(mesh);

    let mut reports = Vec::with_capacity(sigmas.len() * seeds.len());
    for &sigma in sigmas {
        for &seed in seeds {
            let d_noisy = if sigma == 0.0 {
                clean.d.clone()
            } else {
                let noised = mesh::add_gaussian_noise(mesh, sigma, seed);
                solver::solve_geodesic(&noised, &set, settings)?.d
            };
            let e: Vec<f64> = d_noisy.iter().zip(&clean.d).map(|(a, b)| a - b).collect();
            let norms = l2_error(&e, &nodal_mesh)?;
            reports.push(NoiseReport { sigma, seed, l2: norms.l2, linf: norms.linf });
        }
    }
    Ok(reports)
}

/// Median of a sample (average of the middle pair for even sizes).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Least-squares slope of log(y) against log(x).
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    assert!(points.len() >= 2);
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;

    #[test]
    fn norms_of_simple_fields() {
        let m = shapes::unit_square();
        let zeros = vec![0.0; m.n_vertices()];
        let n = l2_error(&zeros, &m).unwrap();
        assert_eq!((n.l2, n.linf, n.rmse), (0.0, 0.0, 0.0));

        let ones = vec![1.0; m.n_vertices()];
        let n = l2_error(&ones, &m).unwrap();
        assert!((n.l2 - m.total_area().sqrt()).abs() < 1e-14);
        assert!((n.rmse - 1.0).abs() < 1e-14);

        let mut spike = vec![0.0; m.n_vertices()];
        spike[2] = 3e-4;
        let n = l2_error(&spike, &m).unwrap();
        assert_eq!(n.linf, 3e-4);
    }

    #[test]
    fn norm_dimension_checked() {
        let m = shapes::unit_square();
        assert!(matches!(
            l2_error(&[0.0; 3], &m),
            Err(MetricsError::Dimension { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn sphere_oracle_values_and_symmetry() {
        let north = [0.0, 0.0, 1.0];
        let equator = [1.0, 0.0, 0.0];
        let south = [0.0, 0.0, -1.0];
        let r = 2.0;
        let d = oracle_sphere([0.0; 3], r, north, &[equator, south, north]);
        assert!((d[0] - std::f64::consts::FRAC_PI_2 * r).abs() < 1e-14);
        assert!((d[1] - std::f64::consts::PI * r).abs() < 1e-14);
        assert!(d[2].abs() < 1e-7);
        let ab = oracle_sphere([0.0; 3], r, north, &[equator])[0];
        let ba = oracle_sphere([0.0; 3], r, equator, &[north])[0];
        assert_eq!(ab, ba);
    }

    #[test]
    fn flat_oracle_three_four_five() {
        let d = oracle_flat([0.0, 0.0, 0.0], &[[3.0, 4.0, 0.0]]);
        assert!((d[0] - 5.0).abs() < 1e-15);
    }

    #[test]
    fn prolongation_reproduces_constants_and_quadratics() {
        let hierarchy = MeshHierarchy::build(shapes::unit_square(), 2);
        let base = hierarchy.level(0);
        let layout = DofLayout::new(base);

        let ones = vec![1.0; layout.total()];
        let fine = hierarchy.prolong_p2(0, &ones).unwrap();
        assert!(fine.iter().all(|&v| (v - 1.0).abs() < 1e-14));

        let u = fem::sample_nodal(base, &layout, |p| p[0] * p[0] + p[1] * p[1]);
        let fine = hierarchy.prolong_p2(0, &u).unwrap();
        for (v, q) in hierarchy.finest().vertices().iter().zip(&fine) {
            let want = v[0] * v[0] + v[1] * v[1];
            assert!((q - want).abs() < 1e-12, "quadratic prolongation exact");
        }

        // coarse vertices keep their values
        for v in 0..base.n_vertices() {
            assert!((fine[v] - u[v]).abs() < 1e-13);
        }

        // P1 prolongation of an affine field is exact too
        let d: Vec<f64> = base.vertices().iter().map(|p| 2.0 * p[0] - p[1]).collect();
        let fine = hierarchy.prolong_p1(0, &d).unwrap();
        for (v, q) in hierarchy.finest().vertices().iter().zip(&fine) {
            assert!((q - (2.0 * v[0] - v[1])).abs() < 1e-13);
        }
    }

    #[test]
    fn prolongation_is_linear() {
        let hierarchy = MeshHierarchy::build(shapes::single_triangle(), 1);
        let layout = DofLayout::new(hierarchy.level(0));
        let a = fem::sample_nodal(hierarchy.level(0), &layout, |p| p[0]);
        let b = fem::sample_nodal(hierarchy.level(0), &layout, |p| p[1] * p[1]);
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 2.0 * x + 3.0 * y).collect();
        let pa = hierarchy.prolong_p2(0, &a).unwrap();
        let pb = hierarchy.prolong_p2(0, &b).unwrap();
        let ps = hierarchy.prolong_p2(0, &sum).unwrap();
        for i in 0..ps.len() {
            assert!((ps[i] - (2.0 * pa[i] + 3.0 * pb[i])).abs() < 1e-13);
        }
    }

    #[test]
    fn lineage_dimension_errors() {
        let hierarchy = MeshHierarchy::build(shapes::unit_square(), 1);
        assert!(matches!(
            hierarchy.prolong_p2(0, &[0.0; 3]),
            Err(MetricsError::MeshLineage { .. })
        ));
        assert!(matches!(
            hierarchy.prolong_p1(2, &[0.0; 3]),
            Err(MetricsError::LevelRange { .. })
        ));
    }

    #[test]
    fn source_descends_to_correct_child() {
        let hierarchy = MeshHierarchy::build(shapes::single_triangle(), 2);
        let p = SourcePoint { face: 0, lambda: [0.1, 0.2, 0.7] };
        let base_pos = p.position(hierarchy.level(0));
        for k in 0..=2 {
            let s = hierarchy.source_at_level(&p, k).unwrap();
            let pos = s.position(hierarchy.level(k));
            assert!(geom::distance(base_pos, pos) < 1e-12, "level {k}");
            assert!(s.lambda.iter().all(|&l| l >= -1e-12));
        }
    }

    #[test]
    fn median_and_slope_helpers() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        let slope = log_log_slope(&[(1.0, 2.0), (2.0, 8.0), (4.0, 32.0)]);
        assert!((slope - 2.0).abs() < 1e-12);
    }
}
