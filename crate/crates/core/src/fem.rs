//! Piecewise-quadratic (P2) and piecewise-linear (P1) Lagrange elements on
//! triangle meshes: basis evaluation and assembly of the discrete operators
//! used by the distance solver.
//!
//! P2 nodal values live on vertices and edge midpoints. Per face the six
//! local nodes are ordered corner 0, corner 1, corner 2, then the mid-edge
//! nodes between corners (0,1), (1,2), (2,0); all per-face node, sample and
//! gradient layouts follow this ordering. The gradient of a P2 function is
//! linear per face, stored as three corner samples of a 2D vector in the
//! face's tangent frame.

use thiserror::Error;

use crate::geom::{self, Vec3};
use crate::mesh::{face_frame, FaceFrame, TriMesh};
use crate::sources::SourcePoint;
use crate::sparse::SparseOperator;

#[derive(Debug, Error)]
pub enum FemError {
    #[error("invalid barycentric coordinates {0:?} (negative component or sum far from 1)")]
    BadBarycentric([f64; 3]),
    #[error("face index {face} out of range (mesh has {n_faces} faces)")]
    FaceIndex { face: usize, n_faces: usize },
}

/// P2 basis coefficients at the barycenter, in local node order.
pub const BARYCENTER_WEIGHTS: [f64; 6] =
    [-1.0 / 9.0, -1.0 / 9.0, -1.0 / 9.0, 4.0 / 9.0, 4.0 / 9.0, 4.0 / 9.0];

/// P2 mass matrix of one face is `area / 180` times this matrix.
const MASS_P2_INT: [[f64; 6]; 6] = [
    [6.0, -1.0, -1.0, 0.0, -4.0, 0.0],
    [-1.0, 6.0, -1.0, 0.0, 0.0, -4.0],
    [-1.0, -1.0, 6.0, -4.0, 0.0, 0.0],
    [0.0, 0.0, -4.0, 32.0, 16.0, 16.0],
    [-4.0, 0.0, 0.0, 16.0, 32.0, 16.0],
    [0.0, -4.0, 0.0, 16.0, 16.0, 32.0],
];

/// P2 nodal indexing: vertex nodes first, then mid-edge nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofLayout {
    pub n_vertex: usize,
    pub n_edge: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Vertex(usize),
    Edge(usize),
}

impl DofLayout {
    pub fn new(mesh: &TriMesh) -> Self {
        Self { n_vertex: mesh.n_vertices(), n_edge: mesh.n_edges() }
    }

    pub fn total(&self) -> usize {
        self.n_vertex + self.n_edge
    }

    #[inline]
    pub fn vertex_node(&self, v: usize) -> usize {
        v
    }

    #[inline]
    pub fn edge_node(&self, e: usize) -> usize {
        self.n_vertex + e
    }

    pub fn node_kind(&self, node: usize) -> NodeKind {
        if node < self.n_vertex {
            NodeKind::Vertex(node)
        } else {
            NodeKind::Edge(node - self.n_vertex)
        }
    }
}

/// Global node indices of the six local nodes of face `f`.
pub fn face_nodes(mesh: &TriMesh, layout: &DofLayout, f: usize) -> [usize; 6] {
    let [i, j, k] = mesh.face(f);
    let fe = mesh.face_edge_indices(f);
    [
        layout.vertex_node(i),
        layout.vertex_node(j),
        layout.vertex_node(k),
        layout.edge_node(fe[0].0),
        layout.edge_node(fe[1].0),
        layout.edge_node(fe[2].0),
    ]
}

/// Geometric position of a node (vertex or edge midpoint).
pub fn node_position(mesh: &TriMesh, layout: &DofLayout, node: usize) -> Vec3 {
    match layout.node_kind(node) {
        NodeKind::Vertex(v) => mesh.vertex(v),
        NodeKind::Edge(e) => mesh.edge_midpoint(e),
    }
}

fn check_barycentric(lambda: [f64; 3]) -> Result<(), FemError> {
    let sum = lambda[0] + lambda[1] + lambda[2];
    if lambda.iter().any(|&l| l < -1e-12) || (sum - 1.0).abs() > 1e-9 {
        return Err(FemError::BadBarycentric(lambda));
    }
    Ok(())
}

/// Values of the six quadratic Lagrange functions at `lambda`.
pub fn eval_p2_basis(lambda: [f64; 3]) -> Result<[f64; 6], FemError> {
    check_barycentric(lambda)?;
    let [l0, l1, l2] = lambda;
    Ok([
        l0 * (2.0 * l0 - 1.0),
        l1 * (2.0 * l1 - 1.0),
        l2 * (2.0 * l2 - 1.0),
        4.0 * l0 * l1,
        4.0 * l1 * l2,
        4.0 * l2 * l0,
    ])
}

/// Barycentric gradients of one face expressed in its tangent frame.
///
/// `∇λ_c` is the opposite edge rotated a quarter turn around the face normal,
/// divided by twice the area.
pub fn grad_lambda(frame: &FaceFrame, corners: [Vec3; 3]) -> [[f64; 2]; 3] {
    let n = geom::cross(geom::sub(corners[1], corners[0]), geom::sub(corners[2], corners[0]));
    let n = geom::normalize(n);
    let inv2a = 1.0 / (2.0 * frame.area);
    let mut out = [[0.0; 2]; 3];
    for c in 0..3 {
        let opp = geom::sub(corners[(c + 2) % 3], corners[(c + 1) % 3]);
        let rot = geom::cross(n, opp);
        out[c] = frame.project(geom::scale(rot, inv2a));
    }
    out
}

/// Gradients of the six P2 basis functions at `lambda`, in frame coordinates.
pub fn eval_p2_grad(
    lambda: [f64; 3],
    frame: &FaceFrame,
    corners: [Vec3; 3],
) -> Result<[[f64; 2]; 6], FemError> {
    check_barycentric(lambda)?;
    let gl = grad_lambda(frame, corners);
    let [l0, l1, l2] = lambda;
    let mut out = [[0.0; 2]; 6];
    for comp in 0..2 {
        out[0][comp] = (4.0 * l0 - 1.0) * gl[0][comp];
        out[1][comp] = (4.0 * l1 - 1.0) * gl[1][comp];
        out[2][comp] = (4.0 * l2 - 1.0) * gl[2][comp];
        out[3][comp] = 4.0 * (l0 * gl[1][comp] + l1 * gl[0][comp]);
        out[4][comp] = 4.0 * (l1 * gl[2][comp] + l2 * gl[1][comp]);
        out[5][comp] = 4.0 * (l2 * gl[0][comp] + l0 * gl[2][comp]);
    }
    Ok(out)
}

/// P1 mass matrix of one face.
pub fn mass_p1_block(area: f64) -> [[f64; 3]; 3] {
    let mut m = [[area / 12.0; 3]; 3];
    for d in 0..3 {
        m[d][d] = area / 6.0;
    }
    m
}

/// P2 mass matrix of one face.
pub fn mass_p2_block(area: f64) -> [[f64; 6]; 6] {
    let s = area / 180.0;
    let mut m = [[0.0; 6]; 6];
    for a in 0..6 {
        for b in 0..6 {
            m[a][b] = s * MASS_P2_INT[a][b];
        }
    }
    m
}

/// Gradient operator G: nodal u (|V|+|E|) → per-face corner gradient samples
/// (6 rows per face: `[g0x, g0y, g1x, g1y, g2x, g2y]`).
pub fn assemble_gradient(mesh: &TriMesh, layout: &DofLayout) -> SparseOperator {
    let mut triplets = Vec::with_capacity(mesh.n_faces() * 6 * 6);
    for f in 0..mesh.n_faces() {
        let frame = face_frame(mesh, f);
        let corners = mesh.face_corners(f);
        let nodes = face_nodes(mesh, layout, f);
        for c in 0..3 {
            let mut lambda = [0.0; 3];
            lambda[c] = 1.0;
            let grads = eval_p2_grad(lambda, &frame, corners).expect("unit barycentric");
            for comp in 0..2 {
                let row = 6 * f + 2 * c + comp;
                for l in 0..6 {
                    let v = grads[l][comp];
                    if v != 0.0 {
                        triplets.push((row, nodes[l], v));
                    }
                }
            }
        }
    }
    SparseOperator::from_triplets(6 * mesh.n_faces(), layout.total(), triplets)
        .expect("gradient assembly bounds")
}

/// P1 gradient operator: vertex values → one constant 2D gradient per face
/// (rows `[gx, gy]` per face).
pub fn assemble_gradient_p1(mesh: &TriMesh) -> SparseOperator {
    let mut triplets = Vec::with_capacity(mesh.n_faces() * 6);
    for f in 0..mesh.n_faces() {
        let frame = face_frame(mesh, f);
        let corners = mesh.face_corners(f);
        let gl = grad_lambda(&frame, corners);
        let face = mesh.face(f);
        for c in 0..3 {
            for comp in 0..2 {
                if gl[c][comp] != 0.0 {
                    triplets.push((2 * f + comp, face[c], gl[c][comp]));
                }
            }
        }
    }
    SparseOperator::from_triplets(2 * mesh.n_faces(), mesh.n_vertices(), triplets)
        .expect("p1 gradient bounds")
}

/// Assembled P1 mass matrix (|V| × |V|).
pub fn assemble_mass_p1(mesh: &TriMesh) -> SparseOperator {
    let mut triplets = Vec::with_capacity(mesh.n_faces() * 9);
    for f in 0..mesh.n_faces() {
        let block = mass_p1_block(mesh.face_area(f));
        let face = mesh.face(f);
        for a in 0..3 {
            for b in 0..3 {
                triplets.push((face[a], face[b], block[a][b]));
            }
        }
    }
    SparseOperator::from_triplets(mesh.n_vertices(), mesh.n_vertices(), triplets)
        .expect("p1 mass bounds")
}

/// Assembled global P2 mass matrix (|V|+|E| square): the per-face blocks
/// conjugated through the nodal map.
pub fn assemble_mass_p2(mesh: &TriMesh, layout: &DofLayout) -> SparseOperator {
    let mut triplets = Vec::with_capacity(mesh.n_faces() * 36);
    for f in 0..mesh.n_faces() {
        let block = mass_p2_block(mesh.face_area(f));
        let nodes = face_nodes(mesh, layout, f);
        for a in 0..6 {
            for b in 0..6 {
                if block[a][b] != 0.0 {
                    triplets.push((nodes[a], nodes[b], block[a][b]));
                }
            }
        }
    }
    SparseOperator::from_triplets(layout.total(), layout.total(), triplets)
        .expect("p2 mass bounds")
}

/// Vectorial mass matrix for corner gradient samples (6|F| square,
/// block-diagonal). The gradient field is linear per face, so each block is
/// the P1 mass matrix with the two components interleaved (Kronecker with the
/// 2×2 identity).
pub fn assemble_mass_vec(mesh: &TriMesh) -> SparseOperator {
    let mut triplets = Vec::with_capacity(mesh.n_faces() * 18);
    for f in 0..mesh.n_faces() {
        let block = mass_p1_block(mesh.face_area(f));
        for a in 0..3 {
            for b in 0..3 {
                for comp in 0..2 {
                    triplets.push((6 * f + 2 * a + comp, 6 * f + 2 * b + comp, block[a][b]));
                }
            }
        }
    }
    SparseOperator::from_triplets(6 * mesh.n_faces(), 6 * mesh.n_faces(), triplets)
        .expect("vector mass bounds")
}

/// The sampling operators of the conic constraint.
pub struct SamplingOps {
    /// Nodal values → per-face corner and mid-edge samples (6 rows/face).
    pub q2: SparseOperator,
    /// Nodal values → corner, mid-edge and barycenter samples (7 rows/face).
    pub q2_bar: SparseOperator,
    /// Corner gradient samples → gradient at the same 7 sample points
    /// (14 rows/face, x and y interleaved), by linear interpolation.
    pub qchi_bar: SparseOperator,
}

pub fn assemble_sampling(mesh: &TriMesh, layout: &DofLayout) -> SamplingOps {
    let nf = mesh.n_faces();
    let mut q2 = Vec::with_capacity(nf * 6);
    let mut q2_bar = Vec::with_capacity(nf * 12);
    let mut qchi = Vec::with_capacity(nf * 26);
    for f in 0..nf {
        let nodes = face_nodes(mesh, layout, f);
        for l in 0..6 {
            q2.push((6 * f + l, nodes[l], 1.0));
            q2_bar.push((7 * f + l, nodes[l], 1.0));
        }
        for l in 0..6 {
            q2_bar.push((7 * f + 6, nodes[l], BARYCENTER_WEIGHTS[l]));
        }
        // gradient samples: corners are picks, mid-edges average their two
        // corners, the barycenter averages all three
        for comp in 0..2 {
            for c in 0..3 {
                qchi.push((14 * f + 2 * c + comp, 6 * f + 2 * c + comp, 1.0));
            }
            for (s, (a, b)) in [(0usize, 1usize), (1, 2), (2, 0)].iter().enumerate() {
                let row = 14 * f + 2 * (3 + s) + comp;
                qchi.push((row, 6 * f + 2 * a + comp, 0.5));
                qchi.push((row, 6 * f + 2 * b + comp, 0.5));
            }
            let row = 14 * f + 2 * 6 + comp;
            for c in 0..3 {
                qchi.push((row, 6 * f + 2 * c + comp, 1.0 / 3.0));
            }
        }
    }
    SamplingOps {
        q2: SparseOperator::from_triplets(6 * nf, layout.total(), q2).expect("q2 bounds"),
        q2_bar: SparseOperator::from_triplets(7 * nf, layout.total(), q2_bar)
            .expect("q2_bar bounds"),
        qchi_bar: SparseOperator::from_triplets(14 * nf, 6 * nf, qchi).expect("qchi bounds"),
    }
}

/// Source interpolation operator B₂: one row per source point, carrying the
/// P2 basis values at the point on the containing face's six nodes.
pub fn assemble_b2(
    mesh: &TriMesh,
    layout: &DofLayout,
    sources: &[SourcePoint],
) -> Result<SparseOperator, FemError> {
    let mut triplets = Vec::with_capacity(sources.len() * 6);
    for (row, s) in sources.iter().enumerate() {
        if s.face >= mesh.n_faces() {
            return Err(FemError::FaceIndex { face: s.face, n_faces: mesh.n_faces() });
        }
        let basis = eval_p2_basis(s.lambda)?;
        let nodes = face_nodes(mesh, layout, s.face);
        for l in 0..6 {
            if basis[l] != 0.0 {
                triplets.push((row, nodes[l], basis[l]));
            }
        }
    }
    Ok(SparseOperator::from_triplets(sources.len(), layout.total(), triplets)
        .expect("b2 bounds"))
}

/// Samples a scalar function of position at every node.
pub fn sample_nodal<F: Fn(Vec3) -> f64>(mesh: &TriMesh, layout: &DofLayout, f: F) -> Vec<f64> {
    (0..layout.total()).map(|n| f(node_position(mesh, layout, n))).collect()
}

/// Evaluates the P2 interpolant of nodal values at a point in a face.
pub fn eval_p2_field(
    mesh: &TriMesh,
    layout: &DofLayout,
    values: &[f64],
    face: usize,
    lambda: [f64; 3],
) -> Result<f64, FemError> {
    if face >= mesh.n_faces() {
        return Err(FemError::FaceIndex { face, n_faces: mesh.n_faces() });
    }
    let basis = eval_p2_basis(lambda)?;
    let nodes = face_nodes(mesh, layout, face);
    Ok((0..6).map(|l| basis[l] * values[nodes[l]]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn basis_at_nodes_and_midpoints() {
        let b = eval_p2_basis([1.0, 0.0, 0.0]).unwrap();
        assert_eq!(b, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let b = eval_p2_basis([0.5, 0.5, 0.0]).unwrap();
        for (i, v) in b.iter().enumerate() {
            assert!(close(*v, if i == 3 { 1.0 } else { 0.0 }, 1e-15), "{b:?}");
        }
    }

    #[test]
    fn basis_at_barycenter() {
        let b = eval_p2_basis([1.0 / 3.0; 3]).unwrap();
        for l in 0..6 {
            assert!(close(b[l], BARYCENTER_WEIGHTS[l], 1e-15));
        }
    }

    #[test]
    fn bad_barycentric_rejected() {
        assert!(eval_p2_basis([0.5, 0.6, -0.1]).is_err());
        assert!(eval_p2_basis([0.5, 0.6, 0.2]).is_err());
    }

    #[test]
    fn grad_lambda_reference_triangle() {
        let m = shapes::single_triangle();
        let gl = grad_lambda(&crate::mesh::face_frame(&m, 0), m.face_corners(0));
        assert!(close(gl[0][0], -1.0, 1e-14) && close(gl[0][1], -1.0, 1e-14));
        assert!(close(gl[1][0], 1.0, 1e-14) && close(gl[1][1], 0.0, 1e-14));
        assert!(close(gl[2][0], 0.0, 1e-14) && close(gl[2][1], 1.0, 1e-14));
    }

    #[test]
    fn vertex_gradient_at_its_corner() {
        let m = shapes::single_triangle();
        let g =
            eval_p2_grad([1.0, 0.0, 0.0], &crate::mesh::face_frame(&m, 0), m.face_corners(0))
                .unwrap();
        // 4·∇λ0 − ∇λ0 = 3∇λ0 = (−3, −3) on the reference triangle
        assert!(close(g[0][0], -3.0, 1e-13) && close(g[0][1], -3.0, 1e-13));
    }

    #[test]
    fn gradients_sum_to_zero() {
        let m = shapes::icosahedron();
        let frame = crate::mesh::face_frame(&m, 7);
        let corners = m.face_corners(7);
        for lambda in [[0.2, 0.5, 0.3], [1.0, 0.0, 0.0], [0.1, 0.1, 0.8]] {
            let g = eval_p2_grad(lambda, &frame, corners).unwrap();
            for comp in 0..2 {
                let s: f64 = (0..6).map(|l| g[l][comp]).sum();
                assert!(s.abs() < 1e-12, "gradient sum {s}");
            }
        }
    }

    #[test]
    fn mass_p1_values_and_row_sums() {
        let block = mass_p1_block(0.5);
        assert!(close(block[0][0], 1.0 / 12.0, 1e-16));
        assert!(close(block[0][1], 1.0 / 24.0, 1e-16));
        for r in 0..3 {
            let s: f64 = block[r].iter().sum();
            assert!(close(s, 0.5 / 3.0, 1e-15));
        }
    }

    #[test]
    fn mass_p2_entries_and_row_sums() {
        let a = 0.5;
        let block = mass_p2_block(a);
        assert!(close(block[0][0], 1.0 / 60.0, 1e-16)); // 0.5·6/180
        for r in 0..3 {
            let s: f64 = block[r].iter().sum();
            assert!(close(s, 0.0, 1e-15), "vertex row sum {s}");
        }
        for r in 3..6 {
            let s: f64 = block[r].iter().sum();
            assert!(close(s, a / 3.0, 1e-15), "edge row sum {s}");
        }
    }

    #[test]
    fn global_masses_integrate_ones_to_area() {
        let m = shapes::icosahedron();
        let layout = DofLayout::new(&m);
        let m1 = assemble_mass_p1(&m);
        let ones_v = vec![1.0; m.n_vertices()];
        let a1: f64 = m1.apply(&ones_v).unwrap().iter().sum();
        assert!(close(a1, m.total_area(), 1e-12));
        let m2 = assemble_mass_p2(&m, &layout);
        let ones_n = vec![1.0; layout.total()];
        let a2: f64 = m2.apply(&ones_n).unwrap().iter().sum();
        assert!(close(a2, m.total_area(), 1e-12));
        assert!(m2.asymmetry() < 1e-14);
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        let m = shapes::icosahedron();
        let layout = DofLayout::new(&m);
        let g = assemble_gradient(&m, &layout);
        let gu = g.apply(&vec![1.0; layout.total()]).unwrap();
        assert!(gu.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn gradient_reproduces_affine_and_quadratic() {
        let m = shapes::unit_square();
        let layout = DofLayout::new(&m);
        let g = assemble_gradient(&m, &layout);
        // affine 2x − 3y + 1 → constant gradient (2, −3)
        let u = sample_nodal(&m, &layout, |p| 2.0 * p[0] - 3.0 * p[1] + 1.0);
        let gu = g.apply(&u).unwrap();
        for f in 0..m.n_faces() {
            let frame = crate::mesh::face_frame(&m, f);
            let want = frame.project([2.0, -3.0, 0.0]);
            for c in 0..3 {
                assert!(close(gu[6 * f + 2 * c], want[0], 1e-12));
                assert!(close(gu[6 * f + 2 * c + 1], want[1], 1e-12));
            }
        }
        // quadratic x² + y² → gradient (2x, 2y) at each corner
        let u = sample_nodal(&m, &layout, |p| p[0] * p[0] + p[1] * p[1]);
        let gu = g.apply(&u).unwrap();
        for f in 0..m.n_faces() {
            let frame = crate::mesh::face_frame(&m, f);
            let corners = m.face_corners(f);
            for c in 0..3 {
                let want = frame.project([2.0 * corners[c][0], 2.0 * corners[c][1], 0.0]);
                assert!(close(gu[6 * f + 2 * c], want[0], 1e-12));
                assert!(close(gu[6 * f + 2 * c + 1], want[1], 1e-12));
            }
        }
    }

    #[test]
    fn sampling_matrix_shapes_and_rows() {
        let m = shapes::unit_square();
        let layout = DofLayout::new(&m);
        let ops = assemble_sampling(&m, &layout);
        assert_eq!((ops.q2.rows(), ops.q2.cols()), (12, 9));
        assert_eq!((ops.q2_bar.rows(), ops.q2_bar.cols()), (14, 9));
        assert_eq!((ops.qchi_bar.rows(), ops.qchi_bar.cols()), (28, 12));
        // Q2 rows: exactly one entry of 1
        for r in 0..ops.q2.rows() {
            let row: Vec<_> = ops.q2.row(r).collect();
            assert_eq!(row.len(), 1);
            assert_eq!(row[0].1, 1.0);
        }
        // barycenter rows sum to 1
        for f in 0..m.n_faces() {
            let s: f64 = ops.q2_bar.row(7 * f + 6).map(|(_, v)| v).sum();
            assert!(close(s, 1.0, 1e-15));
        }
    }

    #[test]
    fn sampled_gradient_interpolates_exactly() {
        // u = x² + y² on a planar face: sampled gradient at the barycenter
        // must be (2x_c, 2y_c)
        let m = shapes::unit_square();
        let layout = DofLayout::new(&m);
        let u = sample_nodal(&m, &layout, |p| p[0] * p[0] + p[1] * p[1]);
        let ops = assemble_sampling(&m, &layout);
        let g = assemble_gradient(&m, &layout);
        let samples = ops.qchi_bar.apply(&g.apply(&u).unwrap()).unwrap();
        for f in 0..m.n_faces() {
            let frame = crate::mesh::face_frame(&m, f);
            let c = m.face_corners(f);
            let bary = [
                (c[0][0] + c[1][0] + c[2][0]) / 3.0,
                (c[0][1] + c[1][1] + c[2][1]) / 3.0,
                0.0,
            ];
            let want = frame.project([2.0 * bary[0], 2.0 * bary[1], 0.0]);
            assert!(close(samples[14 * f + 12], want[0], 1e-12));
            assert!(close(samples[14 * f + 13], want[1], 1e-12));
        }
    }

    #[test]
    fn b2_rows_for_special_points() {
        let m = shapes::unit_square();
        let layout = DofLayout::new(&m);
        // vertex source → unit row at the vertex node
        let s = SourcePoint { face: 0, lambda: [1.0, 0.0, 0.0] };
        let b = assemble_b2(&m, &layout, &[s]).unwrap();
        let row: Vec<_> = b.row(0).collect();
        assert_eq!(row, vec![(0, 1.0)]);
        // edge midpoint source → unit row at the mid-edge node
        let s = SourcePoint { face: 0, lambda: [0.5, 0.5, 0.0] };
        let b = assemble_b2(&m, &layout, &[s]).unwrap();
        let row: Vec<_> = b.row(0).collect();
        assert_eq!(row.len(), 1);
        assert!(row[0].0 >= layout.n_vertex && close(row[0].1, 1.0, 1e-15));
        // barycenter source → the barycenter weights
        let s = SourcePoint { face: 0, lambda: [1.0 / 3.0; 3] };
        let b = assemble_b2(&m, &layout, &[s]).unwrap();
        let nodes = face_nodes(&m, &layout, 0);
        for (l, node) in nodes.iter().enumerate() {
            let got = b.row(0).find(|&(c, _)| c == *node).map(|(_, v)| v).unwrap();
            assert!(close(got, BARYCENTER_WEIGHTS[l], 1e-15));
        }
    }

    #[test]
    fn b2_rejects_bad_input() {
        let m = shapes::single_triangle();
        let layout = DofLayout::new(&m);
        let bad_face = SourcePoint { face: 5, lambda: [1.0, 0.0, 0.0] };
        assert!(matches!(
            assemble_b2(&m, &layout, &[bad_face]),
            Err(FemError::FaceIndex { face: 5, .. })
        ));
        let bad_lambda = SourcePoint { face: 0, lambda: [0.9, 0.9, -0.8] };
        assert!(matches!(
            assemble_b2(&m, &layout, &[bad_lambda]),
            Err(FemError::BadBarycentric(_))
        ));
    }

    #[test]
    fn vector_mass_measures_dirichlet_energy_of_linear_field() {
        // u = x on one planar face: gᵀ M_χ g = area
        let m = shapes::single_triangle();
        let layout = DofLayout::new(&m);
        let u = sample_nodal(&m, &layout, |p| p[0]);
        let g = assemble_gradient(&m, &layout).apply(&u).unwrap();
        let mv = assemble_mass_vec(&m);
        let e: f64 = g
            .iter()
            .zip(mv.apply(&g).unwrap())
            .map(|(a, b)| a * b)
            .sum();
        assert!(close(e, m.face_area(0), 1e-13));
    }

    #[test]
    fn global_mass_matches_explicit_conjugation() {
        // scatter assembly must equal Q₂ᵀ · blockdiag(M₂) · Q₂
        let m = shapes::unit_square();
        let layout = DofLayout::new(&m);
        let direct = assemble_mass_p2(&m, &layout);
        let ops = assemble_sampling(&m, &layout);
        let mut blocks = Vec::new();
        for f in 0..m.n_faces() {
            let b = mass_p2_block(m.face_area(f));
            for a in 0..6 {
                for c in 0..6 {
                    if b[a][c] != 0.0 {
                        blocks.push((6 * f + a, 6 * f + c, b[a][c]));
                    }
                }
            }
        }
        let m2 = SparseOperator::from_triplets(12, 12, blocks).unwrap();
        let conj = ops.q2.transpose().multiply(&m2).unwrap().multiply(&ops.q2).unwrap();
        let d1 = direct.to_dense();
        let d2 = conj.to_dense();
        for r in 0..d1.len() {
            for c in 0..d1[r].len() {
                assert!(close(d1[r][c], d2[r][c], 1e-15));
            }
        }
    }
}
