//! Triangle mesh representation: indexed faces, a canonical edge table,
//! per-face geometry, subdivision and the small geometric transforms the
//! harness needs (sphere projection, normalization, vertex noise).

pub mod io;
pub mod shapes;

use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::geom::{self, Vec3};

/// Relative area threshold below which a face counts as degenerate
/// (relative to the squared bounding-box diagonal).
pub const EPS_AREA_DEFAULT: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path} at line {line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("mesh has no faces")]
    EmptyMesh,
    #[error("face {face} is degenerate (area {area:.3e} below threshold {threshold:.3e})")]
    DegenerateFace { face: usize, area: f64, threshold: f64 },
    #[error("face {face} references invalid or repeated vertices {indices:?} (vertex count {n_vertices})")]
    InvalidFace { face: usize, indices: [usize; 3], n_vertices: usize },
    #[error("projection center coincides with vertex {vertex}")]
    CenterCoincidence { vertex: usize },
    #[error("unsupported mesh format {0:?} (expected obj, off or ply)")]
    UnsupportedFormat(String),
}

/// Where a vertex of a subdivided mesh comes from in the coarse mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexOrigin {
    Vertex(usize),
    Edge(usize),
}

/// Orthonormal tangent frame of one face.
///
/// `e1` points along the first face edge, `e2 = n × e1`; in-plane vectors are
/// expressed as `(w·e1, w·e2)`.
#[derive(Debug, Clone, Copy)]
pub struct FaceFrame {
    pub origin: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
    pub area: f64,
}

impl FaceFrame {
    /// Coordinates of an ambient vector in the tangent frame.
    #[inline]
    pub fn project(&self, w: Vec3) -> [f64; 2] {
        [geom::dot(w, self.e1), geom::dot(w, self.e2)]
    }
}

/// Indexed triangle surface with a canonical edge table.
///
/// Edges are undirected vertex pairs (min index first), sorted
/// lexicographically, so degree-of-freedom numbering is reproducible for
/// identical input. Non-manifold edges (more than two incident faces) are
/// allowed and share a single edge entry. Immutable after construction.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    /// Per face: edge index and whether the face traverses it min→max.
    /// Local edge k connects corners k and (k+1)%3.
    face_edges: Vec<[(usize, bool); 3]>,
    /// True for edges with exactly one incident face.
    boundary_edge: Vec<bool>,
    areas: Vec<f64>,
    /// Incident faces per vertex, each list ascending.
    vertex_faces: Vec<Vec<usize>>,
}

impl TriMesh {
    /// Builds a mesh with the default degeneracy threshold.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        Self::build(vertices, faces, EPS_AREA_DEFAULT)
    }

    /// Builds a mesh, rejecting faces with area below `eps_area · bbox_diag²`.
    pub fn build(
        vertices: Vec<Vec3>,
        faces: Vec<[usize; 3]>,
        eps_area: f64,
    ) -> Result<Self, MeshError> {
        if faces.is_empty() {
            return Err(MeshError::EmptyMesh);
        }
        let n = vertices.len();
        for (fi, f) in faces.iter().enumerate() {
            if f[0] >= n || f[1] >= n || f[2] >= n || f[0] == f[1] || f[1] == f[2] || f[0] == f[2]
            {
                return Err(MeshError::InvalidFace { face: fi, indices: *f, n_vertices: n });
            }
        }

        let diag2 = bbox_diagonal(&vertices).powi(2);
        let threshold = eps_area * diag2;
        let mut areas = Vec::with_capacity(faces.len());
        for (fi, f) in faces.iter().enumerate() {
            let a = triangle_area(vertices[f[0]], vertices[f[1]], vertices[f[2]]);
            if !(a > threshold) {
                return Err(MeshError::DegenerateFace { face: fi, area: a, threshold });
            }
            areas.push(a);
        }

        let mut mesh = Self::assemble_topology(vertices, faces);
        mesh.areas = areas;
        Ok(mesh)
    }

    /// Rebuild used by transforms that keep the connectivity valid
    /// (subdivision, projection, noise); areas are recomputed, not re-checked.
    fn from_parts(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Self {
        let areas = faces
            .iter()
            .map(|f| triangle_area(vertices[f[0]], vertices[f[1]], vertices[f[2]]))
            .collect();
        let mut mesh = Self::assemble_topology(vertices, faces);
        mesh.areas = areas;
        mesh
    }

    fn assemble_topology(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Self {
        let mut pairs: Vec<[usize; 2]> = Vec::with_capacity(faces.len() * 3);
        for f in &faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                pairs.push([a.min(b), a.max(b)]);
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        let edges = pairs;

        let edge_index = |key: [usize; 2]| -> usize {
            edges.binary_search(&key).expect("edge key present")
        };

        let mut face_edges = Vec::with_capacity(faces.len());
        let mut incident = vec![0usize; edges.len()];
        for f in &faces {
            let mut fe = [(0usize, false); 3];
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let e = edge_index([a.min(b), a.max(b)]);
                fe[k] = (e, a < b);
                incident[e] += 1;
            }
            face_edges.push(fe);
        }
        let boundary_edge = incident.iter().map(|&c| c == 1).collect();

        let mut vertex_faces = vec![Vec::new(); vertices.len()];
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                vertex_faces[v].push(fi);
            }
        }

        Self {
            vertices,
            faces,
            edges,
            face_edges,
            boundary_edge,
            areas: Vec::new(),
            vertex_faces,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn vertex(&self, v: usize) -> Vec3 {
        self.vertices[v]
    }

    pub fn face(&self, f: usize) -> [usize; 3] {
        self.faces[f]
    }

    pub fn face_corners(&self, f: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Edge indices of face `f` with orientation flags; local edge k joins
    /// corners k and (k+1)%3.
    pub fn face_edge_indices(&self, f: usize) -> [(usize, bool); 3] {
        self.face_edges[f]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.boundary_edge[e]
    }

    pub fn face_area(&self, f: usize) -> f64 {
        self.areas[f]
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Incident faces of a vertex, ascending.
    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }

    pub fn edge_midpoint(&self, e: usize) -> Vec3 {
        let [a, b] = self.edges[e];
        geom::lerp(self.vertices[a], self.vertices[b], 0.5)
    }

    pub fn bbox_diagonal(&self) -> f64 {
        bbox_diagonal(&self.vertices)
    }

    pub fn mean_edge_length(&self) -> f64 {
        let total: f64 = self
            .edges
            .iter()
            .map(|&[a, b]| geom::distance(self.vertices[a], self.vertices[b]))
            .sum();
        total / self.edges.len() as f64
    }

    /// Position at barycentric coordinates inside a face.
    pub fn point_at(&self, f: usize, lambda: [f64; 3]) -> Vec3 {
        let [a, b, c] = self.face_corners(f);
        [
            lambda[0] * a[0] + lambda[1] * b[0] + lambda[2] * c[0],
            lambda[0] * a[1] + lambda[1] * b[1] + lambda[2] * c[1],
            lambda[0] * a[2] + lambda[1] * b[2] + lambda[2] * c[2],
        ]
    }

    /// Euler characteristic V - E + F.
    pub fn euler_characteristic(&self) -> isize {
        self.n_vertices() as isize - self.n_edges() as isize + self.n_faces() as isize
    }

    /// Longest edge over its own height, maximized over faces.
    pub fn max_aspect_ratio(&self) -> f64 {
        (0..self.n_faces())
            .map(|f| {
                let [a, b, c] = self.face_corners(f);
                let longest = geom::distance(a, b)
                    .max(geom::distance(b, c))
                    .max(geom::distance(c, a));
                longest * longest / (2.0 * self.areas[f])
            })
            .fold(0.0, f64::max)
    }
}

/// Deterministic orthonormal tangent frame of face `f`.
pub fn face_frame(mesh: &TriMesh, f: usize) -> FaceFrame {
    let [p0, p1, p2] = mesh.face_corners(f);
    let e1 = geom::normalize(geom::sub(p1, p0));
    let n = geom::normalize(geom::cross(geom::sub(p1, p0), geom::sub(p2, p0)));
    let e2 = geom::cross(n, e1);
    FaceFrame { origin: p0, e1, e2, area: mesh.face_area(f) }
}

/// Loads a mesh from OBJ, OFF or PLY, inferring the format from the extension.
pub fn load_mesh(path: &str) -> Result<TriMesh, MeshError> {
    io::load(path)
}

/// Splits every face into four via edge midpoints.
///
/// The fine mesh has `|V| + |E|` vertices: coarse vertex v keeps index v and
/// the midpoint of coarse edge e becomes vertex `|V| + e`. Fine faces appear
/// in face-major order, four per coarse face `(i, j, k)` with midpoints
/// `m01, m12, m20`:
/// `(i, m01, m20)`, `(m01, j, m12)`, `(m20, m12, k)`, `(m01, m12, m20)`.
/// The returned map records each fine vertex's coarse origin, which makes
/// quadratic-field prolongation exact (nodal values sit precisely there).
pub fn subdivide_1to4(mesh: &TriMesh) -> (TriMesh, Vec<VertexOrigin>) {
    let nv = mesh.n_vertices();
    let ne = mesh.n_edges();
    let mut vertices = Vec::with_capacity(nv + ne);
    vertices.extend_from_slice(mesh.vertices());
    for e in 0..ne {
        vertices.push(mesh.edge_midpoint(e));
    }

    let mut faces = Vec::with_capacity(mesh.n_faces() * 4);
    for f in 0..mesh.n_faces() {
        let [i, j, k] = mesh.face(f);
        let fe = mesh.face_edge_indices(f);
        let m01 = nv + fe[0].0;
        let m12 = nv + fe[1].0;
        let m20 = nv + fe[2].0;
        faces.push([i, m01, m20]);
        faces.push([m01, j, m12]);
        faces.push([m20, m12, k]);
        faces.push([m01, m12, m20]);
    }

    let mut origins = Vec::with_capacity(nv + ne);
    origins.extend((0..nv).map(VertexOrigin::Vertex));
    origins.extend((0..ne).map(VertexOrigin::Edge));

    (TriMesh::from_parts(vertices, faces), origins)
}

/// Moves every vertex onto the sphere of given center and radius.
pub fn project_to_sphere(
    mesh: &TriMesh,
    center: Vec3,
    radius: f64,
) -> Result<TriMesh, MeshError> {
    let mut vertices = Vec::with_capacity(mesh.n_vertices());
    for (vi, &v) in mesh.vertices().iter().enumerate() {
        let r = geom::sub(v, center);
        let n = geom::norm(r);
        if n == 0.0 {
            return Err(MeshError::CenterCoincidence { vertex: vi });
        }
        vertices.push(geom::add(center, geom::scale(r, radius / n)));
    }
    Ok(TriMesh::from_parts(vertices, mesh.faces().to_vec()))
}

/// Uniformly scales the mesh to unit bounding-box diagonal.
///
/// Returns the scale `s` with `original = s × normalized`; squared-distance
/// fields computed on the normalized mesh must be multiplied by `s²`.
pub fn normalize_mesh(mesh: &TriMesh) -> (TriMesh, f64) {
    let s = mesh.bbox_diagonal();
    let vertices = mesh.vertices().iter().map(|&v| geom::scale(v, 1.0 / s)).collect();
    (TriMesh::from_parts(vertices, mesh.faces().to_vec()), s)
}

/// Perturbs every vertex coordinate with i.i.d. Gaussian noise of deviation
/// `sigma`, deterministically for a given seed.
pub fn add_gaussian_noise(mesh: &TriMesh, sigma: f64, seed: u64) -> TriMesh {
    assert!(sigma >= 0.0, "sigma must be nonnegative");
    if sigma == 0.0 {
        return mesh.clone();
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("valid sigma");
    let vertices = mesh
        .vertices()
        .iter()
        .map(|&v| {
            [
                v[0] + normal.sample(&mut rng),
                v[1] + normal.sample(&mut rng),
                v[2] + normal.sample(&mut rng),
            ]
        })
        .collect();
    TriMesh::from_parts(vertices, mesh.faces().to_vec())
}

pub(crate) fn triangle_area(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    0.5 * geom::norm(geom::cross(geom::sub(b, a), geom::sub(c, a)))
}

fn bbox_diagonal(vertices: &[Vec3]) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for v in vertices {
        for k in 0..3 {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    geom::distance(hi, lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom;

    use super::shapes::{icosahedron, single_triangle as right_triangle, unit_square};

    #[test]
    fn single_triangle_counts() {
        let m = right_triangle();
        assert_eq!((m.n_vertices(), m.n_edges(), m.n_faces()), (3, 3, 1));
    }

    #[test]
    fn square_counts() {
        let m = unit_square();
        assert_eq!((m.n_vertices(), m.n_edges(), m.n_faces()), (4, 5, 2));
    }

    #[test]
    fn icosahedron_counts() {
        let m = icosahedron();
        assert_eq!((m.n_vertices(), m.n_edges(), m.n_faces()), (12, 30, 20));
    }

    #[test]
    fn frame_reference_triangle() {
        let m = right_triangle();
        let fr = face_frame(&m, 0);
        assert!(geom::distance(fr.e1, [1.0, 0.0, 0.0]) < 1e-15);
        assert!(geom::distance(fr.e2, [0.0, 1.0, 0.0]) < 1e-15);
        assert!((fr.area - 0.5).abs() < 1e-15);
    }

    #[test]
    fn frame_scaling() {
        let s = 2.5;
        let m = TriMesh::new(
            vec![[0.0, 0.0, 0.0], [s, 0.0, 0.0], [0.0, s, 0.0]],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert!((face_frame(&m, 0).area - 0.5 * s * s).abs() < 1e-12);
    }

    #[test]
    fn frame_base_height() {
        let m = TriMesh::new(
            vec![[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 3.0, 0.0]],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert!((face_frame(&m, 0).area - 3.0).abs() < 1e-12);
    }

    #[test]
    fn frames_orthonormal_everywhere() {
        let m = icosahedron();
        for f in 0..m.n_faces() {
            let fr = face_frame(&m, f);
            assert!(geom::dot(fr.e1, fr.e2).abs() <= 1e-12);
            assert!((geom::norm(fr.e1) - 1.0).abs() <= 1e-12);
            assert!((geom::norm(fr.e2) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn degenerate_face_rejected() {
        let err = TriMesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]],
            vec![[0, 1, 2]],
        )
        .unwrap_err();
        assert!(matches!(err, MeshError::DegenerateFace { face: 0, .. }));
    }

    #[test]
    fn empty_mesh_rejected() {
        assert!(matches!(
            TriMesh::new(vec![[0.0; 3]], vec![]),
            Err(MeshError::EmptyMesh)
        ));
    }

    #[test]
    fn edge_table_round_trip() {
        let m = icosahedron();
        for f in 0..m.n_faces() {
            let [i, j, k] = m.face(f);
            let fe = m.face_edge_indices(f);
            let expect = [[i, j], [j, k], [k, i]];
            for (slot, &[a, b]) in expect.iter().enumerate() {
                let (e, forward) = fe[slot];
                let key = m.edges()[e];
                assert_eq!(key, [a.min(b), a.max(b)]);
                assert_eq!(forward, a < b);
            }
        }
    }

    #[test]
    fn subdivide_single_triangle() {
        let (fine, origins) = subdivide_1to4(&right_triangle());
        assert_eq!((fine.n_vertices(), fine.n_faces()), (6, 4));
        assert_eq!(origins.len(), 6);
        assert_eq!(origins[0], VertexOrigin::Vertex(0));
        assert_eq!(origins[3], VertexOrigin::Edge(0));
    }

    #[test]
    fn subdivide_square_and_icosahedron_counts() {
        let (fs, _) = subdivide_1to4(&unit_square());
        assert_eq!((fs.n_vertices(), fs.n_faces()), (9, 8));
        let (fi, _) = subdivide_1to4(&icosahedron());
        assert_eq!((fi.n_vertices(), fi.n_faces()), (42, 80));
    }

    #[test]
    fn subdivide_conserves_planar_area_and_genus() {
        let m = unit_square();
        let (f, _) = subdivide_1to4(&m);
        assert!((f.total_area() - m.total_area()).abs() < 1e-14);
        let ico = icosahedron();
        let (fi, _) = subdivide_1to4(&ico);
        assert_eq!(fi.euler_characteristic(), ico.euler_characteristic());
    }

    #[test]
    fn project_to_unit_sphere() {
        let m = icosahedron();
        let scaled = TriMesh::from_parts(
            m.vertices().iter().map(|&v| geom::scale(v, 1.9)).collect(),
            m.faces().to_vec(),
        );
        let p = project_to_sphere(&scaled, [0.0; 3], 1.0).unwrap();
        for &v in p.vertices() {
            assert!((geom::norm(v) - 1.0).abs() < 1e-12);
        }
        // idempotent on an already-unit mesh
        let again = project_to_sphere(&p, [0.0; 3], 1.0).unwrap();
        for (a, b) in again.vertices().iter().zip(p.vertices()) {
            assert!(geom::distance(*a, *b) < 1e-12);
        }
        let r2 = project_to_sphere(&p, [0.0; 3], 2.0).unwrap();
        for &v in r2.vertices() {
            assert!((geom::norm(v) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn project_rejects_center_vertex() {
        let m = TriMesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert!(matches!(
            project_to_sphere(&m, [0.0; 3], 1.0),
            Err(MeshError::CenterCoincidence { vertex: 0 })
        ));
    }

    #[test]
    fn normalize_unit_diagonal() {
        let m = TriMesh::new(
            vec![[0.0, 0.0, 0.0], [4.0, 0.0, 0.0], [0.0, 0.00004, 0.0]],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let (n, s) = normalize_mesh(&m);
        assert!((s - m.bbox_diagonal()).abs() < 1e-12);
        assert!((n.bbox_diagonal() - 1.0).abs() < 1e-12);
        let (_, s1) = normalize_mesh(&n);
        assert!((s1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noise_zero_and_determinism() {
        let m = icosahedron();
        let same = add_gaussian_noise(&m, 0.0, 7);
        for (a, b) in same.vertices().iter().zip(m.vertices()) {
            assert_eq!(a, b);
        }
        let n1 = add_gaussian_noise(&m, 0.01, 42);
        let n2 = add_gaussian_noise(&m, 0.01, 42);
        for (a, b) in n1.vertices().iter().zip(n2.vertices()) {
            assert_eq!(a, b);
        }
        let n3 = add_gaussian_noise(&m, 0.01, 43);
        assert!(n1.vertices().iter().zip(n3.vertices()).any(|(a, b)| a != b));
    }

    #[test]
    fn noise_rms_matches_chi_statistics() {
        // Displacement per vertex is chi(3)-distributed with RMS sigma*sqrt(3).
        let mut mesh = icosahedron();
        while mesh.n_vertices() < 500 {
            mesh = subdivide_1to4(&mesh).0;
        }
        let (mesh, _) = normalize_mesh(&mesh);
        let sigma = 0.004;
        let noised = add_gaussian_noise(&mesh, sigma, 11);
        let ms: f64 = mesh
            .vertices()
            .iter()
            .zip(noised.vertices())
            .map(|(a, b)| geom::distance(*a, *b).powi(2))
            .sum::<f64>()
            / mesh.n_vertices() as f64;
        let rms = ms.sqrt();
        let expect = sigma * 3.0f64.sqrt();
        assert!(
            (rms - expect).abs() <= 0.2 * expect,
            "rms {rms} vs expected {expect}"
        );
    }

    #[test]
    fn nonmanifold_edge_shared_by_three_faces() {
        // three fins sharing the edge (0,1)
        let m = TriMesh::new(
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.5, 1.0, 0.0],
                [0.5, 0.0, 1.0],
                [0.5, -1.0, 0.2],
            ],
            vec![[0, 1, 2], [0, 1, 3], [0, 1, 4]],
        )
        .unwrap();
        assert_eq!(m.n_edges(), 7);
        let shared = m.edges().iter().position(|&e| e == [0, 1]).unwrap();
        assert!(!m.is_boundary_edge(shared));
        let incident = (0..3)
            .filter(|&f| m.face_edge_indices(f).iter().any(|&(e, _)| e == shared))
            .count();
        assert_eq!(incident, 3);
    }
}
