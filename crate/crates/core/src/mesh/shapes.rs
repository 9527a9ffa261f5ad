//! Procedural test meshes: platonic solids, grids, fans and a few
//! deliberately bad triangulations used by the benchmark harness.

use super::{subdivide_1to4, TriMesh};
use crate::geom::{self, Vec3};

/// Single right triangle (0,0,0), (1,0,0), (0,1,0).
pub fn single_triangle() -> TriMesh {
    TriMesh::new(
        vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        vec![[0, 1, 2]],
    )
    .unwrap()
}

/// Unit square split along the (1,0)-(0,1) anti-diagonal.
pub fn unit_square() -> TriMesh {
    TriMesh::new(
        vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
        ],
        vec![[0, 1, 3], [1, 2, 3]],
    )
    .unwrap()
}

/// Unit square split along the (0,0)-(1,1) main diagonal.
pub fn unit_square_main_diagonal() -> TriMesh {
    TriMesh::new(
        vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
        ],
        vec![[0, 1, 2], [0, 2, 3]],
    )
    .unwrap()
}

/// n×n grid of unit/n squares covering [0,1]², each split along its
/// anti-diagonal.
pub fn square_grid(n: usize) -> TriMesh {
    assert!(n >= 1);
    let h = 1.0 / n as f64;
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 * h, j as f64 * h, 0.0]);
        }
    }
    let mut faces = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([a, b, d]);
            faces.push([b, c, d]);
        }
    }
    TriMesh::new(vertices, faces).unwrap()
}

/// Flat L-shaped domain [0,2]×[0,1] ∪ [0,1]×[1,2], six faces.
pub fn l_shape() -> TriMesh {
    let vertices = vec![
        [0.0, 0.0, 0.0], // 0
        [1.0, 0.0, 0.0], // 1
        [2.0, 0.0, 0.0], // 2
        [0.0, 1.0, 0.0], // 3
        [1.0, 1.0, 0.0], // 4
        [2.0, 1.0, 0.0], // 5
        [0.0, 2.0, 0.0], // 6
        [1.0, 2.0, 0.0], // 7
    ];
    let faces = vec![
        [0, 1, 3],
        [1, 4, 3],
        [1, 2, 4],
        [2, 5, 4],
        [3, 4, 6],
        [4, 7, 6],
    ];
    TriMesh::new(vertices, faces).unwrap()
}

/// Regular icosahedron with poles on the z-axis, circumradius 1.
pub fn icosahedron() -> TriMesh {
    let lat = (0.5f64).atan(); // atan(1/2)
    let mut vertices = vec![[0.0, 0.0, 1.0]];
    for i in 0..5 {
        let lon = i as f64 * std::f64::consts::TAU / 5.0;
        vertices.push([lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()]);
    }
    for i in 0..5 {
        let lon = (i as f64 + 0.5) * std::f64::consts::TAU / 5.0;
        vertices.push([lat.cos() * lon.cos(), lat.cos() * lon.sin(), -lat.sin()]);
    }
    vertices.push([0.0, 0.0, -1.0]);
    let mut faces = Vec::with_capacity(20);
    for i in 0..5 {
        let j = (i + 1) % 5;
        let (u, uj) = (1 + i, 1 + j);
        let (l, lj) = (6 + i, 6 + j);
        faces.push([0, u, uj]);
        faces.push([u, l, uj]);
        faces.push([uj, l, lj]);
        faces.push([11, lj, l]);
    }
    TriMesh::new(vertices, faces).unwrap()
}

/// Icosahedron subdivided `level` times, every vertex projected to the unit
/// sphere after each split.
pub fn icosphere(level: usize) -> TriMesh {
    let mut mesh = icosahedron();
    for _ in 0..level {
        mesh = subdivide_1to4(&mesh).0;
        mesh = super::project_to_sphere(&mesh, [0.0; 3], 1.0).unwrap();
    }
    mesh
}

/// Axis-aligned unit cube surface, 12 faces.
pub fn cube() -> TriMesh {
    let vertices = vec![
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [1.0, 1.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [1.0, 0.0, 1.0],
        [1.0, 1.0, 1.0],
        [0.0, 1.0, 1.0],
    ];
    let quads = [
        [0, 3, 2, 1], // bottom (outward -z)
        [4, 5, 6, 7], // top
        [0, 1, 5, 4], // front
        [1, 2, 6, 5], // right
        [2, 3, 7, 6], // back
        [3, 0, 4, 7], // left
    ];
    let mut faces = Vec::with_capacity(12);
    for q in quads {
        faces.push([q[0], q[1], q[2]]);
        faces.push([q[0], q[2], q[3]]);
    }
    TriMesh::new(vertices, faces).unwrap()
}

/// Regular octahedron, circumradius 1.
pub fn octahedron() -> TriMesh {
    let vertices = vec![
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ];
    let faces = vec![
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ];
    TriMesh::new(vertices, faces).unwrap()
}

/// Regular tetrahedron.
pub fn tetrahedron() -> TriMesh {
    let vertices = vec![
        [1.0, 1.0, 1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ];
    let faces = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
    TriMesh::new(vertices, faces).unwrap()
}

/// Open triangle strip of `n` quads along x, each split into two faces.
pub fn strip(n: usize) -> TriMesh {
    assert!(n >= 1);
    let mut vertices = Vec::with_capacity(2 * (n + 1));
    for i in 0..=n {
        vertices.push([i as f64, 0.0, 0.0]);
        vertices.push([i as f64, 1.0, 0.0]);
    }
    let mut faces = Vec::with_capacity(2 * n);
    for i in 0..n {
        let (a, b, c, d) = (2 * i, 2 * i + 2, 2 * i + 3, 2 * i + 1);
        faces.push([a, b, d]);
        faces.push([b, c, d]);
    }
    TriMesh::new(vertices, faces).unwrap()
}

/// Open cylinder of `nu` segments around, `nv` rings tall; no caps, two
/// boundary loops.
pub fn open_cylinder(nu: usize, nv: usize) -> TriMesh {
    assert!(nu >= 3 && nv >= 1);
    let idx = |i: usize, j: usize| j * nu + (i % nu);
    let mut vertices = Vec::with_capacity(nu * (nv + 1));
    for j in 0..=nv {
        for i in 0..nu {
            let a = i as f64 * std::f64::consts::TAU / nu as f64;
            vertices.push([a.cos(), a.sin(), j as f64 / nv as f64]);
        }
    }
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for j in 0..nv {
        for i in 0..nu {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([a, b, d]);
            faces.push([b, c, d]);
        }
    }
    TriMesh::new(vertices, faces).unwrap()
}

/// Torus with major radius 1, minor radius 0.4.
pub fn torus(nu: usize, nv: usize) -> TriMesh {
    assert!(nu >= 3 && nv >= 3);
    let idx = |i: usize, j: usize| (j % nv) * nu + (i % nu);
    let mut vertices = Vec::with_capacity(nu * nv);
    for j in 0..nv {
        let b = j as f64 * std::f64::consts::TAU / nv as f64;
        for i in 0..nu {
            let a = i as f64 * std::f64::consts::TAU / nu as f64;
            let r = 1.0 + 0.4 * b.cos();
            vertices.push([r * a.cos(), r * a.sin(), 0.4 * b.sin()]);
        }
    }
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for j in 0..nv {
        for i in 0..nu {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([a, b, d]);
            faces.push([b, c, d]);
        }
    }
    TriMesh::new(vertices, faces).unwrap()
}

/// Three rectangular fins sharing one non-manifold edge, two faces each.
pub fn nonmanifold_fins() -> TriMesh {
    let dirs: [Vec3; 3] = [
        [0.0, 1.0, 0.0],
        [0.0, -0.5, 0.8],
        [0.0, -0.5, -0.8],
    ];
    let mut vertices = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]];
    let mut faces = Vec::new();
    for d in dirs {
        let i = vertices.len();
        vertices.push(geom::add([0.0, 0.0, 0.0], d));
        vertices.push(geom::add([1.0, 0.0, 0.0], d));
        faces.push([0, 1, i + 1]);
        faces.push([0, i + 1, i]);
    }
    TriMesh::new(vertices, faces).unwrap()
}

/// Star-shaped polygon fan around the origin with `spikes` alternating radii
/// and deliberate needle triangles (pairs of nearly coincident spokes).
///
/// `sliver_angle` is the angular gap of the needle pairs in radians; the
/// smaller it is, the worse the aspect ratio. The origin vertex (index 0) and
/// its neighborhood lie in the kernel.
pub fn star_fan(spikes: usize, sliver_angle: f64) -> TriMesh {
    assert!(spikes >= 3);
    // (angle, radius) ring; duplicating a spoke at the same radius keeps the
    // polygon star-shaped while making the in-between triangle a needle
    let mut ring: Vec<(f64, f64)> = Vec::new();
    for i in 0..(2 * spikes) {
        let a = i as f64 * std::f64::consts::TAU / (2 * spikes) as f64;
        let r = if i % 2 == 0 { 1.0 } else { 0.45 };
        ring.push((a, r));
        if i % 3 == 0 {
            ring.push((a + sliver_angle, r));
        }
    }
    let mut vertices = vec![[0.0, 0.0, 0.0]];
    for &(a, r) in &ring {
        vertices.push([r * a.cos(), r * a.sin(), 0.0]);
    }
    let n = ring.len();
    let mut faces = Vec::with_capacity(n);
    for k in 0..n {
        faces.push([0, 1 + k, 1 + (k + 1) % n]);
    }
    TriMesh::new(vertices, faces).unwrap()
}

/// Boundary ring of a fan mesh (vertices 1.., in order), used for star-kernel
/// membership checks in tests.
pub fn fan_boundary(mesh: &TriMesh) -> Vec<Vec3> {
    (1..mesh.n_vertices()).map(|v| mesh.vertex(v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosahedron_is_regular() {
        let m = icosahedron();
        assert_eq!((m.n_vertices(), m.n_edges(), m.n_faces()), (12, 30, 20));
        assert_eq!(m.euler_characteristic(), 2);
        let lens: Vec<f64> = m
            .edges()
            .iter()
            .map(|&[a, b]| geom::distance(m.vertex(a), m.vertex(b)))
            .collect();
        let (lo, hi) = lens.iter().fold((f64::MAX, f64::MIN), |(l, h), &x| (l.min(x), h.max(x)));
        assert!((hi - lo) < 1e-12, "edge lengths vary: {lo} vs {hi}");
        for &v in m.vertices() {
            assert!((geom::norm(v) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn icosphere_counts() {
        let m = icosphere(2);
        assert_eq!(m.n_vertices(), 162);
        assert_eq!(m.n_faces(), 320);
    }

    #[test]
    fn closed_shapes_have_no_boundary() {
        for m in [icosahedron(), cube(), octahedron(), tetrahedron(), torus(8, 6)] {
            assert!((0..m.n_edges()).all(|e| !m.is_boundary_edge(e)));
        }
    }

    #[test]
    fn open_shapes_have_boundary() {
        for m in [square_grid(2), l_shape(), strip(3), open_cylinder(6, 2)] {
            assert!((0..m.n_edges()).any(|e| m.is_boundary_edge(e)));
        }
    }

    #[test]
    fn star_fan_has_severe_slivers() {
        let m = star_fan(10, 1e-3);
        assert!(m.max_aspect_ratio() >= 50.0);
    }
}
