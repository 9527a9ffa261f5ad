//! Source sets: points placed anywhere on the surface (vertices, edge
//! interiors, face interiors) and polyline curves discretized into points.
//!
//! A source is a face index with barycentric coordinates. Curves are sampled
//! at regular arclength intervals so the constraint density does not depend
//! on the triangulation; segments whose endpoints sit on different faces are
//! split at the shared edge or vertex.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{self, Vec3};
use crate::mesh::TriMesh;

#[derive(Debug, Error)]
pub enum SourceError {
    #[error("vertex {0} has no incident face")]
    IsolatedVertex(usize),
    #[error("curve has no waypoints")]
    EmptyCurve,
    #[error("invalid barycentric coordinates {0:?}")]
    BadBarycentric([f64; 3]),
    #[error("face index {face} out of range (mesh has {n_faces} faces)")]
    FaceIndex { face: usize, n_faces: usize },
    #[error("vertex index {vertex} out of range (mesh has {n_vertices} vertices)")]
    VertexIndex { vertex: usize, n_vertices: usize },
    #[error("spacing must be positive, got {0}")]
    BadSpacing(f64),
    #[error("source file {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A point on the mesh: barycentric coordinates within one face.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourcePoint {
    pub face: usize,
    pub lambda: [f64; 3],
}

impl SourcePoint {
    pub fn validate(&self, mesh: &TriMesh) -> Result<(), SourceError> {
        if self.face >= mesh.n_faces() {
            return Err(SourceError::FaceIndex { face: self.face, n_faces: mesh.n_faces() });
        }
        let sum = self.lambda.iter().sum::<f64>();
        if self.lambda.iter().any(|&l| l < -1e-12) || (sum - 1.0).abs() > 1e-9 {
            return Err(SourceError::BadBarycentric(self.lambda));
        }
        Ok(())
    }

    pub fn position(&self, mesh: &TriMesh) -> Vec3 {
        mesh.point_at(self.face, self.lambda)
    }

    /// The vertex this point coincides with, if any.
    pub fn as_vertex(&self, mesh: &TriMesh) -> Option<usize> {
        let face = mesh.face(self.face);
        (0..3).find(|&c| (self.lambda[c] - 1.0).abs() <= 1e-12).map(|c| face[c])
    }
}

/// An on-surface polyline to be sampled into point sources.
#[derive(Debug, Clone)]
pub struct CurveSource {
    pub waypoints: Vec<SourcePoint>,
    pub closed: bool,
}

/// Curve sampling interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spacing {
    /// Half the mean edge length of the mesh.
    Auto,
    Value(f64),
}

impl Spacing {
    pub fn resolve(self, mesh: &TriMesh) -> Result<f64, SourceError> {
        match self {
            Spacing::Auto => Ok(0.5 * mesh.mean_edge_length()),
            Spacing::Value(v) if v > 0.0 => Ok(v),
            Spacing::Value(v) => Err(SourceError::BadSpacing(v)),
        }
    }
}

/// Source at a mesh vertex, represented in its lowest-index incident face.
/// The face choice does not affect the solution: the interpolation row is a
/// unit row at the vertex node either way.
pub fn source_from_vertex(mesh: &TriMesh, v: usize) -> Result<SourcePoint, SourceError> {
    if v >= mesh.n_vertices() {
        return Err(SourceError::VertexIndex { vertex: v, n_vertices: mesh.n_vertices() });
    }
    let &face = mesh
        .vertex_faces(v)
        .first()
        .ok_or(SourceError::IsolatedVertex(v))?;
    let corner = mesh.face(face).iter().position(|&w| w == v).expect("incident face");
    let mut lambda = [0.0; 3];
    lambda[corner] = 1.0;
    Ok(SourcePoint { face, lambda })
}

/// One straight piece of a cross-face segment, in barycentric form.
#[derive(Debug, Clone)]
pub struct PathPiece {
    pub face: usize,
    pub lambda_start: [f64; 3],
    pub lambda_end: [f64; 3],
    pub length: f64,
}

/// A waypoint-to-waypoint path, possibly split at a shared edge or vertex.
#[derive(Debug, Clone)]
pub struct SegmentPath {
    pub pieces: Vec<PathPiece>,
    /// Set when the endpoints' faces share no vertex; the connecting segment
    /// is then not representable on the surface and only the endpoints are
    /// used. Callers should warn.
    pub off_surface: bool,
}

impl SegmentPath {
    pub fn total_length(&self) -> f64 {
        self.pieces.iter().map(|p| p.length).sum()
    }

    /// Point at arclength fraction `t ∈ [0, 1]`.
    pub fn point_at(&self, t: f64) -> SourcePoint {
        let total = self.total_length();
        let target = t.clamp(0.0, 1.0) * total;
        let mut acc = 0.0;
        for piece in &self.pieces {
            if target <= acc + piece.length || piece.length == 0.0 {
                let s = if piece.length > 0.0 { (target - acc) / piece.length } else { 0.0 };
                let s = s.clamp(0.0, 1.0);
                let mut lambda = [0.0; 3];
                for k in 0..3 {
                    lambda[k] = (1.0 - s) * piece.lambda_start[k] + s * piece.lambda_end[k];
                }
                return SourcePoint { face: piece.face, lambda };
            }
            acc += piece.length;
        }
        let last = self.pieces.last().expect("nonempty path");
        SourcePoint { face: last.face, lambda: last.lambda_end }
    }
}

/// Builds the path from `a` to `b`. Same face: one piece. Faces sharing an
/// edge or a vertex: two pieces split at the shared feature. Otherwise the
/// path is flagged off-surface and degenerates to the two endpoints.
pub fn segment_path(
    mesh: &TriMesh,
    a: &SourcePoint,
    b: &SourcePoint,
) -> Result<SegmentPath, SourceError> {
    a.validate(mesh)?;
    b.validate(mesh)?;
    let pa = a.position(mesh);
    let pb = b.position(mesh);

    if a.face == b.face {
        return Ok(SegmentPath {
            pieces: vec![PathPiece {
                face: a.face,
                lambda_start: a.lambda,
                lambda_end: b.lambda,
                length: geom::distance(pa, pb),
            }],
            off_surface: false,
        });
    }

    let fa = mesh.face(a.face);
    let fb = mesh.face(b.face);

    // shared edge: the straight segment is split where it meets the edge line
    let shared: Vec<usize> = fa.iter().copied().filter(|v| fb.contains(v)).collect();
    if shared.len() >= 2 {
        let (u, v) = (shared[0], shared[1]);
        let pu = mesh.vertex(u);
        let pv = mesh.vertex(v);
        let s = closest_param_on_edge(pa, pb, pu, pv);
        let split_a = edge_point_in_face(&fa, u, v, s);
        let split_b = edge_point_in_face(&fb, u, v, s);
        let ps = geom::lerp(pu, pv, s);
        return Ok(SegmentPath {
            pieces: vec![
                PathPiece {
                    face: a.face,
                    lambda_start: a.lambda,
                    lambda_end: split_a,
                    length: geom::distance(pa, ps),
                },
                PathPiece {
                    face: b.face,
                    lambda_start: split_b,
                    lambda_end: b.lambda,
                    length: geom::distance(ps, pb),
                },
            ],
            off_surface: false,
        });
    }

    // shared vertex: split there
    if let Some(&w) = shared.first() {
        let corner_a = fa.iter().position(|&x| x == w).unwrap();
        let corner_b = fb.iter().position(|&x| x == w).unwrap();
        let mut la = [0.0; 3];
        la[corner_a] = 1.0;
        let mut lb = [0.0; 3];
        lb[corner_b] = 1.0;
        let pw = mesh.vertex(w);
        return Ok(SegmentPath {
            pieces: vec![
                PathPiece {
                    face: a.face,
                    lambda_start: a.lambda,
                    lambda_end: la,
                    length: geom::distance(pa, pw),
                },
                PathPiece {
                    face: b.face,
                    lambda_start: lb,
                    lambda_end: b.lambda,
                    length: geom::distance(pw, pb),
                },
            ],
            off_surface: false,
        });
    }

    Ok(SegmentPath {
        pieces: vec![
            PathPiece { face: a.face, lambda_start: a.lambda, lambda_end: a.lambda, length: 0.0 },
            PathPiece { face: b.face, lambda_start: b.lambda, lambda_end: b.lambda, length: 0.0 },
        ],
        off_surface: true,
    })
}

/// Parameter s of the point on edge (u, v) closest to the straight segment
/// a→b, clamped to the edge.
fn closest_param_on_edge(a: Vec3, b: Vec3, u: Vec3, v: Vec3) -> f64 {
    let d1 = geom::sub(b, a);
    let d2 = geom::sub(v, u);
    let r = geom::sub(a, u);
    let a11 = geom::dot(d1, d1);
    let a12 = -geom::dot(d1, d2);
    let a22 = geom::dot(d2, d2);
    let b1 = -geom::dot(d1, r);
    let b2 = geom::dot(d2, r);
    let det = a11 * a22 - a12 * a12;
    let s = if det.abs() > 1e-30 * a11.max(a22).powi(2) {
        (a11 * b2 - a12 * b1) / det
    } else {
        // near-parallel lines: project the segment midpoint onto the edge
        let m = geom::lerp(a, b, 0.5);
        geom::dot(geom::sub(m, u), d2) / a22
    };
    s.clamp(0.0, 1.0)
}

/// Barycentric coordinates in `face` of the point at parameter s along the
/// edge from vertex u to vertex v.
fn edge_point_in_face(face: &[usize; 3], u: usize, v: usize, s: f64) -> [f64; 3] {
    let mut lambda = [0.0; 3];
    let cu = face.iter().position(|&x| x == u).expect("u in face");
    let cv = face.iter().position(|&x| x == v).expect("v in face");
    lambda[cu] = 1.0 - s;
    lambda[cv] = s;
    lambda
}

/// Samples a polyline curve into point sources at arclength intervals of at
/// most `spacing`; segment endpoints are always included and consecutive
/// duplicates removed. Returns the sample points and whether any segment was
/// flagged off-surface.
pub fn sample_curve(
    mesh: &TriMesh,
    curve: &CurveSource,
    spacing: Spacing,
) -> Result<(Vec<SourcePoint>, bool), SourceError> {
    if curve.waypoints.is_empty() {
        return Err(SourceError::EmptyCurve);
    }
    for w in &curve.waypoints {
        w.validate(mesh)?;
    }
    let spacing = spacing.resolve(mesh)?;
    let tol = 1e-9 * mesh.bbox_diagonal();

    let mut points: Vec<SourcePoint> = Vec::new();
    let mut off_surface = false;
    let push = |p: SourcePoint, points: &mut Vec<SourcePoint>| {
        if let Some(last) = points.last() {
            if geom::distance(last.position(mesh), p.position(mesh)) <= tol {
                return;
            }
        }
        points.push(p);
    };

    let n = curve.waypoints.len();
    let segs = if curve.closed { n } else { n.saturating_sub(1) };
    if segs == 0 {
        return Ok((vec![curve.waypoints[0]], false));
    }
    push(curve.waypoints[0], &mut points);
    for k in 0..segs {
        let a = &curve.waypoints[k];
        let b = &curve.waypoints[(k + 1) % n];
        let path = segment_path(mesh, a, b)?;
        off_surface |= path.off_surface;
        if path.off_surface {
            push(*b, &mut points);
            continue;
        }
        let len = path.total_length();
        let steps = ((len / spacing).ceil() as usize).max(1);
        for i in 1..=steps {
            push(path.point_at(i as f64 / steps as f64), &mut points);
        }
    }
    if curve.closed && points.len() > 1 {
        let first = points[0].position(mesh);
        let last = points.last().unwrap().position(mesh);
        if geom::distance(first, last) <= tol {
            points.pop();
        }
    }
    Ok((points, off_surface))
}

// ---------------------------------------------------------------- JSON spec

/// One entry of the JSON source specification.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SourceSpec {
    Vertex { vertex: usize },
    Point { face: usize, lambda: [f64; 3] },
    Curve {
        curve: Vec<WaypointSpec>,
        #[serde(default)]
        closed: bool,
        #[serde(default)]
        spacing: SpacingSpec,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WaypointSpec {
    Vertex { vertex: usize },
    Point { face: usize, lambda: [f64; 3] },
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(untagged)]
pub enum SpacingSpec {
    #[default]
    #[serde(skip)]
    Unset,
    Named(String),
    Value(f64),
}

/// A resolved set of point sources.
#[derive(Debug, Clone, Default)]
pub struct SourceSet {
    pub points: Vec<SourcePoint>,
    /// True when some curve segment could not be traced on the surface.
    pub had_off_surface_segment: bool,
}

impl SourceSet {
    pub fn from_points(points: Vec<SourcePoint>) -> Self {
        Self { points, had_off_surface_segment: false }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Resolves a parsed specification against a mesh: vertices become
    /// barycentric points, curves are sampled, and coincident points are
    /// deduplicated.
    pub fn resolve(mesh: &TriMesh, specs: &[SourceSpec]) -> Result<Self, SourceError> {
        let mut set = SourceSet::default();
        for spec in specs {
            match spec {
                SourceSpec::Vertex { vertex } => {
                    set.points.push(source_from_vertex(mesh, *vertex)?);
                }
                SourceSpec::Point { face, lambda } => {
                    let p = SourcePoint { face: *face, lambda: *lambda };
                    p.validate(mesh)?;
                    set.points.push(p);
                }
                SourceSpec::Curve { curve, closed, spacing } => {
                    let waypoints = curve
                        .iter()
                        .map(|w| match w {
                            WaypointSpec::Vertex { vertex } => source_from_vertex(mesh, *vertex),
                            WaypointSpec::Point { face, lambda } => {
                                let p = SourcePoint { face: *face, lambda: *lambda };
                                p.validate(mesh)?;
                                Ok(p)
                            }
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    let spacing = match spacing {
                        SpacingSpec::Unset => Spacing::Auto,
                        SpacingSpec::Named(s) if s == "auto" => Spacing::Auto,
                        SpacingSpec::Named(s) => {
                            return Err(SourceError::BadSpacing(
                                s.parse::<f64>().unwrap_or(f64::NAN),
                            ))
                        }
                        SpacingSpec::Value(v) => Spacing::Value(*v),
                    };
                    let (pts, off) =
                        sample_curve(mesh, &CurveSource { waypoints, closed: *closed }, spacing)?;
                    set.had_off_surface_segment |= off;
                    set.points.extend(pts);
                }
            }
        }
        set.dedup(mesh);
        Ok(set)
    }

    pub fn from_json_str(mesh: &TriMesh, json: &str) -> Result<Self, SourceError> {
        let specs: Vec<SourceSpec> = serde_json::from_str(json)
            .map_err(|source| SourceError::Json { path: "<string>".into(), source })?;
        Self::resolve(mesh, &specs)
    }

    pub fn from_json_file(mesh: &TriMesh, path: &str) -> Result<Self, SourceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| SourceError::Io { path: path.into(), source })?;
        let specs: Vec<SourceSpec> = serde_json::from_str(&text)
            .map_err(|source| SourceError::Json { path: path.into(), source })?;
        Self::resolve(mesh, &specs)
    }

    /// Removes points that coincide geometrically (identical interpolation
    /// rows would make the equality system rank-deficient).
    fn dedup(&mut self, mesh: &TriMesh) {
        let tol = 1e-12 * mesh.bbox_diagonal().max(1e-300);
        let mut kept: Vec<SourcePoint> = Vec::with_capacity(self.points.len());
        for p in &self.points {
            let pos = p.position(mesh);
            if kept.iter().all(|q| geom::distance(q.position(mesh), pos) > tol) {
                kept.push(*p);
            }
        }
        self.points = kept;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;

    #[test]
    fn vertex_source_uses_lowest_incident_face() {
        let m = shapes::icosahedron();
        let s = source_from_vertex(&m, 0).unwrap();
        assert_eq!(s.face, *m.vertex_faces(0).iter().min().unwrap());
        assert_eq!(s.lambda.iter().filter(|&&l| l == 1.0).count(), 1);
        assert_eq!(s.as_vertex(&m), Some(0));
    }

    #[test]
    fn segment_same_face() {
        let m = shapes::single_triangle();
        let a = SourcePoint { face: 0, lambda: [1.0, 0.0, 0.0] };
        let b = SourcePoint { face: 0, lambda: [0.0, 1.0, 0.0] };
        let p = segment_path(&m, &a, &b).unwrap();
        assert_eq!(p.pieces.len(), 1);
        assert!((p.total_length() - 1.0).abs() < 1e-14);
        let mid = p.point_at(0.5);
        assert!((mid.lambda[0] - 0.5).abs() < 1e-14 && (mid.lambda[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn segment_across_shared_edge() {
        let m = shapes::unit_square();
        // barycenters of the two faces
        let a = SourcePoint { face: 0, lambda: [1.0 / 3.0; 3] };
        let b = SourcePoint { face: 1, lambda: [1.0 / 3.0; 3] };
        let p = segment_path(&m, &a, &b).unwrap();
        assert_eq!(p.pieces.len(), 2);
        assert!(!p.off_surface);
        let d = geom::distance(a.position(&m), b.position(&m));
        assert!((p.total_length() - d).abs() < 1e-12, "flat split preserves length");
        // the split point lies on the shared diagonal
        let split = p.pieces[0].lambda_end;
        let pos = m.point_at(0, split);
        assert!((pos[0] + pos[1] - 1.0).abs() < 1e-12, "on diagonal x+y=1: {pos:?}");
    }

    #[test]
    fn open_segment_counts() {
        let m = shapes::single_triangle();
        let curve = CurveSource {
            waypoints: vec![
                SourcePoint { face: 0, lambda: [1.0, 0.0, 0.0] },
                SourcePoint { face: 0, lambda: [0.0, 1.0, 0.0] },
            ],
            closed: false,
        };
        let (pts, _) = sample_curve(&m, &curve, Spacing::Value(0.25)).unwrap();
        assert_eq!(pts.len(), 5);
    }

    #[test]
    fn closed_loop_has_no_duplicate_closure_point() {
        // equilateral-ish triangle loop around the triangle's own corners
        let m = shapes::single_triangle();
        let corners = [
            SourcePoint { face: 0, lambda: [1.0, 0.0, 0.0] },
            SourcePoint { face: 0, lambda: [0.0, 1.0, 0.0] },
            SourcePoint { face: 0, lambda: [0.0, 0.0, 1.0] },
        ];
        let curve = CurveSource { waypoints: corners.to_vec(), closed: true };
        // perimeter 1 + √2 + 1; spacing picked so each side splits evenly
        let (pts, _) = sample_curve(&m, &curve, Spacing::Value(0.5)).unwrap();
        let expect = 2 + 3 + 2; // per-side ceil(len/0.5) with shared endpoints deduped
        assert_eq!(pts.len(), expect);
        let first = pts.first().unwrap().position(&m);
        let last = pts.last().unwrap().position(&m);
        assert!(geom::distance(first, last) > 1e-6);
    }

    #[test]
    fn auto_spacing_is_half_mean_edge() {
        let m = shapes::unit_square();
        let auto = Spacing::Auto.resolve(&m).unwrap();
        assert!((auto - 0.5 * m.mean_edge_length()).abs() < 1e-15);
    }

    #[test]
    fn spec_json_forms() {
        let m = shapes::unit_square();
        let json = r#"[
            {"vertex": 2},
            {"face": 0, "lambda": [0.25, 0.5, 0.25]},
            {"curve": [{"vertex": 0}, {"vertex": 1}], "spacing": 0.5}
        ]"#;
        let set = SourceSet::from_json_str(&m, json).unwrap();
        assert!(set.len() >= 4);
        for p in &set.points {
            p.validate(&m).unwrap();
        }
        let bad = SourceSet::from_json_str(&m, r#"[{"vertex": 99}]"#);
        assert!(matches!(bad, Err(SourceError::VertexIndex { .. })));
    }

    #[test]
    fn empty_curve_rejected() {
        let m = shapes::unit_square();
        let curve = CurveSource { waypoints: vec![], closed: false };
        assert!(matches!(
            sample_curve(&m, &curve, Spacing::Auto),
            Err(SourceError::EmptyCurve)
        ));
    }

    #[test]
    fn coincident_sources_are_deduplicated() {
        let m = shapes::unit_square();
        let specs = vec![
            SourceSpec::Vertex { vertex: 1 },
            SourceSpec::Point { face: 0, lambda: [0.0, 1.0, 0.0] },
        ];
        let set = SourceSet::resolve(&m, &specs).unwrap();
        assert_eq!(set.len(), 1);
    }
}
