//! C ABI for the distance-field library.
//!
//! Handles are opaque pointers created and freed by this library. Functions
//! return [`GeodistStatus`]; on failure a description is available from
//! [`geodist_last_error`] until the next call on the same thread. All
//! functions are panic-safe.
//!
//! The generated header lives in `include/geodist.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use geodist::mesh::{self, TriMesh};
use geodist::solver::{self, SolveSettings};
use geodist::sources::{SourcePoint, SourceSet};

/// Result code of every API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeodistStatus {
    GeodistOk = 0,
    /// A required pointer argument was null.
    GeodistNullArgument = 1,
    /// Inputs were structurally invalid (indices, coordinates, sizes).
    GeodistInvalidArgument = 2,
    /// A file could not be read or parsed.
    GeodistParseError = 3,
    /// The optimizer did not reach an optimal point.
    GeodistSolverFailed = 4,
    /// Internal panic; state is unspecified but memory-safe.
    GeodistPanic = 5,
}

use GeodistStatus::*;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().map(|c| if c == '\0' { ' ' } else { c }).collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

/// Description of the most recent failure on this thread. The pointer stays
/// valid until the next library call from the same thread.
#[no_mangle]
pub extern "C" fn geodist_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

fn guard<F: FnOnce() -> GeodistStatus>(f: F) -> GeodistStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            GeodistPanic
        }
    }
}

/// Opaque triangle mesh handle.
pub struct GeodistMesh {
    inner: TriMesh,
}

/// Opaque source-set handle.
pub struct GeodistSources {
    inner: SourceSet,
}

/// Opaque solved-field handle (quadratic or linear-baseline).
pub struct GeodistField {
    inner: FieldKind,
}

enum FieldKind {
    Quadratic(solver::DistanceField),
    Linear(solver::PlDistanceField),
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> GeodistStatus {
    if out.is_null() {
        set_error("output pointer is null");
        return GeodistNullArgument;
    }
    *out = Box::into_raw(Box::new(value));
    GeodistOk
}

unsafe fn as_ref<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, GeodistStatus> {
    if ptr.is_null() {
        set_error(&format!("{what} handle is null"));
        return Err(GeodistNullArgument);
    }
    Ok(&*ptr)
}

/// Loads a mesh from an OBJ, OFF or PLY file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geodist_mesh_load(
    path: *const c_char,
    out: *mut *mut GeodistMesh,
) -> GeodistStatus {
    guard(|| {
        if path.is_null() {
            set_error("path is null");
            return GeodistNullArgument;
        }
        let path = match CStr::from_ptr(path).to_str() {
            Ok(s) => s,
            Err(_) => {
                set_error("path is not valid UTF-8");
                return GeodistInvalidArgument;
            }
        };
        match mesh::load_mesh(path) {
            Ok(m) => write_out(out, GeodistMesh { inner: m }),
            Err(e) => {
                set_error(&e.to_string());
                GeodistParseError
            }
        }
    })
}

/// Builds a mesh from flat arrays: `3*n_vertices` doubles (xyz interleaved)
/// and `3*n_faces` vertex indices.
///
/// # Safety
/// The arrays must contain the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn geodist_mesh_from_arrays(
    vertices: *const f64,
    n_vertices: usize,
    faces: *const u32,
    n_faces: usize,
    out: *mut *mut GeodistMesh,
) -> GeodistStatus {
    guard(|| {
        if vertices.is_null() || faces.is_null() {
            set_error("vertex or face array is null");
            return GeodistNullArgument;
        }
        let vs = std::slice::from_raw_parts(vertices, 3 * n_vertices);
        let fs = std::slice::from_raw_parts(faces, 3 * n_faces);
        let vertices: Vec<[f64; 3]> =
            vs.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        let faces: Vec<[usize; 3]> = fs
            .chunks_exact(3)
            .map(|c| [c[0] as usize, c[1] as usize, c[2] as usize])
            .collect();
        match TriMesh::new(vertices, faces) {
            Ok(m) => write_out(out, GeodistMesh { inner: m }),
            Err(e) => {
                set_error(&e.to_string());
                GeodistInvalidArgument
            }
        }
    })
}

/// Reports vertex, edge and face counts. Null count pointers are skipped.
///
/// # Safety
/// `mesh` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn geodist_mesh_counts(
    mesh: *const GeodistMesh,
    n_vertices: *mut usize,
    n_edges: *mut usize,
    n_faces: *mut usize,
) -> GeodistStatus {
    guard(|| {
        let mesh = match as_ref(mesh, "mesh") {
            Ok(m) => m,
            Err(s) => return s,
        };
        if !n_vertices.is_null() {
            *n_vertices = mesh.inner.n_vertices();
        }
        if !n_edges.is_null() {
            *n_edges = mesh.inner.n_edges();
        }
        if !n_faces.is_null() {
            *n_faces = mesh.inner.n_faces();
        }
        GeodistOk
    })
}

/// # Safety
/// `mesh` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn geodist_mesh_free(mesh: *mut GeodistMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Creates an empty source set.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geodist_sources_new(out: *mut *mut GeodistSources) -> GeodistStatus {
    guard(|| write_out(out, GeodistSources { inner: SourceSet::default() }))
}

/// Adds a vertex source.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn geodist_sources_add_vertex(
    sources: *mut GeodistSources,
    mesh: *const GeodistMesh,
    vertex: usize,
) -> GeodistStatus {
    guard(|| {
        let mesh = match as_ref(mesh, "mesh") {
            Ok(m) => m,
            Err(s) => return s,
        };
        if sources.is_null() {
            set_error("sources handle is null");
            return GeodistNullArgument;
        }
        match geodist::sources::source_from_vertex(&mesh.inner, vertex) {
            Ok(p) => {
                (*sources).inner.points.push(p);
                GeodistOk
            }
            Err(e) => {
                set_error(&e.to_string());
                GeodistInvalidArgument
            }
        }
    })
}

/// Adds a barycentric point source inside a face.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn geodist_sources_add_point(
    sources: *mut GeodistSources,
    mesh: *const GeodistMesh,
    face: usize,
    l0: f64,
    l1: f64,
    l2: f64,
) -> GeodistStatus {
    guard(|| {
        let mesh = match as_ref(mesh, "mesh") {
            Ok(m) => m,
            Err(s) => return s,
        };
        if sources.is_null() {
            set_error("sources handle is null");
            return GeodistNullArgument;
        }
        let p = SourcePoint { face, lambda: [l0, l1, l2] };
        match p.validate(&mesh.inner) {
            Ok(()) => {
                (*sources).inner.points.push(p);
                GeodistOk
            }
            Err(e) => {
                set_error(&e.to_string());
                GeodistInvalidArgument
            }
        }
    })
}

/// Parses a JSON source specification (same schema as the CLI accepts)
/// against a mesh.
///
/// # Safety
/// `json` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn geodist_sources_from_json(
    mesh: *const GeodistMesh,
    json: *const c_char,
    out: *mut *mut GeodistSources,
) -> GeodistStatus {
    guard(|| {
        let mesh = match as_ref(mesh, "mesh") {
            Ok(m) => m,
            Err(s) => return s,
        };
        if json.is_null() {
            set_error("json is null");
            return GeodistNullArgument;
        }
        let text = match CStr::from_ptr(json).to_str() {
            Ok(s) => s,
            Err(_) => {
                set_error("json is not valid UTF-8");
                return GeodistInvalidArgument;
            }
        };
        match SourceSet::from_json_str(&mesh.inner, text) {
            Ok(set) => write_out(out, GeodistSources { inner: set }),
            Err(e) => {
                set_error(&e.to_string());
                GeodistParseError
            }
        }
    })
}

/// Number of resolved point sources.
///
/// # Safety
/// `sources` must be a live handle (null returns 0).
#[no_mangle]
pub unsafe extern "C" fn geodist_sources_count(sources: *const GeodistSources) -> usize {
    if sources.is_null() {
        return 0;
    }
    (*sources).inner.len()
}

/// # Safety
/// `sources` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn geodist_sources_free(sources: *mut GeodistSources) {
    if !sources.is_null() {
        drop(Box::from_raw(sources));
    }
}

/// Solves the quadratic squared-distance program. `tol <= 0` selects the
/// default tolerance.
///
/// # Safety
/// All handles must be live.
#[no_mangle]
pub unsafe extern "C" fn geodist_solve(
    mesh: *const GeodistMesh,
    sources: *const GeodistSources,
    tol: f64,
    out: *mut *mut GeodistField,
) -> GeodistStatus {
    guard(|| {
        let mesh = match as_ref(mesh, "mesh") {
            Ok(m) => m,
            Err(s) => return s,
        };
        let sources = match as_ref(sources, "sources") {
            Ok(s) => s,
            Err(s) => return s,
        };
        let mut settings = SolveSettings::default();
        if tol > 0.0 {
            settings.tol = tol;
        }
        match solver::solve_geodesic(&mesh.inner, &sources.inner, &settings) {
            Ok(field) => write_out(out, GeodistField { inner: FieldKind::Quadratic(field) }),
            Err(e) => {
                set_error(&e.to_string());
                GeodistSolverFailed
            }
        }
    })
}

/// Solves the linear baseline from vertex sources.
///
/// # Safety
/// `vertices` must hold `n_sources` entries.
#[no_mangle]
pub unsafe extern "C" fn geodist_solve_baseline(
    mesh: *const GeodistMesh,
    vertices: *const u32,
    n_sources: usize,
    tol: f64,
    out: *mut *mut GeodistField,
) -> GeodistStatus {
    guard(|| {
        let mesh = match as_ref(mesh, "mesh") {
            Ok(m) => m,
            Err(s) => return s,
        };
        if vertices.is_null() {
            set_error("vertex array is null");
            return GeodistNullArgument;
        }
        let vs: Vec<usize> = std::slice::from_raw_parts(vertices, n_sources)
            .iter()
            .map(|&v| v as usize)
            .collect();
        if let Some(&bad) = vs.iter().find(|&&v| v >= mesh.inner.n_vertices()) {
            set_error(&format!("vertex index {bad} out of range"));
            return GeodistInvalidArgument;
        }
        let mut settings = SolveSettings::default();
        if tol > 0.0 {
            settings.tol = tol;
        }
        match solver::solve_geodesic_pl(&mesh.inner, &vs, &settings) {
            Ok(field) => write_out(out, GeodistField { inner: FieldKind::Linear(field) }),
            Err(e) => {
                set_error(&e.to_string());
                GeodistSolverFailed
            }
        }
    })
}

/// Number of nodal values in the field (vertices + edges for the quadratic
/// method, vertices for the baseline).
///
/// # Safety
/// `field` must be a live handle (null returns 0).
#[no_mangle]
pub unsafe extern "C" fn geodist_field_node_count(field: *const GeodistField) -> usize {
    if field.is_null() {
        return 0;
    }
    match &(*field).inner {
        FieldKind::Quadratic(f) => f.d.len(),
        FieldKind::Linear(f) => f.d.len(),
    }
}

unsafe fn copy_field(
    field: *const GeodistField,
    buffer: *mut f64,
    len: usize,
    squared: bool,
) -> GeodistStatus {
    let field = match as_ref(field, "field") {
        Ok(f) => f,
        Err(s) => return s,
    };
    if buffer.is_null() {
        set_error("buffer is null");
        return GeodistNullArgument;
    }
    let values: Vec<f64> = match (&field.inner, squared) {
        (FieldKind::Quadratic(f), false) => f.d.clone(),
        (FieldKind::Quadratic(f), true) => f.u.clone(),
        (FieldKind::Linear(f), false) => f.d.clone(),
        (FieldKind::Linear(f), true) => f.d.iter().map(|&d| d * d).collect(),
    };
    if len < values.len() {
        set_error(&format!("buffer holds {len} values, field has {}", values.len()));
        return GeodistInvalidArgument;
    }
    std::ptr::copy_nonoverlapping(values.as_ptr(), buffer, values.len());
    GeodistOk
}

/// Copies per-node distances into `buffer` (at least node_count entries).
///
/// # Safety
/// `buffer` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn geodist_field_distances(
    field: *const GeodistField,
    buffer: *mut f64,
    len: usize,
) -> GeodistStatus {
    guard(|| copy_field(field, buffer, len, false))
}

/// Copies per-node squared distances into `buffer`.
///
/// # Safety
/// `buffer` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn geodist_field_squared(
    field: *const GeodistField,
    buffer: *mut f64,
    len: usize,
) -> GeodistStatus {
    guard(|| copy_field(field, buffer, len, true))
}

/// Evaluates the distance at barycentric coordinates inside a face
/// (quadratic fields only).
///
/// # Safety
/// `out_distance` must be writable.
#[no_mangle]
pub unsafe extern "C" fn geodist_field_eval(
    field: *const GeodistField,
    face: usize,
    l0: f64,
    l1: f64,
    l2: f64,
    out_distance: *mut f64,
) -> GeodistStatus {
    guard(|| {
        let field = match as_ref(field, "field") {
            Ok(f) => f,
            Err(s) => return s,
        };
        if out_distance.is_null() {
            set_error("output pointer is null");
            return GeodistNullArgument;
        }
        match &field.inner {
            FieldKind::Quadratic(f) => match f.evaluate_d(face, [l0, l1, l2]) {
                Ok(d) => {
                    *out_distance = d;
                    GeodistOk
                }
                Err(e) => {
                    set_error(&e.to_string());
                    GeodistInvalidArgument
                }
            },
            FieldKind::Linear(_) => {
                set_error("pointwise evaluation needs a quadratic field");
                GeodistInvalidArgument
            }
        }
    })
}

/// # Safety
/// `field` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn geodist_field_free(field: *mut GeodistField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}
