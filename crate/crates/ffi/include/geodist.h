#ifndef GEODIST_H
#define GEODIST_H

/* This file is generated by cbindgen from geodist-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every API call.
 */
typedef enum {
  GEODIST_OK = 0,
  /*
   A required pointer argument was null.
   */
  GEODIST_NULL_ARGUMENT = 1,
  /*
   Inputs were structurally invalid (indices, coordinates, sizes).
   */
  GEODIST_INVALID_ARGUMENT = 2,
  /*
   A file could not be read or parsed.
   */
  GEODIST_PARSE_ERROR = 3,
  /*
   The optimizer did not reach an optimal point.
   */
  GEODIST_SOLVER_FAILED = 4,
  /*
   Internal panic; state is unspecified but memory-safe.
   */
  GEODIST_PANIC = 5,
} GeodistStatus;

/*
 Opaque solved-field handle (quadratic or linear-baseline).
 */
typedef struct GeodistField GeodistField;

/*
 Opaque triangle mesh handle.
 */
typedef struct GeodistMesh GeodistMesh;

/*
 Opaque source-set handle.
 */
typedef struct GeodistSources GeodistSources;

/*
 Description of the most recent failure on this thread. The pointer stays
 valid until the next library call from the same thread.
 */
const char *geodist_last_error(void);

/*
 Loads a mesh from an OBJ, OFF or PLY file.

 # Safety
 `path` must be a valid NUL-terminated string; `out` must be writable.
 */
GeodistStatus geodist_mesh_load(const char *path, GeodistMesh **out);

/*
 Builds a mesh from flat arrays: `3*n_vertices` doubles (xyz interleaved)
 and `3*n_faces` vertex indices.

 # Safety
 The arrays must contain the stated number of elements.
 */
GeodistStatus geodist_mesh_from_arrays(const double *vertices,
                                       size_t n_vertices,
                                       const uint32_t *faces,
                                       size_t n_faces,
                                       GeodistMesh **out);

/*
 Reports vertex, edge and face counts. Null count pointers are skipped.

 # Safety
 `mesh` must be a live handle from this library.
 */
GeodistStatus geodist_mesh_counts(const GeodistMesh *mesh,
                                  size_t *n_vertices,
                                  size_t *n_edges,
                                  size_t *n_faces);

/*
 # Safety
 `mesh` must come from this library and not be freed twice.
 */
void geodist_mesh_free(GeodistMesh *mesh);

/*
 Creates an empty source set.

 # Safety
 `out` must be writable.
 */
GeodistStatus geodist_sources_new(GeodistSources **out);

/*
 Adds a vertex source.

 # Safety
 Both handles must be live.
 */
GeodistStatus geodist_sources_add_vertex(GeodistSources *sources,
                                         const GeodistMesh *mesh,
                                         size_t vertex);

/*
 Adds a barycentric point source inside a face.

 # Safety
 Both handles must be live.
 */
GeodistStatus geodist_sources_add_point(GeodistSources *sources,
                                        const GeodistMesh *mesh,
                                        size_t face,
                                        double l0,
                                        double l1,
                                        double l2);

/*
 Parses a JSON source specification (same schema as the CLI accepts)
 against a mesh.

 # Safety
 `json` must be a valid NUL-terminated string.
 */
GeodistStatus geodist_sources_from_json(const GeodistMesh *mesh,
                                        const char *json,
                                        GeodistSources **out);

/*
 Number of resolved point sources.

 # Safety
 `sources` must be a live handle (null returns 0).
 */
size_t geodist_sources_count(const GeodistSources *sources);

/*
 # Safety
 `sources` must come from this library and not be freed twice.
 */
void geodist_sources_free(GeodistSources *sources);

/*
 Solves the quadratic squared-distance program. `tol <= 0` selects the
 default tolerance.

 # Safety
 All handles must be live.
 */
GeodistStatus geodist_solve(const GeodistMesh *mesh,
                            const GeodistSources *sources,
                            double tol,
                            GeodistField **out);

/*
 Solves the linear baseline from vertex sources.

 # Safety
 `vertices` must hold `n_sources` entries.
 */
GeodistStatus geodist_solve_baseline(const GeodistMesh *mesh,
                                     const uint32_t *vertices,
                                     size_t n_sources,
                                     double tol,
                                     GeodistField **out);

/*
 Number of nodal values in the field (vertices + edges for the quadratic
 method, vertices for the baseline).

 # Safety
 `field` must be a live handle (null returns 0).
 */
size_t geodist_field_node_count(const GeodistField *field);

/*
 Copies per-node distances into `buffer` (at least node_count entries).

 # Safety
 `buffer` must hold `len` doubles.
 */
GeodistStatus geodist_field_distances(const GeodistField *field, double *buffer, size_t len);

/*
 Copies per-node squared distances into `buffer`.

 # Safety
 `buffer` must hold `len` doubles.
 */
GeodistStatus geodist_field_squared(const GeodistField *field, double *buffer, size_t len);

/*
 Evaluates the distance at barycentric coordinates inside a face
 (quadratic fields only).

 # Safety
 `out_distance` must be writable.
 */
GeodistStatus geodist_field_eval(const GeodistField *field,
                                 size_t face,
                                 double l0,
                                 double l1,
                                 double l2,
                                 double *out_distance);

/*
 # Safety
 `field` must come from this library and not be freed twice.
 */
void geodist_field_free(GeodistField *field);

#endif  /* GEODIST_H */
