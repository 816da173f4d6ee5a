#ifndef FRONTMESH_H
#define FRONTMESH_H

/* Generated by cbindgen from frontmesh-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Which empty-circle discipline the mesh is verified against.
 */
typedef enum FrontmeshMode {
  /**
   * Every triangle has an empty circumcircle.
   */
  FRONTMESH_MODE_TRULY = 0,
  /**
   * Subsegments are constraint edges; circumcircles may only contain
   * vertices invisible across them.
   */
  FRONTMESH_MODE_CONSTRAINED = 1,
} FrontmeshMode;

/**
 * Result of any fallible API call.
 */
typedef enum FrontmeshStatus {
  /**
   * The call succeeded.
   */
  FRONTMESH_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  FRONTMESH_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  FRONTMESH_STATUS_INVALID_UTF8 = 2,
  /**
   * The input text could not be parsed as a `.poly` description.
   */
  FRONTMESH_STATUS_PARSE_FAILED = 3,
  /**
   * The configuration or geometry was rejected before refinement.
   */
  FRONTMESH_STATUS_INVALID = 4,
  /**
   * Refinement hit a termination safety valve (insertion cap or
   * recovery limit).
   */
  FRONTMESH_STATUS_NONTERMINATION = 5,
  /**
   * A strict-mode invariant was breached during the run.
   */
  FRONTMESH_STATUS_VERIFICATION = 6,
  /**
   * An unexpected internal failure; the run state was discarded.
   */
  FRONTMESH_STATUS_INTERNAL = 7,
} FrontmeshStatus;

/**
 * An input planar straight line graph. Opaque; create with
 * [`frontmesh_pslg_parse`] or [`frontmesh_pslg_from_arrays`], destroy with
 * [`frontmesh_pslg_free`].
 */
typedef struct FrontmeshPslg FrontmeshPslg;

/**
 * A completed refinement run holding the output mesh and its audit
 * report. Opaque; destroy with [`frontmesh_run_free`].
 */
typedef struct FrontmeshRun FrontmeshRun;

/**
 * Refinement parameters. Obtain defaults from
 * [`frontmesh_options_default`] and override fields as needed.
 */
typedef struct FrontmeshOptions {
  /**
   * Target minimum angle in degrees; must lie strictly between 0 and 30.
   */
  double theta_deg;
  enum FrontmeshMode mode;
  /**
   * Segment split density; 0 derives the smallest density satisfying
   * the protection conditions for `theta_deg`.
   */
  uint32_t nstar;
  /**
   * Abort on the first encroachment instead of recording it.
   */
  bool strict;
  /**
   * Safety valve on Steiner insertions.
   */
  uint64_t max_insertions;
} FrontmeshOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the message of the most recent failing call on this thread, or
 * null if none has failed yet. The pointer stays valid until the next
 * failing call on the same thread.
 */
const char *frontmesh_last_error(void);

/**
 * Returns the library version as a static string.
 */
const char *frontmesh_version(void);

/**
 * Returns the default refinement options: 25 degrees, truly Delaunay,
 * derived split density, non-strict, one million insertions.
 */
struct FrontmeshOptions frontmesh_options_default(void);

/**
 * Parses Triangle-format `.poly` text into a PSLG handle and stores it in
 * `*out`. On failure `*out` is untouched and the status describes why.
 *
 * # Safety
 * `text` must point to a nul-terminated byte string and `out` to a
 * writable `FrontmeshPslg*` slot; both must stay valid for the call.
 */
enum FrontmeshStatus frontmesh_pslg_parse(const char *text, struct FrontmeshPslg **out);

/**
 * Assembles a PSLG handle from flat arrays and stores it in `*out`.
 *
 * `vertices` holds `vertex_count` interleaved `x, y` pairs, `segments`
 * holds `segment_count` pairs of zero-based endpoint indices, and `holes`
 * holds `hole_count` interleaved hole-marker coordinates. `segment_markers`
 * may be null, in which case every segment gets marker 1; `holes` may be
 * null when `hole_count` is 0. Geometry is validated when the handle is
 * refined, but endpoint indices are range-checked here.
 *
 * # Safety
 * Each non-null array must be readable at the length its count implies
 * (`2 * vertex_count` doubles, `2 * segment_count` ids, `segment_count`
 * markers, `2 * hole_count` doubles) and `out` must be writable.
 */
enum FrontmeshStatus frontmesh_pslg_from_arrays(const double *vertices,
                                                size_t vertex_count,
                                                const uint32_t *segments,
                                                size_t segment_count,
                                                const int32_t *segment_markers,
                                                const double *holes,
                                                size_t hole_count,
                                                struct FrontmeshPslg **out);

/**
 * Frees a PSLG handle. Null is a no-op.
 *
 * # Safety
 * `pslg` must be null or a pointer returned by one of the constructors
 * that has not been freed yet.
 */
void frontmesh_pslg_free(struct FrontmeshPslg *pslg);

/**
 * Refines a PSLG into a quality mesh and stores the run handle in `*out`.
 * A null `options` uses [`frontmesh_options_default`]. On failure `*out`
 * is untouched.
 *
 * # Safety
 * `pslg` must be a live handle from one of the constructors, `options`
 * null or a pointer to a valid options struct, and `out` writable.
 */
enum FrontmeshStatus frontmesh_refine(const struct FrontmeshPslg *pslg,
                                      const struct FrontmeshOptions *options,
                                      struct FrontmeshRun **out);

/**
 * Frees a run handle and every buffer it owns. Null is a no-op.
 *
 * # Safety
 * `run` must be null or a pointer returned by [`frontmesh_refine`] that
 * has not been freed yet.
 */
void frontmesh_run_free(struct FrontmeshRun *run);

/**
 * Number of mesh vertices, or 0 for a null handle.
 *
 * # Safety
 * `run` must be null or a live run handle.
 */
size_t frontmesh_run_vertex_count(const struct FrontmeshRun *run);

/**
 * Number of domain triangles, or 0 for a null handle.
 *
 * # Safety
 * `run` must be null or a live run handle.
 */
size_t frontmesh_run_triangle_count(const struct FrontmeshRun *run);

/**
 * Vertex coordinates as interleaved `x, y` pairs of length
 * `2 * frontmesh_run_vertex_count`. Owned by the run; null for a null
 * handle.
 *
 * # Safety
 * `run` must be null or a live run handle; the buffer dies with it.
 */
const double *frontmesh_run_vertices(const struct FrontmeshRun *run);

/**
 * Per-vertex boundary markers of length `frontmesh_run_vertex_count`;
 * Steiner vertices carry marker 0. Owned by the run; null for a null
 * handle.
 *
 * # Safety
 * `run` must be null or a live run handle; the buffer dies with it.
 */
const int32_t *frontmesh_run_vertex_markers(const struct FrontmeshRun *run);

/**
 * Triangle corners as zero-based vertex-index triples of length
 * `3 * frontmesh_run_triangle_count`, counterclockwise. Owned by the run;
 * null for a null handle.
 *
 * # Safety
 * `run` must be null or a live run handle; the buffer dies with it.
 */
const uint32_t *frontmesh_run_triangles(const struct FrontmeshRun *run);

/**
 * Minimum angle in degrees over all triangles outside skipped
 * small-angle neighborhoods, or 0 for a null handle.
 *
 * # Safety
 * `run` must be null or a live run handle.
 */
double frontmesh_run_min_angle_deg(const struct FrontmeshRun *run);

/**
 * Whether the run passed every hard verification check: the Delaunay
 * property for its mode, PSLG conformity, zero encroachment events, and
 * the target angle outside skipped triangles. False for a null handle.
 *
 * # Safety
 * `run` must be null or a live run handle.
 */
bool frontmesh_run_passed(const struct FrontmeshRun *run);

/**
 * The full audit report as a JSON string. Owned by the run; null for a
 * null handle.
 *
 * # Safety
 * `run` must be null or a live run handle; the string dies with it.
 */
const char *frontmesh_run_report_json(const struct FrontmeshRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRONTMESH_H */
