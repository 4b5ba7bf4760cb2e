#ifndef DISTMORSE_H
#define DISTMORSE_H

#include <stddef.h>
#include <stdint.h>

typedef enum DmStatus {
  DM_STATUS_OK = 0,
  DM_STATUS_NULL_POINTER = 1,
  DM_STATUS_INVALID_UTF8 = 2,
  DM_STATUS_INVALID_INPUT = 3,
  DM_STATUS_DIMENSION_MISMATCH = 4,
  /*
   A numerical routine failed (singular system, no convergence, oracle failure).
   */
  DM_STATUS_NUMERICAL = 5,
  DM_STATUS_OUT_OF_RANGE = 6,
  DM_STATUS_BUFFER_TOO_SMALL = 7,
  DM_STATUS_PANIC = 8,
} DmStatus;

/*
 Opaque polynomial handle.
 */
typedef struct DmPoly DmPoly;

/*
 Opaque analysis report handle.
 */
typedef struct DmReport DmReport;

/*
 Summary of one critical point of a report.
 */
typedef struct DmCriticalPoint {
  double value;
  size_t k;
  /*
   Quadratic index, or -1 when it could not be determined.
   */
  int64_t iota;
  int nondegenerate;
  int validated;
  /*
   Length of `x`.
   */
  size_t dim;
} DmCriticalPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread, or NULL. The pointer stays
 valid until the next failing call on the same thread.
 */
const char *dm_last_error_message(void);

/*
 Releases a string returned by this library.

 # Safety
 `s` must be NULL or a pointer returned by this library and not yet freed.
 */
void dm_string_free(char *s);

/*
 Parses a polynomial from `{"nvars": n, "terms": [{"exp": [...], "coef": c}]}`.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum DmStatus dm_poly_from_json(const char *json, struct DmPoly **out);

/*
 # Safety
 `p` must be NULL or a handle from [`dm_poly_from_json`] not yet freed.
 */
void dm_poly_free(struct DmPoly *p);

/*
 # Safety
 `p` must be a live polynomial handle; `out` must be writable.
 */
enum DmStatus dm_poly_nvars(const struct DmPoly *p, size_t *out);

/*
 # Safety
 `x` must point to `len` doubles; `out` must be writable.
 */
enum DmStatus dm_poly_eval(const struct DmPoly *p, const double *x, size_t len, double *out);

/*
 Writes the gradient into `out[0..len]`.

 # Safety
 `x` and `out` must each point to `len` doubles.
 */
enum DmStatus dm_poly_grad(const struct DmPoly *p, const double *x, size_t len, double *out);

/*
 Smallest `d` with the multijet submersion property for `(n, k, r)`.

 # Safety
 `out` must be writable.
 */
enum DmStatus dm_degree_bound(uint64_t n, uint64_t k, uint64_t r, uint64_t *out);

/*
 Runs an analysis from a request JSON (the `inputs` block of a report).
 With `with_meta` nonzero the report includes timing information.

 # Safety
 `request_json` must be a NUL-terminated string; `out` must be writable.
 */
enum DmStatus dm_analyze(const char *request_json, int with_meta, struct DmReport **out);

/*
 # Safety
 `r` must be NULL or a handle from [`dm_analyze`] not yet freed.
 */
void dm_report_free(struct DmReport *r);

/*
 The report as JSON; release with [`dm_string_free`].

 # Safety
 `r` must be a live report handle; `out` must be writable.
 */
enum DmStatus dm_report_json(const struct DmReport *r, char **out);

/*
 0 for a clean run, 2 when a degeneracy was flagged, -1 for NULL.

 # Safety
 `r` must be NULL or a live report handle.
 */
int dm_report_exit_code(const struct DmReport *r);

/*
 Number of validated critical points.

 # Safety
 `r` must be a live report handle; `out` must be writable.
 */
enum DmStatus dm_report_len(const struct DmReport *r, size_t *out);

/*
 # Safety
 `r` must be a live report handle; `out` must be writable.
 */
enum DmStatus dm_report_point(const struct DmReport *r, size_t i, struct DmCriticalPoint *out);

/*
 Copies the location of critical point `i` into `out[0..len]`; `len` must
 be at least its dimension.

 # Safety
 `out` must point to `len` writable doubles.
 */
enum DmStatus dm_report_point_x(const struct DmReport *r, size_t i, double *out, size_t len);

/*
 Duality check between the (X, Y) and (Y, X) runs. Each argument is a
 report or a census JSON. `holds` receives 1 when both sides agree.

 # Safety
 Both strings must be NUL-terminated; the outputs must be writable.
 */
enum DmStatus dm_check_duality_json(const char *xy_json,
                                    const char *yx_json,
                                    int64_t *lhs,
                                    int64_t *rhs,
                                    int *holds);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DISTMORSE_H */
