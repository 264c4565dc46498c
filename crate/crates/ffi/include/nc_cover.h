#ifndef NC_COVER_H
#define NC_COVER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum NcStatus {
  NC_STATUS_OK = 0,
  NC_STATUS_NULL_POINTER = 1,
  NC_STATUS_INVALID_ARGUMENT = 2,
  NC_STATUS_PARAMS_MISMATCH = 3,
  NC_STATUS_NUMERICAL = 4,
  NC_STATUS_PARSE = 5,
  NC_STATUS_USAGE = 6,
  NC_STATUS_PANIC = 7,
} NcStatus;

/**
 * An element of a noncommutative torus.
 */
typedef struct NcElement NcElement;

/**
 * A finite-dimensional unitary representation.
 */
typedef struct NcRep NcRep;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *nc_last_error_message(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void nc_string_free(char *s);

/**
 * Parses an element from its JSON form
 * `{"theta": [p, q] | x, "terms": [[r, s, re, im], ...]}`.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` writable.
 */
enum NcStatus nc_element_from_json(const char *json, struct NcElement **out);

/**
 * # Safety
 * `e` must be a live handle and `out` writable.
 */
enum NcStatus nc_element_to_json(const struct NcElement *e, char **out);

/**
 * # Safety
 * `e` must be null or a handle from this library, not used afterwards.
 */
void nc_element_free(struct NcElement *e);

/**
 * # Safety
 * Handles must be live and `out` writable.
 */
enum NcStatus nc_element_mul(const struct NcElement *a,
                             const struct NcElement *b,
                             struct NcElement **out);

/**
 * # Safety
 * Handles must be live and `out` writable.
 */
enum NcStatus nc_element_add(const struct NcElement *a,
                             const struct NcElement *b,
                             struct NcElement **out);

/**
 * # Safety
 * `a` must be live and `out` writable.
 */
enum NcStatus nc_element_adjoint(const struct NcElement *a, struct NcElement **out);

/**
 * The canonical trace `τ₀(a)`.
 *
 * # Safety
 * `a` must be live and `re`, `im` writable.
 */
enum NcStatus nc_element_trace(const struct NcElement *a, double *re, double *im);

/**
 * Coefficient 2-norm.
 *
 * # Safety
 * `a` must be live and `out` writable.
 */
enum NcStatus nc_element_l2_norm(const struct NcElement *a, double *out);

/**
 * `u^r v^s ↦ u'^{mr} v'^{ns}` into the cover with twist `k`.
 *
 * # Safety
 * `a` must be live and `out` writable.
 */
enum NcStatus nc_element_embed(uint32_t m,
                               uint32_t n,
                               uint64_t k,
                               const struct NcElement *a,
                               struct NcElement **out);

/**
 * Runs the Galois round trip and writes the JSON report. `theta` accepts
 * `[p,q]`, `p/q` or a decimal.
 *
 * # Safety
 * `theta` must be a nul-terminated string; `out_json` and `pass` writable.
 */
enum NcStatus nc_verify_galois(uint32_t m,
                               uint32_t n,
                               uint64_t k,
                               const char *theta,
                               int64_t truncation,
                               size_t trials,
                               uint64_t seed,
                               char **out_json,
                               bool *pass);

/**
 * Runs a named scenario with `argc` command-line style options and writes
 * its JSON report without the duration field.
 *
 * # Safety
 * `name` and each of the `argc` entries of `argv` must be nul-terminated
 * strings; `out_json` and `pass` writable.
 */
enum NcStatus nc_scenario_run(const char *name,
                              const char *const *argv,
                              size_t argc,
                              char **out_json,
                              bool *pass);

/**
 * Winding number of a closed loop of `len` unit complex samples given as
 * interleaved `(re, im)` pairs.
 *
 * # Safety
 * `samples` must point to `2·len` doubles; `out` writable.
 */
enum NcStatus nc_winding_number(const double *samples, size_t len, int64_t *out);

/**
 * The `q`-dimensional clock/shift representation of `A_{p/q}`.
 *
 * # Safety
 * `out` must be writable.
 */
enum NcStatus nc_clock_shift_rep(int64_t p, uint64_t q, struct NcRep **out);

/**
 * # Safety
 * `r` must be live and `out` writable.
 */
enum NcStatus nc_rep_dim(const struct NcRep *r, size_t *out);

/**
 * `‖ρ(u)ρ(v) − e^{2πiθ} ρ(v)ρ(u)‖`.
 *
 * # Safety
 * `r` must be live and `out` writable.
 */
enum NcStatus nc_rep_relation_residual(const struct NcRep *r, double *out);

/**
 * `ρ(a)` as JSON `[[[re, im], ...], ...]` (row-major).
 *
 * # Safety
 * Handles must be live and `out_json` writable.
 */
enum NcStatus nc_rep_evaluate(const struct NcRep *r, const struct NcElement *a, char **out_json);

/**
 * # Safety
 * `r` must be null or a handle from this library, not used afterwards.
 */
void nc_rep_free(struct NcRep *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NC_COVER_H */
