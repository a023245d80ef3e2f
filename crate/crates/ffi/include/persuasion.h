#ifndef PERSUASION_H
#define PERSUASION_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PersuasionStatus {
  PERSUASION_STATUS_OK = 0,
  PERSUASION_STATUS_NULL_POINTER = 1,
  PERSUASION_STATUS_INVALID_UTF8 = 2,
  PERSUASION_STATUS_INVALID_ARGUMENT = 3,
  PERSUASION_STATUS_UNKNOWN_PRESET = 4,
  PERSUASION_STATUS_PARSE = 5,
  PERSUASION_STATUS_SHAPE_MISMATCH = 6,
  PERSUASION_STATUS_SCHEMA_VERSION = 7,
  PERSUASION_STATUS_INFEASIBLE = 8,
  PERSUASION_STATUS_SIZE_LIMIT = 9,
  PERSUASION_STATUS_ILL_POSED = 10,
  PERSUASION_STATUS_NUMERICAL = 11,
  PERSUASION_STATUS_BUFFER_TOO_SMALL = 12,
  PERSUASION_STATUS_IO = 13,
  PERSUASION_STATUS_INTERNAL = 14,
  PERSUASION_STATUS_PANIC = 15,
} PersuasionStatus;

// Opaque problem handle.
typedef struct PersuasionProblem PersuasionProblem;

// Opaque LP solution handle.
typedef struct PersuasionSolution PersuasionSolution;

// LP solve options. Zero or negative fields select the defaults.
typedef struct PersuasionSolveOptions {
  // 1 selects Bland's rule throughout, anything else Dantzig pricing.
  int32_t bland;
  double optimality_tol;
  // Contact tolerance relative to the payoff scale.
  double contact_tol;
} PersuasionSolveOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the next failure.
const char *persuasion_last_error(void);

// Library version as a static NUL-terminated string.
const char *persuasion_version(void);

// Builds a catalog preset. `params` may be NULL or `"k=v,k=v"`. `grid_m = 0` keeps the preset's action grid.
//
// # Safety
// `id` and `params` must be NULL or NUL-terminated strings; `out` must be writable.
enum PersuasionStatus persuasion_problem_from_preset(const char *id,
                                                     const char *params,
                                                     size_t grid_n,
                                                     size_t grid_m,
                                                     struct PersuasionProblem **out);

// Builds a problem from spec-file JSON text (preset reference or inline tables).
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum PersuasionStatus persuasion_problem_from_json(const char *json,
                                                   struct PersuasionProblem **out);

// # Safety
// `p` must be NULL or a handle from this library that has not been freed.
void persuasion_problem_free(struct PersuasionProblem *p);

// Grid sizes of a problem; either output may be NULL.
//
// # Safety
// `p` must be a live problem handle; non-NULL outputs must be writable.
enum PersuasionStatus persuasion_problem_dims(const struct PersuasionProblem *p,
                                              size_t *n_states,
                                              size_t *n_actions);

// Solves the outcome LP. `opts` may be NULL.
//
// # Safety
// `p` must be a live problem handle, `opts` NULL or valid, `out` writable.
enum PersuasionStatus persuasion_solve(const struct PersuasionProblem *p,
                                       const struct PersuasionSolveOptions *opts,
                                       struct PersuasionSolution **out);

// # Safety
// `s` must be NULL or a handle from this library that has not been freed.
void persuasion_solution_free(struct PersuasionSolution *s);

// Primal objective and |primal − dual|; either output may be NULL.
//
// # Safety
// `s` must be a live solution handle; non-NULL outputs must be writable.
enum PersuasionStatus persuasion_solution_objective(const struct PersuasionSolution *s,
                                                    double *objective,
                                                    double *duality_gap);

// Copies the outcome, row-major by action (`n_actions * n_states` values), into `buf`.
//
// # Safety
// `s` must be a live solution handle and `buf` valid for `len` doubles.
enum PersuasionStatus persuasion_solution_outcome(const struct PersuasionSolution *s,
                                                  double *buf,
                                                  size_t len);

// Copies the state prices (`n_states`) and obedience multipliers (`n_actions`).
//
// # Safety
// `s` must be a live solution handle; `p` and `q` valid for `np` and `nq` doubles.
enum PersuasionStatus persuasion_solution_prices(const struct PersuasionSolution *s,
                                                 double *p,
                                                 size_t np,
                                                 double *q,
                                                 size_t nq);

// Runs every structure checker and returns the verdicts as a JSON array in `*out`.
//
// # Safety
// `p` and `s` must be live handles, `s` solved from `p`; `out` must be writable.
enum PersuasionStatus persuasion_check_json(const struct PersuasionProblem *p,
                                            const struct PersuasionSolution *s,
                                            char **out);

// Solves the NAD boundary-value problem with the problem's prior density and
// returns nodes, residuals and the LP comparison (when `s` is non-NULL) as JSON.
//
// # Safety
// `p` must be a live problem handle, `s` NULL or a solution of `p`, `out` writable.
enum PersuasionStatus persuasion_nad_json(const struct PersuasionProblem *p,
                                          const struct PersuasionSolution *s,
                                          char **out);

// # Safety
// `s` must be NULL or a string returned by this library that has not been freed.
void persuasion_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PERSUASION_H */
