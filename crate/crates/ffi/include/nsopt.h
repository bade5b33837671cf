#ifndef NSOPT_H
#define NSOPT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NsoptStatus {
  NSOPT_STATUS_OK = 0,
  NSOPT_STATUS_NULL_POINTER = 1,
  NSOPT_STATUS_INVALID_ARGUMENT = 2,
  NSOPT_STATUS_PARSE_ERROR = 3,
  NSOPT_STATUS_CONFIG_ERROR = 4,
  NSOPT_STATUS_IO_ERROR = 5,
  NSOPT_STATUS_RUNTIME_ERROR = 6,
  NSOPT_STATUS_PANIC = 7,
} NsoptStatus;

/**
 * A loaded binary-classification dataset.
 */
typedef struct NsoptDataset NsoptDataset;

/**
 * A hinge-loss SVM objective bound to a dataset.
 */
typedef struct NsoptProblem NsoptProblem;

/**
 * The result of one solver run.
 */
typedef struct NsoptTrace NsoptTrace;

/**
 * One trace row. Missing values (`alpha` at `k = 0`, untracked `f_true`)
 * are NaN.
 */
typedef struct NsoptRecord {
  uint64_t k;
  uint64_t n_k;
  double alpha;
  double zeta;
  uint64_t fev_cum;
  double f_saa;
  double f_true;
} NsoptRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length
 * including the terminator, or 0 when there is no error.
 */
size_t nsopt_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *nsopt_version(void);

/**
 * Loads a LIBSVM file; `.gz` files are decompressed.
 */
enum NsoptStatus nsopt_dataset_load(const char *path, struct NsoptDataset **out);

/**
 * Parses LIBSVM text held in memory.
 */
enum NsoptStatus nsopt_dataset_parse(const char *text, struct NsoptDataset **out);

/**
 * Number of rows; 0 for a null handle.
 */
size_t nsopt_dataset_rows(const struct NsoptDataset *dataset);

/**
 * Number of feature columns; 0 for a null handle.
 */
size_t nsopt_dataset_cols(const struct NsoptDataset *dataset);

void nsopt_dataset_free(struct NsoptDataset *dataset);

/**
 * Builds the regularised hinge-loss objective on `dataset`. The dataset
 * handle may be freed afterwards.
 */
enum NsoptStatus nsopt_problem_hinge_new(const struct NsoptDataset *dataset,
                                         double reg_coeff,
                                         struct NsoptProblem **out);

size_t nsopt_problem_dim(const struct NsoptProblem *problem);

/**
 * Full-sample objective value at `x`.
 */
enum NsoptStatus nsopt_problem_value(const struct NsoptProblem *problem,
                                     const double *x,
                                     size_t dim,
                                     double *out);

void nsopt_problem_free(struct NsoptProblem *problem);

/**
 * Runs `method` (e.g. "ls-sps") on `problem` over the ball
 * `||x||^2 <= radius_sq`. `config_json` is an optional solver config
 * document (NULL for defaults); `seed` overrides its seed.
 */
enum NsoptStatus nsopt_run(const struct NsoptProblem *problem,
                           const char *method,
                           const char *config_json,
                           uint64_t seed,
                           uint64_t budget,
                           double radius_sq,
                           struct NsoptTrace **out);

/**
 * Number of records, including the initial one; 0 for a null handle.
 */
size_t nsopt_trace_len(const struct NsoptTrace *trace);

enum NsoptStatus nsopt_trace_record(const struct NsoptTrace *trace,
                                    size_t index,
                                    struct NsoptRecord *out);

/**
 * Copies the final iterate into `buf`, which must hold `dim` values.
 */
enum NsoptStatus nsopt_trace_final_point(const struct NsoptTrace *trace, double *buf, size_t dim);

/**
 * Writes the trace as schema-tagged CSV.
 */
enum NsoptStatus nsopt_trace_write_csv(const struct NsoptTrace *trace, const char *path);

void nsopt_trace_free(struct NsoptTrace *trace);

/**
 * Safeguarded spectral coefficient `clamp(s's / s'y)` for step `s` and
 * subgradient difference `y`.
 */
enum NsoptStatus nsopt_spectral_update(const double *s,
                                       const double *y,
                                       size_t dim,
                                       double zeta_min,
                                       double zeta_max,
                                       double previous,
                                       double *out);

/**
 * Projects `x` in place onto the ball `||x||^2 <= radius_sq`.
 */
enum NsoptStatus nsopt_project_ball(double *x, size_t dim, double radius_sq);

/**
 * Projects `x` in place onto the box `[lower, upper]`.
 */
enum NsoptStatus nsopt_project_box(double *x, const double *lower, const double *upper, size_t dim);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NSOPT_H */
