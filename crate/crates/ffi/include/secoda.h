/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef SECODA_H
#define SECODA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SecodaStatus {
  SECODA_STATUS_OK = 0,
  SECODA_STATUS_NULL_POINTER = 1,
  SECODA_STATUS_INVALID_ARGUMENT = 2,
  SECODA_STATUS_IO = 3,
  SECODA_STATUS_NON_CONVERGENCE = 4,
  SECODA_STATUS_BUFFER_TOO_SMALL = 5,
  SECODA_STATUS_PANIC = 6,
} SecodaStatus;

// Opaque dataset handle. Generated datasets also carry labels.
typedef struct SecodaDataset SecodaDataset;

// Opaque detection result handle.
typedef struct SecodaResult SecodaResult;

// Detector settings. Obtain defaults from [`secoda_config_default`].
typedef struct SecodaConfig {
  double anomaly_fraction;
  double prune_quantile;
  bool pruning_enabled;
  bool accelerated_stepping;
  bool weighted_scores;
  // Bin edges from the full dataset instead of the working set.
  bool global_range;
  uint32_t max_iterations;
} SecodaConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL after a
// successful call. Valid until the next call on the same thread.
const char *secoda_last_error(void);

// Library version as a static NUL-terminated string.
const char *secoda_version(void);

struct SecodaConfig secoda_config_default(void);

// Loads a CSV file with a header row, inferring attribute kinds. Empty
// cells and `NA` are read as missing.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum SecodaStatus secoda_dataset_load_csv(const char *path, struct SecodaDataset **out);

// Generates a labeled synthetic dataset. `kind` is one of `mountain`,
// `helix`, `timeseries` or `noisymix`; `n = 0` selects the kind's default
// size.
//
// # Safety
// `kind` must be a NUL-terminated string and `out` a valid pointer.
enum SecodaStatus secoda_dataset_generate(const char *kind,
                                          size_t n,
                                          uint64_t seed,
                                          struct SecodaDataset **out);

// Number of cases, or 0 for a NULL handle.
//
// # Safety
// `dataset` must be NULL or a live handle.
size_t secoda_dataset_len(const struct SecodaDataset *dataset);

// Whether the dataset carries ground-truth labels.
//
// # Safety
// `dataset` must be NULL or a live handle.
bool secoda_dataset_has_labels(const struct SecodaDataset *dataset);

// Copies the labels into `buf` as 1 (anomaly) or 0 (normal). `len` must be
// at least the number of cases.
//
// # Safety
// `buf` must point to `len` writable bytes.
enum SecodaStatus secoda_dataset_labels(const struct SecodaDataset *dataset,
                                        uint8_t *buf,
                                        size_t len);

// # Safety
// `dataset` must be NULL or a handle not yet freed.
void secoda_dataset_free(struct SecodaDataset *dataset);

// Runs the detector. `config` may be NULL for the defaults.
//
// # Safety
// `dataset` must be a live handle, `config` NULL or valid, `out` valid.
enum SecodaStatus secoda_detect(const struct SecodaDataset *dataset,
                                const struct SecodaConfig *config,
                                struct SecodaResult **out);

// Number of scored cases, or 0 for a NULL handle.
//
// # Safety
// `result` must be NULL or a live handle.
size_t secoda_result_len(const struct SecodaResult *result);

// Iterations the detector ran, or 0 for a NULL handle.
//
// # Safety
// `result` must be NULL or a live handle.
uint32_t secoda_result_iterations(const struct SecodaResult *result);

// Copies the scores (lower is more anomalous) into `buf` in case order.
//
// # Safety
// `buf` must point to `len` writable doubles.
enum SecodaStatus secoda_result_scores(const struct SecodaResult *result, double *buf, size_t len);

// # Safety
// `result` must be NULL or a handle not yet freed.
void secoda_result_free(struct SecodaResult *result);

// ROC AUC of `scores` (low = anomalous) against `labels` (nonzero =
// anomaly).
//
// # Safety
// `scores` and `labels` must each point to `n` readable values.
enum SecodaStatus secoda_roc_auc(const double *scores,
                                 const uint8_t *labels,
                                 size_t n,
                                 double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SECODA_H */
