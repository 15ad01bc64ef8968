#ifndef RANKLABEL_H
#define RANKLABEL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. Zero means success.
typedef enum RlStatus {
  RL_OK = 0,
  RL_NULL_ARGUMENT = 1,
  RL_INVALID_UTF8 = 2,
  RL_INVALID_DATASET = 3,
  RL_INVALID_REQUEST = 4,
  RL_UNKNOWN_ATTRIBUTE = 5,
  RL_TYPE_MISMATCH = 6,
  RL_INSUFFICIENT_DATA = 7,
  RL_INVALID_ARGUMENT = 8,
  RL_BUFFER_TOO_SMALL = 9,
  RL_INTERNAL = 10,
} RlStatus;

// Parsed dataset.
typedef struct RlDataset RlDataset;

// Computed nutritional label.
typedef struct RlLabel RlLabel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *rl_version(void);

// Message for the last failure on this thread, or NULL. Valid until the
// next failing call on the same thread.
const char *rl_last_error_message(void);

// Parses `len` bytes of CSV into a new dataset handle.
//
// # Safety
// `data` must point to `len` readable bytes; `out` must be writable.
enum RlStatus rl_dataset_load_csv(const uint8_t *data, size_t len, struct RlDataset **out);

// Number of data rows, or 0 for NULL.
//
// # Safety
// `dataset` must be NULL or a live handle.
size_t rl_dataset_row_count(const struct RlDataset *dataset);

// # Safety
// `dataset` must be NULL or a handle not yet freed.
void rl_dataset_free(struct RlDataset *dataset);

// Ranks `dataset` according to a JSON request and builds its label.
//
// The request object has `weights` (attribute to weight), `sensitive_attribute`,
// and optional `normalization`, `diversity_attributes`, `k`, `alpha`, `p`.
//
// # Safety
// `dataset` must be a live handle, `request_json` a NUL-terminated string
// and `out` writable.
enum RlStatus rl_label_build(const struct RlDataset *dataset,
                             const char *request_json,
                             struct RlLabel **out);

// Canonical JSON of a label. Free the result with [`rl_string_free`].
//
// # Safety
// `label` must be a live handle and `out` writable.
enum RlStatus rl_label_to_json(const struct RlLabel *label, char **out);

// Self-contained HTML rendering of a label. Free the result with
// [`rl_string_free`].
//
// # Safety
// `label` must be a live handle and `out` writable.
enum RlStatus rl_label_to_html(const struct RlLabel *label, char **out);

// # Safety
// `label` must be NULL or a handle not yet freed.
void rl_label_free(struct RlLabel *label);

// # Safety
// `s` must be NULL or a string returned by this library and not yet freed.
void rl_string_free(char *s);

// P(X <= t) for X ~ Binomial(n, p).
//
// # Safety
// `out` must be writable.
enum RlStatus rl_binomial_cdf(size_t t, size_t n, double p, double *out);

// Writes the minimum protected count for each prefix 1..=k into `out`,
// which must hold at least `k` entries.
//
// # Safety
// `out` must point to `out_len` writable `size_t` values.
enum RlStatus rl_fair_min_table(size_t k, double p, double alpha, size_t *out, size_t out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RANKLABEL_H */
