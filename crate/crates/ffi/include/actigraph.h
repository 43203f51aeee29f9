#ifndef ACTIGRAPH_H
#define ACTIGRAPH_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Pruning score.
typedef enum ActgMethod {
  ACTG_METHOD_WANDA = 0,
  ACTG_METHOD_MAGNITUDE = 1,
} ActgMethod;

// Result code of every fallible call.
typedef enum ActgStatus {
  ACTG_STATUS_OK = 0,
  ACTG_STATUS_NULL_POINTER = 1,
  ACTG_STATUS_INVALID_ARGUMENT = 2,
  ACTG_STATUS_SHAPE = 3,
  ACTG_STATUS_INDEX = 4,
  ACTG_STATUS_CONTRACT = 5,
  ACTG_STATUS_CONFIG = 6,
  ACTG_STATUS_LENGTH = 7,
  ACTG_STATUS_DATA = 8,
  ACTG_STATUS_FORMAT = 9,
  ACTG_STATUS_NUMERIC = 10,
  ACTG_STATUS_SCHEDULE = 11,
  ACTG_STATUS_DEGENERATE = 12,
  ACTG_STATUS_IO = 13,
  ACTG_STATUS_BUFFER_TOO_SMALL = 14,
  ACTG_STATUS_PANIC = 15,
} ActgStatus;

// Opaque per-layer activation vector.
typedef struct ActgActivation ActgActivation;

// Opaque model handle.
typedef struct ActgModel ActgModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL after a success.
// The pointer stays valid until the next call on this thread.
const char *actg_last_error(void);

// Size of the byte-level vocabulary.
size_t actg_vocab_size(void);

// Encodes `text` as an analysis sample (`BOS` + bytes, at most `max_len`
// ids). Writes up to `cap` ids and the full length to `out_len`; returns
// `BUFFER_TOO_SMALL` when `cap` is insufficient.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must hold `cap` ids.
enum ActgStatus actg_encode_sample(const char *text,
                                   size_t max_len,
                                   uint32_t *out,
                                   size_t cap,
                                   size_t *out_len);

// Freshly initialized model (vocabulary fixed to the byte tokenizer).
//
// # Safety
// `out` must be a valid pointer.
enum ActgStatus actg_model_init(size_t n_layers,
                                size_t d_model,
                                size_t n_heads,
                                size_t d_ff,
                                size_t context_len,
                                uint64_t seed,
                                struct ActgModel **out);

// Loads a checkpoint.
//
// # Safety
// `path` must be NUL-terminated; `out` must be a valid pointer.
enum ActgStatus actg_model_load(const char *path, struct ActgModel **out);

// Writes a checkpoint.
//
// # Safety
// `model` must be a live handle; `path` NUL-terminated.
enum ActgStatus actg_model_save(const struct ActgModel *model, const char *path);

// Releases a model; NULL is ignored.
//
// # Safety
// `model` must come from this library and not be used afterwards.
void actg_model_free(struct ActgModel *model);

// Number of decoder layers, or 0 for NULL.
//
// # Safety
// `model` must be NULL or a live handle.
size_t actg_model_n_layers(const struct ActgModel *model);

// Context length, or 0 for NULL.
//
// # Safety
// `model` must be NULL or a live handle.
size_t actg_model_context_len(const struct ActgModel *model);

// Prunable parameters per layer, or 0 for NULL.
//
// # Safety
// `model` must be NULL or a live handle.
size_t actg_model_prunable_per_layer(const struct ActgModel *model);

// Activation `|w * dL/dw|` of every prunable weight for one sample.
//
// # Safety
// `tokens` must hold `n_tokens` ids; `out` must be a valid pointer.
enum ActgStatus actg_activation_compute(const struct ActgModel *model,
                                        const uint32_t *tokens,
                                        size_t n_tokens,
                                        struct ActgActivation **out);

// Mean activation over samples packed back to back in `tokens`;
// `lengths[i]` is the length of sample `i`.
//
// # Safety
// `lengths` must hold `n_samples` entries and `tokens` their sum.
enum ActgStatus actg_activation_mean(const struct ActgModel *model,
                                     const uint32_t *tokens,
                                     const size_t *lengths,
                                     size_t n_samples,
                                     struct ActgActivation **out);

// Borrowed view of one 1-based layer's values; valid while `act` lives.
//
// # Safety
// `act` must be a live handle; `data` and `len` valid pointers.
enum ActgStatus actg_activation_layer(const struct ActgActivation *act,
                                      size_t layer,
                                      const float **data,
                                      size_t *len);

// Releases an activation vector; NULL is ignored.
//
// # Safety
// `act` must come from this library and not be used afterwards.
void actg_activation_free(struct ActgActivation *act);

// Cosine of two activation vectors restricted to a 1-based layer.
//
// # Safety
// `a`, `b` must be live handles and `out` a valid pointer.
enum ActgStatus actg_llmdcos_layer(const struct ActgActivation *a,
                                   const struct ActgActivation *b,
                                   size_t layer,
                                   double *out);

// Spearman rank correlation with tie-averaged ranks.
//
// # Safety
// `x` and `y` must hold `n` values each.
enum ActgStatus actg_spearman(const double *x, const double *y, size_t n, double *out);

// Two-band per-layer sparsity for `model`: the 1-based `shallow` layers get
// `shallow_s`, the rest the value that keeps the parameter-weighted mean at
// `global_s`. Writes `n_layers` fractions to `out`.
//
// # Safety
// `shallow` must hold `n_shallow` entries and `out` `out_cap` values.
enum ActgStatus actg_build_schedule(const struct ActgModel *model,
                                    double global_s,
                                    const size_t *shallow,
                                    size_t n_shallow,
                                    double shallow_s,
                                    double *out,
                                    size_t out_cap);

// Prunes `model` with per-layer fractions `per_layer` (length `n_layers`).
// Wanda uses `n_calib` calibration sequences of `calib_len` tokens packed in
// `calib`; magnitude ignores them. The input model is not modified.
//
// # Safety
// Pointers must be valid for the stated lengths; `out` a valid pointer.
enum ActgStatus actg_prune(const struct ActgModel *model,
                           const double *per_layer,
                           size_t n_layers,
                           const uint32_t *calib,
                           size_t n_calib,
                           size_t calib_len,
                           enum ActgMethod method,
                           struct ActgModel **out);

// Perplexity over disjoint windows of `context_len` tokens.
//
// # Safety
// `tokens` must hold `n_tokens` ids; `out` a valid pointer.
enum ActgStatus actg_perplexity(const struct ActgModel *model,
                                const uint32_t *tokens,
                                size_t n_tokens,
                                size_t context_len,
                                double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ACTIGRAPH_H */
