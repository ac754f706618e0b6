#ifndef PHLT_H
#define PHLT_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes for every fallible entry point.
typedef enum PhltStatus {
  PHLT_STATUS_OK = 0,
  // A required pointer argument was null.
  PHLT_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  PHLT_STATUS_INVALID_UTF8 = 2,
  // The file could not be read or written.
  PHLT_STATUS_IO = 3,
  // The model file is damaged or not a model file.
  PHLT_STATUS_CORRUPT_MODEL = 4,
  // The model file was written by a newer library version.
  PHLT_STATUS_VERSION_MISMATCH = 5,
  // Any other failure; see `phlt_last_error_message`.
  PHLT_STATUS_FAILED = 6,
} PhltStatus;

// Opaque trained-model handle.
typedef struct PhltModel PhltModel;

// Library version as a static string; never freed by the caller.
const char *phlt_version(void);

// Message for the most recent failure on this thread. The pointer stays
// valid until the next failing call on the same thread; do not free it.
const char *phlt_last_error_message(void);

// Load a model file written by the `phlt train` command.
//
// # Safety
// `path` must be a valid NUL-terminated string and `out` a valid pointer.
// On `Ok` the caller owns the handle and must release it with
// [`phlt_model_free`].
enum PhltStatus phlt_model_load(const char *path, struct PhltModel **out);

// Release a model handle. Passing null is a no-op.
//
// # Safety
// `model` must be a handle from [`phlt_model_load`] that has not been
// freed.
void phlt_model_free(struct PhltModel *model);

// Number of classes the model distinguishes; 0 for a null handle.
//
// # Safety
// `model` must be a live handle or null.
int phlt_model_num_classes(const struct PhltModel *model);

// Model kind ("mnb", "logreg", "svm", "nbsvm", "forest"); free the string
// with [`phlt_string_free`].
//
// # Safety
// `model` must be a live handle and `out` a valid pointer.
enum PhltStatus phlt_model_kind(const struct PhltModel *model, char **out);

// Classify one text. `out_label` receives the predicted label. When
// `out_scores` is non-null, up to `scores_capacity` per-class decision
// scores are written in class order; `out_n_scores`, when non-null,
// receives the class count.
//
// # Safety
// Pointers must be valid; `out_scores`, when non-null, must point at at
// least `scores_capacity` doubles.
enum PhltStatus phlt_predict(const struct PhltModel *model,
                             const char *text,
                             int *out_label,
                             double *out_scores,
                             uintptr_t scores_capacity,
                             uintptr_t *out_n_scores);

// Split `text` into paragraphs (blank-line separated; grant XML is
// detected and split on its `<p>` elements), classify each, and return the
// highlight JSON document. `sentences` non-zero switches to sentence
// units. Free the result with [`phlt_string_free`].
//
// # Safety
// `model` must be a live handle; `text` a valid NUL-terminated string;
// `out` a valid pointer.
enum PhltStatus phlt_highlight_json(const struct PhltModel *model,
                                    const char *text,
                                    int sentences,
                                    char **out);

// Top-k token attributions for `text` as a JSON document. `surrogate`
// non-zero uses the perturbation surrogate (required for forest models).
// Free the result with [`phlt_string_free`].
//
// # Safety
// As for [`phlt_highlight_json`].
enum PhltStatus phlt_explain_json(const struct PhltModel *model,
                                  const char *text,
                                  uintptr_t top_k,
                                  int surrogate,
                                  char **out);

// Release a string returned by this library. Passing null is a no-op.
//
// # Safety
// `s` must be a pointer previously returned through an out-parameter of
// this library and not yet freed.
void phlt_string_free(char *s);

#endif  /* PHLT_H */
