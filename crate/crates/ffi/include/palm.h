#ifndef PALM_H
#define PALM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum PalmStatus {
  PALM_STATUS_OK = 0,
  PALM_STATUS_NULL_POINTER = 1,
  PALM_STATUS_INVALID_ARGUMENT = 2,
  PALM_STATUS_OUT_OF_BOUNDS = 3,
  PALM_STATUS_INTERNAL = 4,
} PalmStatus;

// First splitting direction of a fit.
typedef enum PalmDirection {
  PALM_DIRECTION_VERTICAL = 0,
  PALM_DIRECTION_HORIZONTAL = 1,
} PalmDirection;

// Points snapped to a lattice.
typedef struct PalmDataset PalmDataset;

// A fitted histogram.
typedef struct PalmFit PalmFit;

// Axis-aligned rectangle in data coordinates.
typedef struct PalmRect {
  double x0;
  double y0;
  double x1;
  double y1;
} PalmRect;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or an empty string.
// The pointer stays valid until the next call on the same thread.
const char *palm_last_error(void);

// Builds a dataset from `n` coordinate pairs. With `auto_space` set, the
// sample space is the smallest lattice rectangle covering the points and
// `x0..y1` are ignored; otherwise it is `[x0, x1] x [y0, y1]`.
//
// # Safety
// `xs` and `ys` must point to `n` readable doubles (or be null when `n` is
// 0); `out` must be writable.
enum PalmStatus palm_dataset_new(const double *xs,
                                 const double *ys,
                                 size_t n,
                                 double epsilon,
                                 double x0,
                                 double y0,
                                 double x1,
                                 double y1,
                                 bool auto_space,
                                 struct PalmDataset **out);

// # Safety
// `dataset` must come from [`palm_dataset_new`] and not be used afterwards.
void palm_dataset_free(struct PalmDataset *dataset);

// Number of points, or 0 for a null handle.
//
// # Safety
// `dataset` must be null or a live handle.
size_t palm_dataset_len(const struct PalmDataset *dataset);

// Fits a histogram over the dataset's sample space.
//
// # Safety
// `dataset` must be a live handle and `out` writable.
enum PalmStatus palm_fit(const struct PalmDataset *dataset,
                         size_t k_max,
                         enum PalmDirection direction,
                         struct PalmFit **out);

// # Safety
// `fit` must come from [`palm_fit`] and not be used afterwards.
void palm_fit_free(struct PalmFit *fit);

// Number of regions, or 0 for a null handle.
//
// # Safety
// `fit` must be null or a live handle.
size_t palm_fit_region_count(const struct PalmFit *fit);

// Code length of the data under the fitted histogram, in bits; NaN for a
// null handle.
//
// # Safety
// `fit` must be null or a live handle.
double palm_fit_total_bits(const struct PalmFit *fit);

// # Safety
// `fit` must be a live handle and `out` writable.
enum PalmStatus palm_fit_region_density(const struct PalmFit *fit, size_t region, double *out);

// Number of points in a region.
//
// # Safety
// `fit` must be a live handle and `out` writable.
enum PalmStatus palm_fit_region_count_points(const struct PalmFit *fit, size_t region, size_t *out);

// # Safety
// `fit` must be a live handle and `out` writable.
enum PalmStatus palm_fit_region_rect_count(const struct PalmFit *fit, size_t region, size_t *out);

// Rectangle `index` of a region, in data coordinates.
//
// # Safety
// `fit` must be a live handle and `out` writable.
enum PalmStatus palm_fit_region_rect(const struct PalmFit *fit,
                                     size_t region,
                                     size_t index,
                                     struct PalmRect *out);

// The fit as a partition JSON document. Free the string with
// [`palm_string_free`].
//
// # Safety
// `fit` must be a live handle and `out` writable.
enum PalmStatus palm_fit_to_json(const struct PalmFit *fit, char **out);

// # Safety
// `s` must come from this library and not be used afterwards.
void palm_string_free(char *s);

// log2 COMP(n, k): the parametric complexity of a k-bin multinomial.
//
// # Safety
// `out` must be writable.
enum PalmStatus palm_log_comp(size_t n, size_t k, double *out);

// Library version as a static NUL-terminated string.
const char *palm_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PALM_H */
