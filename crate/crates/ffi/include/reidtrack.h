#ifndef REIDTRACK_H
#define REIDTRACK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RtStatus {
  RT_STATUS_OK = 0,
  RT_STATUS_NULL_POINTER = 1,
  RT_STATUS_INVALID_ARGUMENT = 2,
  RT_STATUS_INVALID_CONFIG = 3,
  RT_STATUS_DIMENSION_MISMATCH = 4,
  RT_STATUS_ZERO_NORM = 5,
  RT_STATUS_NON_MONOTONIC_FRAME = 6,
  RT_STATUS_BUFFER_TOO_SMALL = 7,
  RT_STATUS_PANIC = 99,
} RtStatus;

/**
 * Opaque tracker handle.
 */
typedef struct RtTracker RtTracker;

/**
 * Tracker parameters. Fill with [`rt_config_default`] before changing fields.
 */
typedef struct RtConfig {
  double high_thresh;
  double low_thresh;
  double sim_gate_high;
  double sim_gate_low;
  size_t tau;
  uint32_t max_lost_age;
  double min_init_score;
  /**
   * Nonzero: detections only match tracks of the same class.
   */
  int32_t per_class;
  /**
   * Nonzero: the second stage matches low-band detections only.
   */
  int32_t low_only_second_stage;
  /**
   * Zero: take the dimension from the first embedding seen.
   */
  size_t embedding_dim;
} RtConfig;

/**
 * One detection. Its embedding lives in the `embeddings` array passed
 * alongside, at row `i` for the `i`-th detection.
 */
typedef struct RtDetection {
  double x;
  double y;
  double w;
  double h;
  double score;
  uint32_t class_id;
} RtDetection;

typedef struct RtOutput {
  uint32_t frame;
  uint32_t track_id;
  double x;
  double y;
  double w;
  double h;
  double score;
  uint32_t class_id;
} RtOutput;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the NUL, or
 * 0 when there is no error.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t rt_last_error_message(char *buf, size_t len);

/**
 * Static, NUL-terminated version string.
 */
const char *rt_version(void);

/**
 * # Safety
 * `out` must be null or valid for writes.
 */
enum RtStatus rt_config_default(struct RtConfig *out);

/**
 * Creates a tracker. `config` may be null for defaults.
 *
 * # Safety
 * `config` must be null or valid; `out` must be valid for writes.
 */
enum RtStatus rt_tracker_new(const struct RtConfig *config, struct RtTracker **out);

/**
 * # Safety
 * `tracker` must be null or a handle from [`rt_tracker_new`] not yet freed.
 */
void rt_tracker_free(struct RtTracker *tracker);

/**
 * Advances the tracker by one frame. `embeddings` holds `num_detections`
 * rows of `dim` values. The frame's outputs are kept in the handle; their
 * count goes to `num_outputs` and they are read with
 * [`rt_tracker_outputs`].
 *
 * # Safety
 * All pointers must be valid for the stated lengths; `detections` and
 * `embeddings` may be null only when `num_detections` is 0.
 */
enum RtStatus rt_tracker_step(struct RtTracker *tracker,
                              uint32_t frame,
                              const struct RtDetection *detections,
                              size_t num_detections,
                              const double *embeddings,
                              size_t dim,
                              size_t *num_outputs);

/**
 * Copies the outputs of the last step into `buf`. Fails with
 * `BufferTooSmall` when `cap` is short; `written` always receives the
 * number of outputs available.
 *
 * # Safety
 * `tracker` must be a live handle, `buf` valid for `cap` writes, `written`
 * valid for one write.
 */
enum RtStatus rt_tracker_outputs(const struct RtTracker *tracker,
                                 struct RtOutput *buf,
                                 size_t cap,
                                 size_t *written);

/**
 * Number of tracks started so far.
 *
 * # Safety
 * `tracker` must be null or a live handle.
 */
uint32_t rt_tracker_tracks_created(const struct RtTracker *tracker);

/**
 * Minimum-cost assignment on a row-major `rows x cols` matrix. Entries equal
 * to +infinity are forbidden. `row_to_col[r]` receives the matched column
 * or -1.
 *
 * # Safety
 * `costs` must hold `rows * cols` values, `row_to_col` `rows` slots, and
 * `total_cost` must be valid for one write.
 */
enum RtStatus rt_solve_assignment(const double *costs,
                                  size_t rows,
                                  size_t cols,
                                  int64_t *row_to_col,
                                  double *total_cost);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REIDTRACK_H */
