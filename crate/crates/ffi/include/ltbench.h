#ifndef LTBENCH_H
#define LTBENCH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum LtbStatus {
  LTB_STATUS_OK = 0,
  LTB_STATUS_NULL_POINTER = 1,
  LTB_STATUS_INVALID_ARGUMENT = 2,
  LTB_STATUS_IO = 3,
  LTB_STATUS_EMPTY_EVALUATION = 4,
  LTB_STATUS_SEQUENCE_MISMATCH = 5,
  LTB_STATUS_TRACKER_NOT_INITIALIZED = 6,
  LTB_STATUS_TRACKER = 7,
  LTB_STATUS_PANIC = 8,
} LtbStatus;

typedef enum LtbProtocol {
  LTB_PROTOCOL_SEQUENCE_BASED = 0,
  LTB_PROTOCOL_FRAME_BASED = 1,
} LtbProtocol;

/**
 * Ground-truth annotations of a dataset.
 */
typedef struct LtbDataset LtbDataset;

/**
 * Curves and best points of one evaluation.
 */
typedef struct LtbReport LtbReport;

/**
 * Result files of one tracker.
 */
typedef struct LtbRun LtbRun;

/**
 * Correlation tracker plus its state after `ltb_tracker_init`.
 */
typedef struct LtbTracker LtbTracker;

typedef struct LtbBox {
  double x;
  double y;
  double w;
  double h;
} LtbBox;

/**
 * One threshold of a precision/recall curve.
 */
typedef struct LtbPoint {
  double tau;
  double pr;
  double re;
  double f;
} LtbPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ltb_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncated,
 * always NUL-terminated when `len > 0`). Returns the full message length
 * excluding the terminator.
 */
size_t ltb_last_error_message(char *buf, size_t len);

/**
 * Intersection over union of two boxes.
 */
enum LtbStatus ltb_iou(const struct LtbBox *a, const struct LtbBox *b, double *out);

/**
 * Harmonic mean of precision and recall (0 when both are 0).
 */
double ltb_f_score(double pr, double re);

/**
 * Loads the annotations (no pixels) of every sequence under `root`.
 */
enum LtbStatus ltb_dataset_load(const char *root, struct LtbDataset **out);

size_t ltb_dataset_len(const struct LtbDataset *dataset);

void ltb_dataset_free(struct LtbDataset *dataset);

/**
 * Loads one tracker's result directory.
 */
enum LtbStatus ltb_run_load(const char *dir, struct LtbRun **out);

void ltb_run_free(struct LtbRun *run);

/**
 * Evaluates a run against a dataset under both protocols.
 */
enum LtbStatus ltb_evaluate(const struct LtbDataset *dataset,
                            const struct LtbRun *run,
                            struct LtbReport **out);

/**
 * Best (highest F) point of one protocol.
 */
enum LtbStatus ltb_report_best(const struct LtbReport *report,
                               enum LtbProtocol protocol_,
                               struct LtbPoint *out);

/**
 * Number of thresholds on a protocol's curve; 0 for a null report.
 */
size_t ltb_report_curve_len(const struct LtbReport *report, enum LtbProtocol protocol_);

/**
 * Curve point `index`, in ascending threshold order.
 */
enum LtbStatus ltb_report_curve_point(const struct LtbReport *report,
                                      enum LtbProtocol protocol_,
                                      size_t index,
                                      struct LtbPoint *out);

void ltb_report_free(struct LtbReport *report);

/**
 * Creates a tracker from `key = value` settings text (NULL for defaults).
 */
enum LtbStatus ltb_tracker_new(const char *config, struct LtbTracker **out);

/**
 * Builds the template from the first frame. `clipped` (optional) receives
 * 1 when the box extended past the frame and was clipped.
 */
enum LtbStatus ltb_tracker_init(struct LtbTracker *tracker,
                                const uint8_t *rgb,
                                const uint16_t *depth,
                                uint32_t width,
                                uint32_t height,
                                struct LtbBox bbox,
                                int32_t *clipped);

/**
 * Tracks into the next frame, writing the box and a presence score in
 * [0, 1].
 */
enum LtbStatus ltb_tracker_step(struct LtbTracker *tracker,
                                const uint8_t *rgb,
                                const uint16_t *depth,
                                uint32_t width,
                                uint32_t height,
                                struct LtbBox *out_box,
                                double *out_score);

void ltb_tracker_free(struct LtbTracker *tracker);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LTBENCH_H */
