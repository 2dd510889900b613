#ifndef SOFTPHOC_H
#define SOFTPHOC_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum SphocStatus {
  SPHOC_STATUS_OK = 0,
  SPHOC_STATUS_NULL_POINTER = 1,
  SPHOC_STATUS_INVALID_ARGUMENT = 2,
  SPHOC_STATUS_INVALID_UTF8 = 3,
  SPHOC_STATUS_IO = 4,
  SPHOC_STATUS_FORMAT = 5,
  SPHOC_STATUS_BUFFER_TOO_SMALL = 6,
  SPHOC_STATUS_PANIC = 99,
} SphocStatus;

/**
 * A scene annotation under construction.
 */
typedef struct SphocScene SphocScene;

/**
 * An H × W × 38 probability tensor.
 */
typedef struct SphocTensor SphocTensor;

typedef struct SphocNoiseConfig {
  double blur_sigma;
  double confusion_rate;
  double background_leak;
  uint64_t seed;
} SphocNoiseConfig;

typedef struct SphocSpottingConfig {
  double heatmap_threshold;
  double hough_rho_res;
  double hough_theta_res;
  uint32_t hough_min_votes;
  double nms_rho;
  double nms_theta;
  size_t max_candidates;
  size_t gap_bridge;
  double band_halfwidth;
  size_t query_samples_per_char;
} SphocSpottingConfig;

/**
 * Best line for a query. When `found` is false the other fields are zero.
 */
typedef struct SphocDetection {
  bool found;
  double x1;
  double y1;
  double x2;
  double y2;
  double rho;
  double theta;
  uint32_t votes;
  double dtw_distance;
} SphocDetection;

/**
 * Axis-aligned box given by its centre and size.
 */
typedef struct SphocBox {
  double cx;
  double cy;
  double width;
  double height;
} SphocBox;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sphoc_version(void);

/**
 * Message for the most recent failure on this thread, or an empty string.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *sphoc_last_error(void);

/**
 * Creates an empty scene of `width × height` pixels.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum SphocStatus sphoc_scene_new(size_t width, size_t height, struct SphocScene **out);

/**
 * Loads a scene from an annotation file (`x1,y1,...,x4,y4,transcription`).
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SphocStatus sphoc_scene_read(const char *path,
                                  size_t width,
                                  size_t height,
                                  struct SphocScene **out);

/**
 * Appends a word with corners `quad = [x1, y1, x2, y2, x3, y3, x4, y4]`
 * in reading order (top-left, top-right, bottom-right, bottom-left).
 *
 * # Safety
 * `scene` must be a live handle, `quad` must point to 8 doubles and
 * `transcription` must be a NUL-terminated string.
 */
enum SphocStatus sphoc_scene_add_word(struct SphocScene *scene,
                                      const double *quad,
                                      const char *transcription);

/**
 * Number of words in the scene.
 *
 * # Safety
 * `scene` must be a live handle and `out` a valid pointer.
 */
enum SphocStatus sphoc_scene_word_count(const struct SphocScene *scene, size_t *out);

/**
 * Releases a scene. Null is ignored.
 *
 * # Safety
 * `scene` must be null or a handle not yet freed.
 */
void sphoc_scene_free(struct SphocScene *scene);

/**
 * Noise-free ground-truth tensor of the scene.
 *
 * # Safety
 * `scene` must be a live handle and `out` a valid pointer.
 */
enum SphocStatus sphoc_embed(const struct SphocScene *scene, struct SphocTensor **out);

/**
 * Simulated probability map of the scene.
 *
 * # Safety
 * `scene` and `config` must be valid pointers, `out` writable.
 */
enum SphocStatus sphoc_simulate(const struct SphocScene *scene,
                                const struct SphocNoiseConfig *config,
                                struct SphocTensor **out);

/**
 * Reads a tensor file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SphocStatus sphoc_tensor_read(const char *path, struct SphocTensor **out);

/**
 * Writes a tensor file. Values are stored as 32-bit floats.
 *
 * # Safety
 * `tensor` must be a live handle and `path` a NUL-terminated string.
 */
enum SphocStatus sphoc_tensor_write(const struct SphocTensor *tensor, const char *path);

/**
 * Height, width and channel count. Any output pointer may be null.
 *
 * # Safety
 * `tensor` must be a live handle; non-null outputs must be writable.
 */
enum SphocStatus sphoc_tensor_dims(const struct SphocTensor *tensor,
                                   size_t *height,
                                   size_t *width,
                                   size_t *channels);

/**
 * Copies the tensor in row-major `[y][x][channel]` order into `buffer`,
 * which must hold at least `height * width * channels` doubles.
 *
 * # Safety
 * `tensor` must be a live handle and `buffer` must point to `len`
 * writable doubles.
 */
enum SphocStatus sphoc_tensor_copy_data(const struct SphocTensor *tensor,
                                        double *buffer,
                                        size_t len);

/**
 * Releases a tensor. Null is ignored.
 *
 * # Safety
 * `tensor` must be null or a handle not yet freed.
 */
void sphoc_tensor_free(struct SphocTensor *tensor);

/**
 * Default spotting parameters.
 */
struct SphocSpottingConfig sphoc_spotting_config_default(void);

/**
 * Finds the line that best matches `query`. `config` may be null for the
 * defaults. A query with no candidate line returns `SPHOC_STATUS_OK` with
 * `found = false`.
 *
 * # Safety
 * `tensor` must be a live handle, `query` a NUL-terminated string,
 * `config` null or valid, and `out` writable.
 */
enum SphocStatus sphoc_spot(const struct SphocTensor *tensor,
                            const char *query,
                            const struct SphocSpottingConfig *config,
                            struct SphocDetection *out);

/**
 * Word box for a detected line of a query with `n_chars` characters,
 * clipped to an `image_width × image_height` image.
 *
 * # Safety
 * `detection` must point to a detection with `found = true` and `out`
 * must be writable.
 */
enum SphocStatus sphoc_line_to_bbox(const struct SphocDetection *detection,
                                    size_t n_chars,
                                    size_t image_width,
                                    size_t image_height,
                                    struct SphocBox *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SOFTPHOC_H */
