#ifndef HUEFUSE_H
#define HUEFUSE_H

/* Generated by cbindgen. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Number of entries per channel in a response table.
#define HF_CRF_LEVELS 256

#define HF_HUE_DOMAIN_LINEAR 0

#define HF_HUE_DOMAIN_GAMMA 1

#define HF_METRIC_RAW 0

#define HF_METRIC_SCALED 1

typedef enum HfStatus {
  HF_STATUS_OK = 0,
  // Bad arguments, bad data, unreadable or malformed files.
  HF_STATUS_ERR_INPUT = 2,
  // The response solver failed.
  HF_STATUS_ERR_NUMERICAL = 3,
  // A required pointer was NULL.
  HF_STATUS_ERR_NULL_ARGUMENT = 4,
  // Internal panic; the library state is unaffected.
  HF_STATUS_ERR_PANIC = 5,
} HfStatus;

// Inverse camera response.
typedef struct HfCrf HfCrf;

// Display image with 8-bit channels.
typedef struct HfImage HfImage;

// Radiance map.
typedef struct HfRadiance HfRadiance;

// Exposure-bracketed images of one scene.
typedef struct HfStack HfStack;

typedef struct HfFusionWeights {
  double contrast;
  double saturation;
  double exposedness;
  double sigma;
  // Pyramid depth, negative for automatic.
  int32_t depth;
} HfFusionWeights;

typedef struct HfCrfOptions {
  size_t samples;
  double lambda;
  uint64_t seed;
} HfCrfOptions;

typedef struct HfReport {
  double mean_dh;
  size_t pixels;
  size_t excluded;
} HfReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *hf_version(void);

// Message of the last failed call on this thread, or NULL after a
// successful call. Valid until the next `hf_*` call on this thread.
const char *hf_last_error(void);

// Image from interleaved RGB codes, `width * height * 3` bytes, row-major.
//
// # Safety
// `codes` must point to at least `width * height * 3` readable bytes.
enum HfStatus hf_image_from_rgb8(const uint8_t *codes,
                                 size_t width,
                                 size_t height,
                                 struct HfImage **out);

// # Safety
// `path` must be a NUL-terminated string.
enum HfStatus hf_image_read_png(const char *path, struct HfImage **out);

// # Safety
// `image` must be a live handle and `path` a NUL-terminated string.
enum HfStatus hf_image_write_png(const struct HfImage *image, const char *path);

// Width in pixels, 0 for NULL.
//
// # Safety
// `image` must be NULL or a live handle.
size_t hf_image_width(const struct HfImage *image);

// Height in pixels, 0 for NULL.
//
// # Safety
// `image` must be NULL or a live handle.
size_t hf_image_height(const struct HfImage *image);

// Copies interleaved RGB codes into `buf`, which holds `len` bytes.
//
// # Safety
// `image` must be a live handle and `buf` writable for `len` bytes.
enum HfStatus hf_image_to_rgb8(const struct HfImage *image, uint8_t *buf, size_t len);

// # Safety
// `image` must be NULL or a handle not yet freed.
void hf_image_free(struct HfImage *image);

// Stack from `count` images with their EVs; exposure time is
// `base_time * 2^ev`. The images are copied.
//
// # Safety
// `images` and `evs` must each point to `count` elements; every image must
// be a live handle.
enum HfStatus hf_stack_new(const struct HfImage *const *images,
                           const double *evs,
                           size_t count,
                           double base_time,
                           struct HfStack **out);

// Loads a JSON manifest and the images it lists.
//
// # Safety
// `manifest` must be a NUL-terminated string.
enum HfStatus hf_stack_load(const char *manifest, struct HfStack **out);

// Number of exposures, 0 for NULL.
//
// # Safety
// `stack` must be NULL or a live handle.
size_t hf_stack_len(const struct HfStack *stack);

// # Safety
// `stack` must be NULL or a handle not yet freed.
void hf_stack_free(struct HfStack *stack);

struct HfFusionWeights hf_fusion_weights_default(void);

// Exposure fusion. `weights` may be NULL for the defaults.
//
// # Safety
// `stack` must be a live handle; `weights` NULL or valid.
enum HfStatus hf_fuse(const struct HfStack *stack,
                      const struct HfFusionWeights *weights,
                      struct HfImage **out);

struct HfCrfOptions hf_crf_options_default(void);

// Estimates the inverse camera response. `options` may be NULL.
//
// # Safety
// `stack` must be a live handle; `options` NULL or valid.
enum HfStatus hf_estimate_crf(const struct HfStack *stack,
                              const struct HfCrfOptions *options,
                              struct HfCrf **out);

// Copies the log-exposure table of one channel (0 = R) into `buf`, which
// must hold `HF_CRF_LEVELS` values.
//
// # Safety
// `crf` must be a live handle and `buf` writable for `len` doubles.
enum HfStatus hf_crf_channel(const struct HfCrf *crf, uint32_t channel, double *buf, size_t len);

// # Safety
// `path` must be a NUL-terminated string.
enum HfStatus hf_crf_read_json(const char *path, struct HfCrf **out);

// # Safety
// `crf` must be a live handle and `path` a NUL-terminated string.
enum HfStatus hf_crf_write_json(const struct HfCrf *crf, const char *path);

// # Safety
// `crf` must be NULL or a handle not yet freed.
void hf_crf_free(struct HfCrf *crf);

// Weighted radiance merge of the stack through `crf`.
//
// # Safety
// `stack` and `crf` must be live handles.
enum HfStatus hf_recover_radiance(const struct HfStack *stack,
                                  const struct HfCrf *crf,
                                  struct HfRadiance **out);

// Reads `.hdr` (RGBE) or `.pfm` by extension.
//
// # Safety
// `path` must be a NUL-terminated string.
enum HfStatus hf_radiance_read(const char *path, struct HfRadiance **out);

// Writes `.hdr` (RGBE) or `.pfm` by extension.
//
// # Safety
// `radiance` must be a live handle and `path` a NUL-terminated string.
enum HfStatus hf_radiance_write(const struct HfRadiance *radiance, const char *path);

// # Safety
// `radiance` must be NULL or a handle not yet freed.
void hf_radiance_free(struct HfRadiance *radiance);

// Replaces the hue of every fused pixel by the hue of the radiance map.
// `hue_domain` is `HF_HUE_DOMAIN_LINEAR` or `HF_HUE_DOMAIN_GAMMA`.
//
// # Safety
// `fused` and `radiance` must be live handles.
enum HfStatus hf_compensate(const struct HfImage *fused,
                            const struct HfRadiance *radiance,
                            uint32_t hue_domain,
                            struct HfImage **out);

// Mean CIEDE2000 hue difference of `image` against `reference`.
// `variant` is `HF_METRIC_RAW` or `HF_METRIC_SCALED`.
//
// # Safety
// `image` and `reference` must be live handles, `report` writable.
enum HfStatus hf_evaluate(const struct HfImage *image,
                          const struct HfImage *reference,
                          uint32_t variant,
                          bool exclude_clipped,
                          struct HfReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HUEFUSE_H */
