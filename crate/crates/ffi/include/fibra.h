#ifndef FIBRA_H
#define FIBRA_H

/* Generated by cbindgen, do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum FibraStatus {
  FIBRA_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  FIBRA_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  FIBRA_STATUS_INVALID_UTF8 = 2,
  /**
   * File could not be read or written.
   */
  FIBRA_STATUS_IO = 3,
  /**
   * Input parsed but violated a precondition (bad header, empty mask, ...).
   */
  FIBRA_STATUS_BAD_DATA = 4,
  /**
   * A numeric routine failed.
   */
  FIBRA_STATUS_COMPUTE = 5,
} FibraStatus;

/**
 * Opaque ordered feature table handle.
 */
typedef struct FibraFeatures FibraFeatures;

/**
 * Opaque binary mask handle.
 */
typedef struct FibraMask FibraMask;

/**
 * Opaque scalar volume handle.
 */
typedef struct FibraVolume FibraVolume;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread. Never null; empty
 * before any failure. The pointer is invalidated by the next failure.
 */
const char *fibra_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fibra_version(void);

/**
 * Read a single-file NIfTI-1 volume.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum FibraStatus fibra_volume_read(const char *path, struct FibraVolume **out);

/**
 * Write a volume as little-endian float32 NIfTI-1.
 *
 * # Safety
 * `vol` must be a live handle and `path` a valid NUL-terminated string.
 */
enum FibraStatus fibra_volume_write(const struct FibraVolume *vol, const char *path);

/**
 * Grid dimensions of a volume.
 *
 * # Safety
 * All pointers must be valid.
 */
enum FibraStatus fibra_volume_dims(const struct FibraVolume *vol,
                                   uint64_t *nx,
                                   uint64_t *ny,
                                   uint64_t *nz);

/**
 * # Safety
 * `vol` must be a handle from this library or null (a no-op).
 */
void fibra_volume_free(struct FibraVolume *vol);

/**
 * Read a NIfTI-1 file as a binary mask (nonzero voxels are inside).
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum FibraStatus fibra_mask_read(const char *path, struct FibraMask **out);

/**
 * Number of voxels inside the mask.
 *
 * # Safety
 * Pointers must be valid.
 */
enum FibraStatus fibra_mask_count(const struct FibraMask *mask, uint64_t *out);

/**
 * # Safety
 * `mask` must be a handle from this library or null (a no-op).
 */
void fibra_mask_free(struct FibraMask *mask);

/**
 * Generate one synthetic case with the default phantom geometry.
 * `label` 1 adds lesions, 0 does not. Any of the three outputs may be null
 * to skip it.
 *
 * # Safety
 * Non-null outputs must be valid pointers.
 */
enum FibraStatus fibra_phantom_generate(uint8_t label,
                                        uint64_t seed,
                                        struct FibraVolume **out_volume,
                                        struct FibraMask **out_roi,
                                        struct FibraMask **out_lesion);

/**
 * Extract the canonical 111-feature vector from a volume restricted to a
 * mask, using `ng` gray levels (pass 0 for the default of 32).
 *
 * # Safety
 * `vol` and `mask` must be live handles, `out` a valid pointer.
 */
enum FibraStatus fibra_features_extract(const struct FibraVolume *vol,
                                        const struct FibraMask *mask,
                                        uint32_t ng,
                                        struct FibraFeatures **out);

/**
 * Number of features in the table (111 for the canonical registry).
 *
 * # Safety
 * Pointers must be valid.
 */
enum FibraStatus fibra_features_len(const struct FibraFeatures *features, uint64_t *out);

/**
 * Name of feature `index`, or null when out of range. The pointer stays
 * valid for the lifetime of the handle.
 *
 * # Safety
 * `features` must be a live handle.
 */
const char *fibra_features_name(const struct FibraFeatures *features, uint64_t index);

/**
 * Value of feature `index`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum FibraStatus fibra_features_value(const struct FibraFeatures *features,
                                      uint64_t index,
                                      double *out);

/**
 * # Safety
 * `features` must be a handle from this library or null (a no-op).
 */
void fibra_features_free(struct FibraFeatures *features);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FIBRA_H */
