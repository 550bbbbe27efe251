#ifndef MOOD_H
#define MOOD_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MoodLabel {
  MOOD_LABEL_ANGER = 0,
  MOOD_LABEL_DISGUST = 1,
  MOOD_LABEL_FEAR = 2,
  MOOD_LABEL_HAPPINESS = 3,
  MOOD_LABEL_SADNESS = 4,
  MOOD_LABEL_SURPRISE = 5,
  MOOD_LABEL_NEUTRAL = 6,
} MoodLabel;

/**
 * Result code of every fallible call.
 */
typedef enum MoodStatus {
  MOOD_STATUS_OK = 0,
  MOOD_STATUS_NULL_POINTER = 1,
  MOOD_STATUS_INVALID_UTF8 = 2,
  MOOD_STATUS_IO = 3,
  MOOD_STATUS_INVALID_DATA = 4,
  MOOD_STATUS_INVALID_COORDINATE = 5,
  /**
   * The point lies in no known region.
   */
  MOOD_STATUS_NOT_FOUND = 6,
  MOOD_STATUS_PANIC = 99,
} MoodStatus;

/**
 * Opaque classifier handle.
 */
typedef struct MoodClassifier MoodClassifier;

/**
 * Opaque region resolver handle.
 */
typedef struct MoodResolver MoodResolver;

/**
 * Outcome of classifying one text. `matched` is indexed by [`MoodLabel`]
 * (Neutral excluded); the rank of emotion `i` is `matched[i] / token_count`.
 */
typedef struct MoodClassification {
  uint32_t label;
  uint32_t matched[6];
  uint32_t token_count;
} MoodClassification;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null if none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *mood_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *mood_version(void);

/**
 * Static English name of a label, or null for an out-of-range value.
 */
const char *mood_label_name(uint32_t label);

/**
 * Creates a classifier over the bundled sample lexicon.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum MoodStatus mood_classifier_new_bundled(struct MoodClassifier **out);

/**
 * Creates a classifier from a lexicon CSV file (plain or gzipped).
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum MoodStatus mood_classifier_from_path(const char *path, struct MoodClassifier **out);

/**
 * Frees a classifier. Null is ignored.
 *
 * # Safety
 * `c` must come from a `mood_classifier_new_*` call and not be used afterwards.
 */
void mood_classifier_free(struct MoodClassifier *c);

/**
 * Classifies one NUL-terminated UTF-8 text.
 *
 * # Safety
 * `c` must be a live classifier handle, `text` a NUL-terminated string and
 * `out` writable.
 */
enum MoodStatus mood_classify(const struct MoodClassifier *c,
                              const char *text,
                              struct MoodClassification *out);

/**
 * Creates a resolver over the bundled state boundaries and city table.
 *
 * # Safety
 * `out` must be writable.
 */
enum MoodStatus mood_resolver_new_bundled(struct MoodResolver **out);

/**
 * Creates a resolver from a state GeoJSON file and a city CSV file.
 *
 * # Safety
 * Both paths must be NUL-terminated strings; `out` must be writable.
 */
enum MoodStatus mood_resolver_from_paths(const char *states,
                                         const char *cities,
                                         struct MoodResolver **out);

/**
 * Frees a resolver. Null is ignored.
 *
 * # Safety
 * `r` must come from a `mood_resolver_new_*` call and not be used afterwards.
 */
void mood_resolver_free(struct MoodResolver *r);

/**
 * Writes the static state code containing the point to `out`.
 * Returns `NotFound` (and null) for points outside every state.
 *
 * # Safety
 * `r` must be a live resolver handle and `out` writable.
 */
enum MoodStatus mood_resolve_state(const struct MoodResolver *r,
                                   double lat,
                                   double lon,
                                   const char **out);

/**
 * Writes the static name of the nearest city within its radius to `out`.
 *
 * # Safety
 * `r` must be a live resolver handle and `out` writable.
 */
enum MoodStatus mood_resolve_city(const struct MoodResolver *r,
                                  double lat,
                                  double lon,
                                  const char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOOD_H */
