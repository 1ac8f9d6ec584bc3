#ifndef URYKIT_H
#define URYKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum UkStatus {
  UK_STATUS_OK = 0,
  /**
   * Malformed JSON or rational literal.
   */
  UK_STATUS_PARSE = 1,
  /**
   * Well-formed input that breaks a precondition.
   */
  UK_STATUS_INVALID = 2,
  /**
   * A bug: an internal check failed or the library panicked.
   */
  UK_STATUS_INTERNAL = 3,
  UK_STATUS_NULL_ARGUMENT = 4,
  /**
   * The call completed but its result misses the requested target, for
   * example a descent that did not reach epsilon or a failing suite.
   */
  UK_STATUS_FAILED = 5,
} UkStatus;

/**
 * A growing finite metric space.
 */
typedef struct UkSpace UkSpace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until
 * the next call into the library on the same thread.
 */
const char *uk_last_error(void);

/**
 * # Safety
 * `s` is null or a string returned by this library, not yet freed.
 */
void uk_string_free(char *s);

/**
 * Parses a space from JSON `{"points": [...], "dist": [[...]]}`.
 *
 * # Safety
 * `json` is a nul-terminated string; `out` is valid for a pointer write.
 */
enum UkStatus uk_space_from_json(const char *json, struct UkSpace **out);

/**
 * # Safety
 * `space` is null or a handle from [`uk_space_from_json`], not yet freed.
 */
void uk_space_free(struct UkSpace *space);

/**
 * # Safety
 * `space` is a live handle; `out` is valid for a write.
 */
enum UkStatus uk_space_len(const struct UkSpace *space, size_t *out);

/**
 * Distance between points `i` and `j` as a rational string.
 *
 * # Safety
 * `space` is a live handle; `out` is valid for a pointer write.
 */
enum UkStatus uk_space_distance(const struct UkSpace *space, size_t i, size_t j, char **out);

/**
 * The space with its provenance log as JSON.
 *
 * # Safety
 * `space` is a live handle; `out` is valid for a pointer write.
 */
enum UkStatus uk_space_to_json(const struct UkSpace *space, char **out);

/**
 * Realizes a Katětov map given as `{"domain": [...], "values": [...]}`,
 * writing the index of the realizing point, which may already exist.
 *
 * # Safety
 * `space` is a live handle not used concurrently; `map_json` is a
 * nul-terminated string; `out_point` is valid for a write.
 */
enum UkStatus uk_space_realize(struct UkSpace *space, const char *map_json, size_t *out_point);

/**
 * Approximates `phi` on `A` by a word in the stabilizers of `A` and `B`.
 * `a` and `b` are comma-separated labels, `phi_json` is
 * `{"domain": [...], "range": [...]}`. The space behind the handle is not
 * modified; the trace JSON carries the grown space. Returns
 * `UK_STATUS_FAILED`, still writing the trace, when the word misses
 * `epsilon`.
 *
 * # Safety
 * `space` is a live handle; string arguments are nul-terminated; `out` is
 * valid for a pointer write.
 */
enum UkStatus uk_stabilize(const struct UkSpace *space,
                           const char *a,
                           const char *b,
                           const char *phi_json,
                           const char *eps,
                           size_t max_iter,
                           char **out);

/**
 * Same as [`uk_stabilize`] on the random instance drawn from `seed`.
 *
 * # Safety
 * `eps` is nul-terminated; `out` is valid for a pointer write.
 */
enum UkStatus uk_stabilize_random(uint64_t seed, const char *eps, size_t max_iter, char **out);

/**
 * Runs a property suite (`katetov`, `lemma1`, `homotopy`, `stabilizer` or
 * `all`) and writes its JSON report. Returns `UK_STATUS_FAILED` when a
 * property fails.
 *
 * # Safety
 * `name` is nul-terminated; `out` is valid for a pointer write.
 */
enum UkStatus uk_run_suite(const char *name, uint64_t seed, size_t budget, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* URYKIT_H */
