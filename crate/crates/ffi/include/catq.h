#ifndef CATQ_H
#define CATQ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum {
  CATQ_STATUS_OK = 0,
  /**
   * The program has syntax, name or validation errors.
   */
  CATQ_STATUS_DIAGNOSTICS = 1,
  CATQ_STATUS_RESOURCE_LIMIT = 2,
  /**
   * An instance proves two distinct literals equal.
   */
  CATQ_STATUS_INCONSISTENT = 3,
  CATQ_STATUS_NULL_POINTER = 10,
  CATQ_STATUS_INVALID_UTF8 = 11,
  CATQ_STATUS_NOT_FOUND = 12,
  CATQ_STATUS_INVALID_ARGUMENT = 13,
  CATQ_STATUS_PANIC = 99,
} CatqStatus;

typedef enum {
  CATQ_FORMAT_MARKDOWN = 0,
  CATQ_FORMAT_CSV = 1,
  CATQ_FORMAT_JSON = 2,
} CatqFormat;

/**
 * An elaborated program and its diagnostics.
 */
typedef struct CatqEnv CatqEnv;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses and elaborates `source`. `file` names the source in diagnostics
 * and may be null. On return `*out` holds a handle even when the status is
 * `Diagnostics` or `ResourceLimit`, so the diagnostics can be read.
 *
 * # Safety
 * `source` and a non-null `file` must be NUL-terminated; `out` must be
 * writable.
 */
CatqStatus catq_env_load(const char *source, const char *file, CatqEnv **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `env` must come from `catq_env_load` and not have been freed.
 */
void catq_env_free(CatqEnv *env);

/**
 * Number of diagnostics produced by loading.
 *
 * # Safety
 * `env` must be a live handle and `out` writable.
 */
CatqStatus catq_env_diagnostic_count(const CatqEnv *env, size_t *out);

/**
 * Diagnostic `index` as `file:line:col: kind: message`.
 *
 * # Safety
 * `env` must be a live handle and `out` writable.
 */
CatqStatus catq_env_diagnostic(const CatqEnv *env, size_t index, char **out);

/**
 * Renders instance `name` as tables.
 *
 * # Safety
 * `env` must be a live handle, `name` NUL-terminated and `out` writable.
 */
CatqStatus catq_env_render(const CatqEnv *env, const char *name, CatqFormat format, char **out);

/**
 * Number of rows of `entity` in instance `name`.
 *
 * # Safety
 * `env` must be a live handle, the names NUL-terminated and `out` writable.
 */
CatqStatus catq_env_row_count(const CatqEnv *env,
                              const char *name,
                              const char *entity,
                              size_t *out);

/**
 * `Ok` when instance `name` is consistent, `Inconsistent` otherwise; the
 * collision is then available from `catq_last_error`.
 *
 * # Safety
 * `env` must be a live handle and `name` NUL-terminated.
 */
CatqStatus catq_env_check(const CatqEnv *env, const char *name);

/**
 * Proposes a mapping `source -> target` and writes it as a declaration.
 * Returns `Diagnostics` when the candidate does not validate; the text is
 * written either way.
 *
 * # Safety
 * `env` must be a live handle, the names NUL-terminated and `out` writable.
 */
CatqStatus catq_match(const CatqEnv *env,
                      const char *source,
                      const char *target,
                      double cutoff,
                      char **out);

/**
 * Searches for an inverse of `mapping` using paths of at most `depth`
 * symbols. Writes the inverse, or null when the search space holds none.
 *
 * # Safety
 * `env` must be a live handle, `mapping` NUL-terminated and `out` writable.
 */
CatqStatus catq_invert(const CatqEnv *env, const char *mapping, size_t depth, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void catq_string_free(char *s);

/**
 * Message of the last failing call on this thread, or null. The pointer
 * stays valid until the next call on the same thread.
 */
const char *catq_last_error(void);

/**
 * Library version, statically allocated.
 */
const char *catq_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CATQ_H */
