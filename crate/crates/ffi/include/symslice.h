/* Copyright (c) The symslice Contributors */
/* SPDX-License-Identifier: Apache-2.0 */

#ifndef SYMSLICE_H
#define SYMSLICE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Result of every fallible call. Analysis errors each get their own code.
 */
typedef enum SymsliceStatus {
  SYMSLICE_STATUS_OK = 0,
  SYMSLICE_STATUS_NULL_ARGUMENT = 1,
  SYMSLICE_STATUS_INVALID_UTF8 = 2,
  SYMSLICE_STATUS_UNKNOWN_LANGUAGE = 3,
  SYMSLICE_STATUS_PARSE = 4,
  SYMSLICE_STATUS_NO_POST_CONDITION = 5,
  SYMSLICE_STATUS_ANNOTATION = 6,
  SYMSLICE_STATUS_UNKNOWN_FUNCTION = 7,
  SYMSLICE_STATUS_RENDER = 8,
  SYMSLICE_STATUS_ORACLE = 9,
  SYMSLICE_STATUS_MISSING_CREDENTIAL = 10,
  SYMSLICE_STATUS_CONFIG = 11,
  SYMSLICE_STATUS_PANIC = 12,
} SymsliceStatus;

/**
 * A parsed source file plus analysis options.
 */
typedef struct SymsliceSession SymsliceSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses `source` written in `language` (`mini`, `python` or `c`).
 *
 * # Safety
 * `source` and `language` must be NUL-terminated strings; `out` must be
 * writable. The handle goes back through `symslice_session_free`.
 */
enum SymsliceStatus symslice_session_new(const char *source,
                                         const char *language,
                                         struct SymsliceSession **out);

/**
 * # Safety
 * `session` must come from `symslice_session_new` or be NULL.
 */
void symslice_session_free(struct SymsliceSession *session);

/**
 * Selects the function to analyse; NULL restores the default (the last one).
 *
 * # Safety
 * `session` must be a live handle; `name` NULL or NUL-terminated.
 */
enum SymsliceStatus symslice_session_set_function(struct SymsliceSession *session,
                                                  const char *name);

/**
 * Caps partition enumeration.
 *
 * # Safety
 * `session` must be a live handle.
 */
enum SymsliceStatus symslice_session_set_max_partitions(struct SymsliceSession *session,
                                                        size_t max);

/**
 * Writes the slices in query order as JSON, each with its text.
 * `pre` and `post` may be NULL to use the markers in the source.
 *
 * # Safety
 * Pointers as for the other calls; `*out_json` is freed with
 * `symslice_string_free`.
 */
enum SymsliceStatus symslice_plan_json(const struct SymsliceSession *session,
                                       const char *pre,
                                       const char *post,
                                       char **out_json);

/**
 * Analyses with a scripted oracle: `script_json` maps slice fingerprints
 * to `PASS`, `FAIL` or `ERROR`. Writes the JSON report.
 *
 * # Safety
 * As for `symslice_plan_json`.
 */
enum SymsliceStatus symslice_analyze_mock(const struct SymsliceSession *session,
                                          const char *pre,
                                          const char *post,
                                          const char *script_json,
                                          char **out_json);

/**
 * Analyses against a chat-completions endpoint. `config_json` holds oracle
 * settings (NULL for defaults); the key is read from the environment
 * variable it names.
 *
 * # Safety
 * As for `symslice_plan_json`.
 */
enum SymsliceStatus symslice_analyze(const struct SymsliceSession *session,
                                     const char *pre,
                                     const char *post,
                                     const char *config_json,
                                     char **out_json);

/**
 * # Safety
 * `s` must come from this library or be NULL.
 */
void symslice_string_free(char *s);

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *symslice_last_error(void);

const char *symslice_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYMSLICE_H */
