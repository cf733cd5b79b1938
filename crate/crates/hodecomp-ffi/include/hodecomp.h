#ifndef HODECOMP_H
#define HODECOMP_H

/* Generated by cbindgen from crates/hodecomp-ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result of a call.
 */
typedef enum HdStatus {
  HD_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  HD_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  HD_STATUS_INVALID_UTF8 = 2,
  /**
   * The source text did not parse.
   */
  HD_STATUS_PARSE = 3,
  /**
   * A name-passing source could not be encoded.
   */
  HD_STATUS_ENCODE = 4,
  /**
   * The process could not be decomposed.
   */
  HD_STATUS_DECOMPOSE = 5,
  /**
   * An enumeration argument was out of range.
   */
  HD_STATUS_INVALID_ARGUMENT = 6,
  /**
   * The library panicked; the handle arguments should not be used again.
   */
  HD_STATUS_INTERNAL = 7,
} HdStatus;

/**
 * How a run ended.
 */
typedef enum HdTerminal {
  HD_TERMINAL_INERT = 0,
  HD_TERMINAL_FUEL_EXHAUSTED = 1,
  HD_TERMINAL_STUCK = 2,
} HdTerminal;

/**
 * Dialect of a source text.
 */
typedef enum HdSyntax {
  /**
   * Higher-order processes.
   */
  HD_SYNTAX_HO = 0,
  /**
   * First-order name passing, encoded into higher-order processes.
   */
  HD_SYNTAX_NAME_PASSING = 1,
} HdSyntax;

/**
 * Form of the decomposition.
 */
typedef enum HdOptimization {
  HD_OPTIMIZATION_NONE = 0,
  HD_OPTIMIZATION_DUOS = 1,
  HD_OPTIMIZATION_MONADIC = 2,
} HdOptimization;

/**
 * A decomposed process.
 */
typedef struct HdDecomposition HdDecomposition;

/**
 * A parsed process with the types of its free names.
 */
typedef struct HdProcess HdProcess;

/**
 * The record of a deterministic run.
 */
typedef struct HdTrace HdTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none failed.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *hd_last_error(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *hd_version(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be null or a pointer returned by this library and not yet freed.
 */
void hd_string_free(char *s);

/**
 * Parses a source file (declarations followed by a process) and stores a
 * new handle in `*out`. `syntax` is one of the [`HdSyntax`] values.
 *
 * # Safety
 * `src` must be a valid nul-terminated string and `out` valid for writing.
 */
enum HdStatus hd_process_parse(const char *src, uint32_t syntax, struct HdProcess **out);

/**
 * Releases a process handle.
 *
 * # Safety
 * `p` must be null or a handle from [`hd_process_parse`] not yet freed.
 */
void hd_process_free(struct HdProcess *p);

/**
 * Typechecks the process; `*well_typed` receives the verdict and, when it
 * is false, [`hd_last_error`] the diagnostics.
 *
 * # Safety
 * `p` must be a live handle and `well_typed` valid for writing.
 */
enum HdStatus hd_process_typecheck(const struct HdProcess *p, bool *well_typed);

/**
 * Number of propagators the decomposition of the process uses.
 *
 * # Safety
 * `p` must be a live handle and `out` valid for writing.
 */
enum HdStatus hd_process_degree(const struct HdProcess *p, uint32_t *out);

/**
 * Renders the process in the surface syntax; null if `p` is null.
 *
 * # Safety
 * `p` must be null or a live handle.
 */
char *hd_process_to_string(const struct HdProcess *p);

/**
 * Decomposes the process in the form given by `opt`, one of the
 * [`HdOptimization`] values, and stores a new handle in `*out`.
 *
 * # Safety
 * `p` must be a live handle and `out` valid for writing.
 */
enum HdStatus hd_decompose(const struct HdProcess *p, uint32_t opt, struct HdDecomposition **out);

/**
 * Releases a decomposition handle.
 *
 * # Safety
 * `d` must be null or a handle from [`hd_decompose`] not yet freed.
 */
void hd_decomposition_free(struct HdDecomposition *d);

/**
 * Degree of the decomposed source process.
 *
 * # Safety
 * `d` must be a live handle and `out` valid for writing.
 */
enum HdStatus hd_decomposition_degree(const struct HdDecomposition *d, uint32_t *out);

/**
 * Checks that the decomposition is typable with minimal session types;
 * when it is not, [`hd_last_error`] holds the diagnostics.
 *
 * # Safety
 * `d` must be a live handle and `minimal` valid for writing.
 */
enum HdStatus hd_decomposition_is_minimally_typed(const struct HdDecomposition *d, bool *minimal);

/**
 * Renders the decomposed process; null if `d` is null.
 *
 * # Safety
 * `d` must be null or a live handle.
 */
char *hd_decomposition_to_string(const struct HdDecomposition *d);

/**
 * Runs the process under the deterministic policy for at most `fuel` steps.
 *
 * # Safety
 * `p` must be a live handle and `out` valid for writing.
 */
enum HdStatus hd_process_run(const struct HdProcess *p, uintptr_t fuel, struct HdTrace **out);

/**
 * Runs the decomposed process under the deterministic policy for at most `fuel` steps.
 *
 * # Safety
 * `d` must be a live handle and `out` valid for writing.
 */
enum HdStatus hd_decomposition_run(const struct HdDecomposition *d,
                                   uintptr_t fuel,
                                   struct HdTrace **out);

/**
 * Releases a trace handle.
 *
 * # Safety
 * `t` must be null or a handle from a run function not yet freed.
 */
void hd_trace_free(struct HdTrace *t);

/**
 * Number of reduction steps taken.
 *
 * # Safety
 * `t` must be a live handle and `out` valid for writing.
 */
enum HdStatus hd_trace_steps(const struct HdTrace *t, uintptr_t *out);

/**
 * How the run ended.
 *
 * # Safety
 * `t` must be a live handle and `out` valid for writing.
 */
enum HdStatus hd_trace_terminal(const struct HdTrace *t, enum HdTerminal *out);

/**
 * The trace as JSON lines, one record per step; null if `t` is null.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
char *hd_trace_to_jsonl(const struct HdTrace *t);

/**
 * Rendering of the state after `step` steps; null if `t` is null or the
 * run is shorter.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
char *hd_trace_state(const struct HdTrace *t, uintptr_t step);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HODECOMP_H */
