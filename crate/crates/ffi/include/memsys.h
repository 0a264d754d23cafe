/* C interface to the memsys workbench. */

#ifndef MEMSYS_H
#define MEMSYS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Fairness selector for `memsys_check_emergence`.
 */
typedef enum MemsysFairness {
  MEMSYS_FAIRNESS_ENTRY = 0,
  MEMSYS_FAIRNESS_NEIGHBOURHOOD = 1,
  MEMSYS_FAIRNESS_SPAN_AGENTS = 2,
} MemsysFairness;

/**
 * History-quantification selector for `memsys_model_check`.
 */
typedef enum MemsysMode {
  MEMSYS_MODE_ALL_MAXIMAL = 0,
  MEMSYS_MODE_SPANNING_ONLY = 1,
} MemsysMode;

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum MemsysStatus {
  MEMSYS_STATUS_OK = 0,
  MEMSYS_STATUS_NULL_ARGUMENT = 1,
  MEMSYS_STATUS_INVALID_UTF8 = 2,
  MEMSYS_STATUS_PARSE_ERROR = 3,
  MEMSYS_STATUS_SEMANTIC_ERROR = 4,
  MEMSYS_STATUS_BUDGET_EXCEEDED = 5,
} MemsysStatus;

/**
 * Opaque handle to a loaded memory system.
 */
typedef struct MemsysSystem MemsysSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. Never null;
 * the buffer is invalidated by the next failing call on the same thread.
 */
const char *memsys_last_error(void);

/**
 * Releases a string returned by this library. Null is a no-op.
 */
void memsys_string_free(char *s);

/**
 * Parses a system from its JSON file representation.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string; `out` must be a valid
 * pointer. On success `*out` owns the handle.
 */
enum MemsysStatus memsys_system_from_json(const char *json, struct MemsysSystem **out);

/**
 * Releases a system handle. Null is a no-op.
 *
 * # Safety
 * `sys` must be a handle from `memsys_system_from_json`, released at most
 * once.
 */
void memsys_system_free(struct MemsysSystem *sys);

/**
 * Number of agents, or 0 for a null handle.
 *
 * # Safety
 * `sys` must be null or a live handle.
 */
uintptr_t memsys_system_agent_count(const struct MemsysSystem *sys);

/**
 * Well-formedness report as JSON: `{valid, violations, warnings}`.
 *
 * # Safety
 * `sys` must be a live handle; `out_json` a valid pointer.
 */
enum MemsysStatus memsys_system_validate(const struct MemsysSystem *sys, char **out_json);

/**
 * Exact emergence decision; result JSON mirrors the CLI:
 * `{supports, signal, classes}`.
 *
 * # Safety
 * `sys` must be a live handle; `out_json` a valid pointer.
 */
enum MemsysStatus memsys_check_emergence(const struct MemsysSystem *sys,
                                         enum MemsysFairness fairness,
                                         uintptr_t node_budget,
                                         char **out_json);

/**
 * Model-checks one sentence; result JSON: `{holds}`.
 *
 * # Safety
 * `sys` must be a live handle; `formula` a valid NUL-terminated string;
 * `out_json` a valid pointer.
 */
enum MemsysStatus memsys_model_check(const struct MemsysSystem *sys,
                                     const char *formula,
                                     enum MemsysMode mode,
                                     uintptr_t node_budget,
                                     char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MEMSYS_H */
