#ifndef UNFOLD_DPOR_H
#define UNFOLD_DPOR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum UdCache {
  UD_CACHE_KEEP_ALL = 0,
  UD_CACHE_EVICT_ALL = 1,
  UD_CACHE_LRU = 2,
} UdCache;

/**
 * Dependence relation used when a Petri net is compiled.
 */
typedef enum UdDependence {
  UD_DEPENDENCE_READ_ARCS = 0,
  UD_DEPENDENCE_CLASSIC = 1,
} UdDependence;

typedef enum UdOrder {
  UD_ORDER_SIZE = 0,
  UD_ORDER_TOTAL = 1,
} UdOrder;

/**
 * Result of every fallible call.
 */
typedef enum UdStatus {
  UD_STATUS_OK = 0,
  UD_STATUS_NULL_ARGUMENT = 1,
  UD_STATUS_INVALID_UTF8 = 2,
  UD_STATUS_LOAD_ERROR = 3,
  UD_STATUS_INVALID_ARGUMENT = 4,
  UD_STATUS_BOUND_EXCEEDED = 5,
  UD_STATUS_EXPLORE_ERROR = 6,
  UD_STATUS_PANIC = 7,
} UdStatus;

/**
 * Counters of a finished exploration.
 */
typedef struct UdReport UdReport;

/**
 * A loaded system.
 */
typedef struct UdSystem UdSystem;

/**
 * Exploration settings. Zero bounds mean unbounded.
 */
typedef struct UdOptions {
  bool cutoffs;
  enum UdOrder order;
  /**
   * Use the seeded random choice policy instead of the ordered one.
   */
  bool random_policy;
  uint64_t seed;
  size_t max_events;
  size_t max_depth;
  enum UdCache cache;
  /**
   * Capacity for `UD_CACHE_LRU`.
   */
  size_t cache_size;
} UdOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The last error message on this thread, or NULL. Valid until the next call into the library.
 */
const char *ud_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ud_version(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void ud_string_free(char *s);

/**
 * Parses a system description. Petri nets (objects with a `places` key) are compiled with `dependence`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum UdStatus ud_system_from_json(const char *json,
                                  enum UdDependence dependence,
                                  struct UdSystem **out);

/**
 * Builds a benchmark system such as `"ccnf:9"`, `"readers:3"` or `"writer-readers"`.
 *
 * # Safety
 * `family` must be a NUL-terminated string and `out` a valid pointer.
 */
enum UdStatus ud_system_generate(const char *family,
                                 enum UdDependence dependence,
                                 struct UdSystem **out);

/**
 * # Safety
 * `sys` must be NULL or a handle from this library that has not been freed.
 */
void ud_system_free(struct UdSystem *sys);

/**
 * Number of transitions, or 0 for NULL.
 *
 * # Safety
 * `sys` must be NULL or a live handle.
 */
size_t ud_system_transition_count(const struct UdSystem *sys);

/**
 * Default settings: cutoffs on, size order, ordered policy, no bounds, no eviction.
 */
struct UdOptions ud_options_default(void);

/**
 * Explores `sys`. `opts` may be NULL for the defaults.
 *
 * # Safety
 * `sys` must be a live handle, `opts` NULL or valid, `out` a valid pointer.
 */
enum UdStatus ud_explore(const struct UdSystem *sys,
                         const struct UdOptions *opts,
                         struct UdReport **out);

/**
 * Explores `sys` and cross-checks the result against the brute-force oracle.
 * `*passed` is set to whether no check failed. If `summary` is not NULL it
 * receives one line per check, to be freed with `ud_string_free`.
 *
 * # Safety
 * `sys` must be a live handle, `opts` NULL or valid, `passed` valid, `summary` NULL or valid.
 */
enum UdStatus ud_verify(const struct UdSystem *sys,
                        const struct UdOptions *opts,
                        bool *passed,
                        char **summary);

/**
 * # Safety
 * `r` must be NULL or a report handle that has not been freed.
 */
void ud_report_free(struct UdReport *r);

/**
 * Number of maximal (terminal, with cutoffs) configurations explored.
 *
 * # Safety
 * `r` must be NULL or a live handle.
 */
size_t ud_report_max_configs(const struct UdReport *r);

/**
 * # Safety
 * `r` must be NULL or a live handle.
 */
size_t ud_report_events(const struct UdReport *r);

/**
 * # Safety
 * `r` must be NULL or a live handle.
 */
size_t ud_report_cutoffs(const struct UdReport *r);

/**
 * # Safety
 * `r` must be NULL or a live handle.
 */
double ud_report_avg_u_at_leaves(const struct UdReport *r);

/**
 * # Safety
 * `r` must be NULL or a live handle.
 */
double ud_report_time_ms(const struct UdReport *r);

/**
 * Number of reached states where the error variable was set.
 *
 * # Safety
 * `r` must be NULL or a live handle.
 */
size_t ud_report_assertion_hits(const struct UdReport *r);

/**
 * Statistics as a JSON object; free with `ud_string_free`. NULL for a NULL report.
 *
 * # Safety
 * `r` must be NULL or a live handle.
 */
char *ud_report_stats_json(const struct UdReport *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UNFOLD_DPOR_H */
