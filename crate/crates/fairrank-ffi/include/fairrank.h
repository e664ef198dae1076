#ifndef FAIRRANK_H
#define FAIRRANK_H

/* Generated by cbindgen from the fairrank-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible function. The numeric values
 * match the command-line tool's exit codes where the categories overlap.
 */
typedef enum FrStatus {
  /**
   * The call succeeded.
   */
  FR_STATUS_OK = 0,
  /**
   * A pointer was null, a string was not UTF-8, or a parameter was
   * outside its documented domain.
   */
  FR_STATUS_INVALID_ARGUMENT = 1,
  /**
   * A file could not be read or parsed.
   */
  FR_STATUS_DATA_FORMAT = 2,
  /**
   * Well-formed input violated a semantic rule.
   */
  FR_STATUS_VALIDATION = 3,
  /**
   * The requested metric is undefined on the given data.
   */
  FR_STATUS_DEGENERATE = 4,
  /**
   * An internal panic was caught at the boundary.
   */
  FR_STATUS_PANIC = 5,
} FrStatus;

/**
 * Reranking strategy selector for [`fr_rerank`].
 */
typedef enum FrStrategy {
  /**
   * Shuffle each pool uniformly.
   */
  FR_STRATEGY_RANDOM = 0,
  /**
   * Order by predicted relevance, best first.
   */
  FR_STRATEGY_MAX_UTILITY = 1,
  /**
   * Trade predicted utility against accumulated group exposure.
   */
  FR_STRATEGY_CONTROLLER = 2,
} FrStrategy;

/**
 * Result of evaluating one run file. Group-level getters return data only
 * while [`fr_report_is_defined`] is true.
 */
typedef struct FrReport FrReport;

/**
 * Evaluation inputs loaded once and shared across calls: the query set,
 * the document corpus, and the author-to-group assignment.
 */
typedef struct FrWorkload FrWorkload;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message from the most recent failing call on this thread. Never null;
 * empty before the first failure. Valid until the next failing call on
 * the same thread.
 */
const char *fr_last_error(void);

/**
 * Library version as a static string, e.g. "0.1.0".
 */
const char *fr_version(void);

/**
 * Loads queries, corpus, and group assignment from their files. On success
 * writes a handle to `out`; free it with [`fr_workload_free`]. When
 * `unknown_group` is non-null, corpus authors missing from the group file
 * are assigned to a group of that name instead of staying unassigned.
 * Non-fatal corpus irregularities are kept as warnings on the handle.
 */
enum FrStatus fr_workload_load(const char *queries_path,
                               const char *corpus_path,
                               const char *groups_path,
                               const char *unknown_group,
                               struct FrWorkload **out);

/**
 * Number of warnings collected while loading the workload.
 */
size_t fr_workload_warning_count(const struct FrWorkload *workload);

/**
 * Warning text by index, or null when out of range. Borrowed from the
 * workload handle.
 */
const char *fr_workload_warning(const struct FrWorkload *workload, size_t index);

/**
 * Frees a workload handle. Null is ignored.
 */
void fr_workload_free(struct FrWorkload *workload);

/**
 * Evaluates the run in `run_path` against the workload and writes a report
 * handle to `out`; free it with [`fr_report_free`]. `macro_amortized`
 * false pools all rankings into one accumulation, true averages per-query
 * evaluations instead. A run whose unfairness is undefined still succeeds:
 * the report carries the utility and [`fr_report_unfairness`] explains why
 * the rest is missing.
 */
enum FrStatus fr_evaluate_run(const struct FrWorkload *workload,
                              const char *run_path,
                              double gamma,
                              double stop_coefficient,
                              bool macro_amortized,
                              struct FrReport **out);

/**
 * Mean utility per ranking. Defined even when unfairness is not.
 */
enum FrStatus fr_report_mean_utility(const struct FrReport *report, double *out);

/**
 * Number of rankings the report covers. Zero when `report` is null.
 */
uint64_t fr_report_rankings(const struct FrReport *report);

/**
 * True when unfairness and the per-group breakdown are defined. False for
 * a null handle.
 */
bool fr_report_is_defined(const struct FrReport *report);

/**
 * Writes the unfairness score to `out`. Returns `Degenerate` when the run
 * left unfairness undefined; the reason is then in [`fr_last_error`].
 */
enum FrStatus fr_report_unfairness(const struct FrReport *report, double *out);

/**
 * Number of author groups in the report; zero when unfairness is
 * undefined or `report` is null.
 */
size_t fr_report_group_count(const struct FrReport *report);

/**
 * Group name by index, or null when out of range. Borrowed from the
 * report handle.
 */
const char *fr_report_group_name(const struct FrReport *report, size_t index);

/**
 * Per-group shares by index: exposure share, relevance share, and their
 * difference. Null out-pointers are skipped.
 */
enum FrStatus fr_report_group_stats(const struct FrReport *report,
                                    size_t index,
                                    double *exposure_share,
                                    double *relevance_share,
                                    double *deviation);

/**
 * Frees a report handle. Null is ignored.
 */
void fr_report_free(struct FrReport *report);

/**
 * Checks that the run in `run_path` is admissible: every ranking must be a
 * permutation of its query's pool, and with `sequence_path` given, must
 * answer the queries that sequence asked, in order. `allow_partial`
 * forgives omitted positions. Returns `Ok` when admissible; otherwise
 * `Validation` with the violations listed in [`fr_last_error`].
 */
enum FrStatus fr_validate_run(const struct FrWorkload *workload,
                              const char *run_path,
                              const char *sequence_path,
                              bool allow_partial);

/**
 * Reranks every pool with the chosen strategy and writes the run to
 * `out_path`. With `sequence_path` the run follows that query sequence and
 * accumulates state across impressions; without it each query is answered
 * once, in query-file order. `lambda` only matters for the controller
 * strategy: 0 ignores fairness, 1 ignores utility.
 */
enum FrStatus fr_rerank(const struct FrWorkload *workload,
                        enum FrStrategy strategy,
                        const char *sequence_path,
                        double gamma,
                        double stop_coefficient,
                        double lambda,
                        uint64_t seed,
                        const char *out_path);

/**
 * Samples `num_sequences` query sequences of `length` draws each,
 * proportional to query frequency, and writes them to `out_path` in the
 * sequence CSV format. The same seed always produces the same file.
 */
enum FrStatus fr_generate_sequences(const struct FrWorkload *workload,
                                    uint64_t num_sequences,
                                    size_t length,
                                    uint64_t seed,
                                    const char *out_path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FAIRRANK_H */
