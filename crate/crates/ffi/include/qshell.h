#ifndef QSHELL_H
#define QSHELL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QshStatus {
  QSH_STATUS_OK = 0,
  QSH_STATUS_INVALID_ARGUMENT = 1,
  QSH_STATUS_NOT_FOUND = 2,
  QSH_STATUS_EMPTY_RESULT = 3,
  QSH_STATUS_IO = 4,
  QSH_STATUS_NULL_POINTER = 5,
  QSH_STATUS_BUFFER_TOO_SMALL = 6,
  QSH_STATUS_INTERNAL = 7,
} QshStatus;

typedef enum QshModel {
  QSH_MODEL_Q_EXACT = 0,
  QSH_MODEL_Q_TAYLOR2 = 1,
  QSH_MODEL_NILSSON = 2,
  QSH_MODEL_PLAIN_HO = 3,
  QSH_MODEL_PSEUDO3NL = 4,
} QshModel;

typedef enum QshFormat {
  QSH_FORMAT_MARKDOWN = 0,
  QSH_FORMAT_CSV = 1,
  QSH_FORMAT_JSON = 2,
} QshFormat;

typedef enum QshMatchMode {
  /**
   * Parameter is the slack for entries printed without an uncertainty.
   */
  QSH_MATCH_MODE_STRICT = 0,
  /**
   * Parameter is the relative window.
   */
  QSH_MATCH_MODE_ROW = 1,
} QshMatchMode;

/**
 * Opaque shell table.
 */
typedef struct QshShellTable QshShellTable;

typedef struct QshLevel {
  uint32_t n;
  uint32_t l;
  double energy;
  uint32_t degeneracy;
} QshLevel;

typedef struct QshShellRow {
  uint32_t n;
  uint32_t l;
  double energy;
  uint32_t degeneracy;
  uint32_t cumulative;
  /**
   * `INFINITY` on the last row.
   */
  double gap_after;
  bool is_magic;
} QshShellRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *qsh_version(void);

/**
 * Message of the last failed call on this thread, empty after a success.
 * The pointer stays valid until the next library call on the same thread.
 */
const char *qsh_last_error_message(void);

/**
 * # Safety
 * `out` must be a valid pointer to a `double`.
 */
enum QshStatus qsh_q_number(double x, double tau, double *out);

/**
 * Energy of level `(n, l)`. `param` is tau for the q models, mu' for
 * Nilsson, and ignored otherwise.
 *
 * # Safety
 * `out` must be a valid pointer to a `double`.
 */
enum QshStatus qsh_energy(enum QshModel model, uint32_t n, uint32_t l, double param, double *out);

/**
 * Shell table of the q-deformed oscillator with levels up to `e_cut`.
 *
 * # Safety
 * `out` must be a valid pointer; on success it receives a handle owned by
 * the caller.
 */
enum QshStatus qsh_shell_table_new(double tau,
                                   double threshold,
                                   double e_cut,
                                   struct QshShellTable **out);

/**
 * Shell table from caller-supplied levels. Degeneracies are taken as given.
 *
 * # Safety
 * `levels` must point to `len` readable `QshLevel`s; `out` must be valid.
 */
enum QshStatus qsh_shell_table_from_levels(const struct QshLevel *levels,
                                           size_t len,
                                           double threshold,
                                           struct QshShellTable **out);

/**
 * # Safety
 * `table` must be null or a handle from this library not yet freed.
 */
void qsh_shell_table_free(struct QshShellTable *table);

/**
 * # Safety
 * `table` must be a live handle; `out_len` must be valid.
 */
enum QshStatus qsh_shell_table_len(const struct QshShellTable *table, size_t *out_len);

/**
 * # Safety
 * `table` must be a live handle; `out` must be valid.
 */
enum QshStatus qsh_shell_table_row(const struct QshShellTable *table,
                                   size_t index,
                                   struct QshShellRow *out);

/**
 * Copy the magic numbers into `buf`. `out_len` always receives the full
 * count; if `capacity` is smaller, nothing is copied and
 * `QSH_STATUS_BUFFER_TOO_SMALL` is returned.
 *
 * # Safety
 * `table` must be a live handle, `buf` must hold `capacity` `uint32_t`s
 * (may be null when `capacity` is 0), `out_len` must be valid.
 */
enum QshStatus qsh_shell_table_magic(const struct QshShellTable *table,
                                     uint32_t *buf,
                                     size_t capacity,
                                     size_t *out_len);

/**
 * Gap after the row closing at `cumulative` (`INFINITY` for the last row).
 *
 * # Safety
 * `table` must be a live handle; `out` must be valid.
 */
enum QshStatus qsh_shell_table_gap_at(const struct QshShellTable *table,
                                      uint32_t cumulative,
                                      double *out);

/**
 * Render the table; release the string with `qsh_string_free`.
 *
 * # Safety
 * `table` must be a live handle; `out` must be valid.
 */
enum QshStatus qsh_shell_table_render(const struct QshShellTable *table,
                                      enum QshFormat format,
                                      char **out);

/**
 * Compare a predicted magic set with built-in datasets.
 *
 * `dataset_ids` is a comma-separated list, or null for every experiment.
 * `out_spurious` receives the number of unsupported predictions; `out_report`,
 * if not null, receives the rendered report (free with `qsh_string_free`).
 *
 * # Safety
 * `predicted` must point to `len` readable `uint32_t`s; `dataset_ids` must
 * be null or NUL-terminated; out-pointers must be valid where required.
 */
enum QshStatus qsh_compare(const uint32_t *predicted,
                           size_t len,
                           const char *dataset_ids,
                           enum QshMatchMode mode,
                           double mode_param,
                           enum QshFormat format,
                           size_t *out_spurious,
                           char **out_report);

/**
 * Running totals of the `3n + l` groups for `k = 0..=k_max`, copied like
 * [`qsh_shell_table_magic`].
 *
 * # Safety
 * `buf` must hold `capacity` `uint32_t`s; `out_len` must be valid.
 */
enum QshStatus qsh_pseudo_3nl_fill(uint32_t k_max, uint32_t *buf, size_t capacity, size_t *out_len);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void qsh_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QSHELL_H */
