#ifndef SPLITSTUDY_H
#define SPLITSTUDY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SsStatus {
  SS_STATUS_OK = 0,
  SS_STATUS_INPUT_ERROR = 1,
  SS_STATUS_NO_ANALYZABLE_SAMPLES = 2,
  SS_STATUS_INTERNAL_ERROR = 3,
  SS_STATUS_NULL_POINTER = 4,
  SS_STATUS_INVALID_ARGUMENT = 5,
  SS_STATUS_PANIC = 6,
} SsStatus;

typedef enum SsBetaVariant {
  SS_BETA_VARIANT_COVARIANCE = 0,
  SS_BETA_VARIANT_CORRELATION = 1,
} SsBetaVariant;

/*
 Opaque analysis report.
 */
typedef struct SsReport SsReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread; empty after a success.
 The pointer stays valid until the next call into this library.
 */
const char *ss_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *ss_version(void);

/*
 Runs the pipeline from TOML config text.

 # Safety
 `config_toml` must be a NUL-terminated string; `out` must be writable.
 */
enum SsStatus ss_run_config(const char *config_toml, struct SsReport **out);

/*
 Runs the pipeline on CSV files with default settings. `fundamentals` and
 `rates` may be null.

 # Safety
 Non-null string arguments must be NUL-terminated; `out` must be writable.
 */
enum SsStatus ss_run_files(const char *bars,
                           const char *splits,
                           const char *fundamentals,
                           const char *rates,
                           struct SsReport **out);

/*
 Runs the pipeline on the synthetic nine-sample universe for `seed`.

 # Safety
 `out` must be writable.
 */
enum SsStatus ss_run_synthetic(uint64_t seed, struct SsReport **out);

/*
 # Safety
 `report` must come from this library and not be freed yet; null is ignored.
 */
void ss_report_free(struct SsReport *report);

/*
 Number of analyzed samples, or 0 for a null handle.

 # Safety
 `report` must be null or a live handle.
 */
size_t ss_report_sample_count(const struct SsReport *report);

/*
 Number of excluded samples, or 0 for a null handle.

 # Safety
 `report` must be null or a live handle.
 */
size_t ss_report_exclusion_count(const struct SsReport *report);

/*
 Renders one selector (`json`, `table1`, `fig1`, ...) into a new string.

 # Safety
 `report` must be a live handle, `selector` NUL-terminated, `out` writable.
 */
enum SsStatus ss_report_render(const struct SsReport *report, const char *selector, char **out);

/*
 Writes the comma-separated `selectors` (or `all`) into directory `dir`.

 # Safety
 `report` must be a live handle; strings must be NUL-terminated.
 */
enum SsStatus ss_report_emit(const struct SsReport *report, const char *dir, const char *selectors);

/*
 # Safety
 `s` must be null or a string returned by this library.
 */
void ss_string_free(char *s);

/*
 Market-value factor `price_factor * split_ratio`.

 # Safety
 `out` must be writable.
 */
enum SsStatus ss_value_factor(double price_factor, double split_ratio, double *out);

/*
 Population variance of `n` values.

 # Safety
 `xs` must point to `n` doubles; `out` must be writable.
 */
enum SsStatus ss_variance(const double *xs, size_t n, double *out);

/*
 Population covariance of two length-`n` series.

 # Safety
 `xs` and `ys` must each point to `n` doubles; `out` must be writable.
 */
enum SsStatus ss_covariance(const double *xs, const double *ys, size_t n, double *out);

/*
 Beta of `stock` returns against `reference` returns.

 # Safety
 `stock` and `reference` must each point to `n` doubles; `out` must be writable.
 */
enum SsStatus ss_beta(const double *stock,
                      const double *reference,
                      size_t n,
                      enum SsBetaVariant variant,
                      double *out);

/*
 Writes the synthetic nine-sample universe for `seed` as CSV files in `dir`.

 # Safety
 `dir` must be NUL-terminated.
 */
enum SsStatus ss_generate_universe(uint64_t seed, const char *dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPLITSTUDY_H */
