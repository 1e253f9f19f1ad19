/* spinbath.h — C API for the spin-chain / bosonic-bath simulator.
 *
 * Opaque handles, integer status codes. All functions returning sb_status
 * set a thread-local message retrievable with sb_last_error() on failure.
 * Handles are created by sb_config_* / sb_simulate / sb_analytic and must be
 * released with the matching *_free call.
 */

#ifndef SPINBATH_H
#define SPINBATH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SPINBATH_API __declspec(dllexport)
#else
#define SPINBATH_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sb_status {
    SB_OK = 0,
    SB_ERR_INVALID = 1, /* bad configuration or arguments */
    SB_ERR_RUNTIME = 2  /* failure while running */
} sb_status;

typedef struct sb_config sb_config;
typedef struct sb_series sb_series;

SPINBATH_API const char* sb_version(void);
SPINBATH_API const char* sb_last_error(void);

/* --- configuration ------------------------------------------------------ */

SPINBATH_API sb_status sb_config_load(const char* path, sb_config** out);
SPINBATH_API sb_status sb_config_parse(const char* json_text, sb_config** out);
/* shipped presets: "fig1", "fig2", "fig3" */
SPINBATH_API sb_status sb_config_preset(const char* name, sb_config** out);

SPINBATH_API sb_status sb_config_set_samples(sb_config* config, uint64_t n);
SPINBATH_API sb_status sb_config_set_seed(sb_config* config, uint64_t seed);
SPINBATH_API sb_status sb_config_set_threads(sb_config* config, int threads);

/* compact JSON echo of the configuration; the returned buffer lives until the
 * next call on the same config */
SPINBATH_API const char* sb_config_json(sb_config* config);

SPINBATH_API void sb_config_free(sb_config* config);

/* --- runs ----------------------------------------------------------------- */

/* Full harness run. mode is one of "simulate", "analytic", "compare",
 * "sampler-check", "oracle-check"; outputs (CSV, report.json, plot.py) are
 * written into out_dir (created if needed; "" or NULL for the working
 * directory). */
SPINBATH_API sb_status sb_run(const sb_config* config, const char* mode,
                              const char* out_dir);

/* Monte-Carlo estimate / closed-form solution of the reduced density matrix */
SPINBATH_API sb_status sb_simulate(const sb_config* config, sb_series** out);
SPINBATH_API sb_status sb_analytic(const sb_config* config, sb_series** out);

/* --- series accessors ----------------------------------------------------- */

SPINBATH_API size_t sb_series_rows(const sb_series* series);
SPINBATH_API size_t sb_series_dim(const sb_series* series);
SPINBATH_API sb_status sb_series_times(const sb_series* series, double* out);
/* element (i, j), 0-based; each output buffer holds sb_series_rows values;
 * either buffer may be NULL */
SPINBATH_API sb_status sb_series_element(const sb_series* series, size_t i,
                                         size_t j, double* re, double* im);
/* per-element standard errors; zero for analytic series */
SPINBATH_API sb_status sb_series_stderr(const sb_series* series, size_t i,
                                        size_t j, double* re, double* im);
/* |mean trace - 1| and its standard error per time point */
SPINBATH_API sb_status sb_series_trace_dev(const sb_series* series, double* out);
SPINBATH_API sb_status sb_series_trace_stderr(const sb_series* series,
                                              double* out);
/* worst per-sample |trace - 1| seen while accumulating (0 for analytic) */
SPINBATH_API double sb_series_max_sample_trace_dev(const sb_series* series);

SPINBATH_API void sb_series_free(sb_series* series);

#ifdef __cplusplus
}
#endif

#endif /* SPINBATH_H */
