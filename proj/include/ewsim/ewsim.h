/* ewsim — evanescent-wave atom-mirror radiation-pressure simulator.
 *
 * C API over the simulation core. All entry points are thread-safe as long
 * as each ewsim_config handle is used from one thread at a time. Functions
 * returning int use the status codes below; on failure a message is
 * available from ewsim_last_error() (thread-local). Strings returned
 * through char** out-parameters are heap-allocated; release them with
 * ewsim_string_free().
 */
#ifndef EWSIM_H
#define EWSIM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct ewsim_config ewsim_config; /* opaque */

enum ewsim_status {
  EWSIM_OK = 0,
  EWSIM_ERR_CONFIG = 1,    /* usage / configuration error */
  EWSIM_ERR_NO_BOUNCE = 2, /* physically infeasible (no bounce) */
  EWSIM_ERR_NUMERIC = 3    /* solver or integrator failure */
};

unsigned ewsim_abi_version(void);

/* Last error message of the calling thread ("" if none). The pointer stays
 * valid until the next ewsim call on the same thread. */
const char* ewsim_last_error(void);

void ewsim_string_free(char* s);

/* --- configuration ----------------------------------------------------- */

/* Parse a JSON experiment description. NULL on failure. */
ewsim_config* ewsim_config_from_json(const char* json_text);
ewsim_config* ewsim_config_from_file(const char* path);
/* The bundled reference settings (19 mW, 44 Gamma, 6.6 mm drop, ...). */
ewsim_config* ewsim_config_default(void);
void ewsim_config_free(ewsim_config* config);

/* Canonical JSON serialization (round-trips through _from_json). */
int ewsim_config_to_json(const ewsim_config* config, char** json_out);

int ewsim_config_set_seed(ewsim_config* config, uint64_t seed);
int ewsim_config_set_threads(ewsim_config* config, int threads);
int ewsim_config_set_output_dir(ewsim_config* config, const char* dir);
int ewsim_config_get_output_dir(const ewsim_config* config, char** dir_out);

/* --- operations --------------------------------------------------------- */

/* Scattered-photon budget at the configured operating point as a CSV
 * document (header + one row):
 *   delta_over_Gamma,xi_um,n_twolevel,n_pathintegral,n_obe,
 *   hyperfine_factor,n_corrected */
int ewsim_predict_csv(const ewsim_config* config, char** csv_out);

/* Budget sweep along axis "detuning" (values in the config's detuning
 * unit) or "angle" (mrad above the critical angle). Rows past the bounce
 * threshold carry nan entries. */
int ewsim_sweep_csv(const ewsim_config* config, const char* axis, double from,
                    double to, int points, char** csv_out);

/* Bounce thresholds: CSV row (delta_th_GHz, xi_th_nm, r_eff_m, fraction);
 * with_sensitivity != 0 appends a parameter-scan table. */
int ewsim_thresholds_csv(const ewsim_config* config, int with_sensitivity,
                         char** csv_out);

/* Full synthetic measurement: Monte Carlo cloud, fluorescence frames
 * (16-bit PGM files), centroid track and piecewise-linear fit. Writes
 * frame_<ms>p<tenths>.pgm and fits.csv (plus snapshots.csv when
 * dump_snapshots) into the config's output directory and returns the
 * fits.csv content. snapshot_times_s may be NULL to use 5..95 ms in 10 ms
 * steps. */
int ewsim_pipeline_run(const ewsim_config* config,
                       const double* snapshot_times_s, int n_times,
                       int dump_snapshots, char** summary_csv_out);

/* Re-measures the bundled published reference values; report_out receives
 * one PASS/FAIL line per row. rows_filter selects rows by substring (NULL
 * or "" = all). all_passed_out (optional) receives 1 when every row
 * passed. */
int ewsim_verify_report(const ewsim_config* config, const char* rows_filter,
                        char** report_out, int* all_passed_out);

/* Atomic file write helper (temp file + rename), used by the CLI so every
 * artifact lands atomically. */
int ewsim_write_file_atomic(const char* path, const char* content,
                            size_t length);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* EWSIM_H */
