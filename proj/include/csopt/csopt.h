#ifndef CSOPT_CSOPT_H
#define CSOPT_CSOPT_H

/*
 * csopt: transmit-filter and channel-shortening receiver design for ISI
 * channels.
 *
 * Conventions:
 *   - Every fallible function returns a csopt_status; on failure a message
 *     is available from csopt_last_error() on the calling thread.
 *   - Objects are opaque handles created by *_create / producer functions
 *     and released by the matching *_destroy (NULL is accepted).
 *   - Array outputs take (buffer, capacity, count). With buffer == NULL the
 *     required count is reported and CSOPT_OK returned; a nonnull buffer
 *     smaller than required yields CSOPT_ERR_INVALID_ARGUMENT.
 *   - Spectra are sampled on omega_m = -pi + 2 pi m / M, m = 0..M-1.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(CSOPT_BUILDING_LIBRARY)
#define CSOPT_API __attribute__((visibility("default")))
#else
#define CSOPT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum csopt_status {
  CSOPT_OK = 0,
  CSOPT_ERR_INVALID_ARGUMENT = 1,
  CSOPT_ERR_CONFIG = 2,
  CSOPT_ERR_DOMAIN = 3,
  CSOPT_ERR_ILL_CONDITIONED = 4,
  CSOPT_ERR_NUMERICAL = 5,
  CSOPT_ERR_OPTIMIZATION_FAILED = 6,
  CSOPT_ERR_IO = 7,
  CSOPT_ERR_INTERNAL = 8
} csopt_status;

typedef enum csopt_alphabet { CSOPT_ALPHABET_BPSK = 0, CSOPT_ALPHABET_QPSK = 1 } csopt_alphabet;

typedef struct csopt_complex {
  double re;
  double im;
} csopt_complex;

typedef struct csopt_channel csopt_channel;
typedef struct csopt_spectrum csopt_spectrum;
typedef struct csopt_receiver csopt_receiver;
typedef struct csopt_filter csopt_filter;
typedef struct csopt_experiment csopt_experiment;
typedef struct csopt_report csopt_report;

typedef struct csopt_optimizer_options {
  int restarts;
  int max_iterations;
  double x_tolerance;
  double f_tolerance;
  uint64_t rng_seed;
  double init_scale;
  int threads;
} csopt_optimizer_options;

typedef struct csopt_sim_options {
  int num_symbols;
  int num_blocks;
  uint64_t rng_seed;
  int frontend_taps;
  int guard;
  int threads;
} csopt_sim_options;

CSOPT_API const char* csopt_version(void);
CSOPT_API const char* csopt_last_error(void);
CSOPT_API const char* csopt_status_string(int status);

/* Channels */
CSOPT_API int csopt_channel_create(const csopt_complex* taps, size_t count, csopt_channel** out);
CSOPT_API void csopt_channel_destroy(csopt_channel* channel);
/* Copy scaled to unit energy. */
CSOPT_API int csopt_channel_normalized(const csopt_channel* channel, csopt_channel** out);
CSOPT_API int csopt_channel_taps(const csopt_channel* channel, csopt_complex* buffer, size_t capacity,
                                 size_t* count);
/* Lags g_{-L_H}..g_{L_H}. */
CSOPT_API int csopt_channel_autocorrelation(const csopt_channel* channel, csopt_complex* buffer, size_t capacity,
                                            size_t* count);
/* |H(omega)|^2 on an M-point grid. */
CSOPT_API int csopt_channel_power(const csopt_channel* channel, size_t grid_size, csopt_spectrum** out);

/* Sampled spectra */
CSOPT_API int csopt_spectrum_create(const double* values, size_t grid_size, csopt_spectrum** out);
CSOPT_API void csopt_spectrum_destroy(csopt_spectrum* spectrum);
CSOPT_API int csopt_spectrum_values(const csopt_spectrum* spectrum, double* buffer, size_t capacity, size_t* count);
/* (2 pi / M) sum_m S(omega_m) */
CSOPT_API int csopt_spectrum_power(const csopt_spectrum* spectrum, double* power);
CSOPT_API int csopt_spectrum_from_coeffs(double zero_lag, const csopt_complex* off_lags, size_t degree,
                                         const csopt_spectrum* h2, double n0, csopt_spectrum** out);
/* *feasible = 0 when no A_0 in [-1e12, 1e12] meets the target. */
CSOPT_API int csopt_solve_water_level(const csopt_complex* off_lags, size_t degree, const csopt_spectrum* h2,
                                      double n0, double target_power, double* zero_lag, int* feasible);

/* Channel-shortening receiver */
CSOPT_API int csopt_shorten(const csopt_spectrum* sv, double n0, int memory, csopt_receiver** out);
CSOPT_API void csopt_receiver_destroy(csopt_receiver* receiver);
CSOPT_API int csopt_receiver_info(const csopt_receiver* receiver, double* c, double* air, double* condition_estimate);
CSOPT_API int csopt_receiver_b(const csopt_receiver* receiver, csopt_complex* buffer, size_t capacity, size_t* count);
CSOPT_API int csopt_receiver_seed_taps(const csopt_receiver* receiver, csopt_complex* buffer, size_t capacity,
                                       size_t* count);
CSOPT_API int csopt_receiver_gr_lags(const csopt_receiver* receiver, csopt_complex* buffer, size_t capacity,
                                     size_t* count);
CSOPT_API int csopt_air_gaussian(double c, double* air);

/* Transmit optimizer */
CSOPT_API void csopt_optimizer_options_default(csopt_optimizer_options* options);
/* c for the given off-lags; +inf when the water level is infeasible. */
CSOPT_API int csopt_evaluate_objective(const csopt_complex* off_lags, size_t degree, const csopt_spectrum* h2,
                                       double n0, int memory, double* c);
/* options may be NULL for defaults. */
CSOPT_API int csopt_optimize(const csopt_channel* channel, double n0, int memory,
                             const csopt_optimizer_options* options, size_t grid_size, csopt_filter** out);
CSOPT_API int csopt_optimize_spectrum(const csopt_spectrum* h2, double n0, int memory, int real_coefficients,
                                      const csopt_optimizer_options* options, csopt_filter** out);
CSOPT_API void csopt_filter_destroy(csopt_filter* filter);
CSOPT_API int csopt_filter_info(const csopt_filter* filter, double* air, double* flat_air, double* c, int* converged);
CSOPT_API int csopt_filter_coeffs(const csopt_filter* filter, double* zero_lag, csopt_complex* buffer,
                                  size_t capacity, size_t* count);
CSOPT_API int csopt_filter_spectrum(const csopt_filter* filter, csopt_spectrum** out);
CSOPT_API int csopt_filter_stationarity(const csopt_filter* filter, const csopt_spectrum* h2, double n0, double step,
                                        double* max_component);

/* Waterfilling */
/* spectrum_out may be NULL. */
CSOPT_API int csopt_waterfill(const csopt_spectrum* h2, double n0, double* theta, double* capacity,
                              csopt_spectrum** spectrum_out);
CSOPT_API int csopt_combined_memory(const csopt_channel* channel, const csopt_spectrum* sp, double threshold_rel,
                                    int* memory);

/* MIMO-ISI. taps holds num_taps row-major n x n matrices, H_0 first. */
CSOPT_API int csopt_mimo_gains(const csopt_complex* taps, size_t n, size_t num_taps, size_t grid_size,
                               double* buffer, size_t capacity, size_t* count);
/* power_fractions may be NULL, else holds n entries. */
CSOPT_API int csopt_mimo_optimize(const csopt_complex* taps, size_t n, size_t num_taps, double n0, int memory,
                                  const csopt_optimizer_options* options, size_t grid_size, double* total_air,
                                  double* flat_air, double* capacity, double* power_fractions);

/* Bandlimited AWGN / faster-than-Nyquist. spectrum_out may be NULL. */
CSOPT_API int csopt_ftn_optimize(double product, double symbol_time, double n0, int memory,
                                 const csopt_optimizer_options* options, size_t grid_size, double* air, double* ase,
                                 csopt_spectrum** spectrum_out);
CSOPT_API int csopt_rrc_folded_spectrum(double alpha, double product, double symbol_time, size_t grid_size,
                                        csopt_spectrum** out);
CSOPT_API int csopt_ebn0_db(double air, double n0, double* ebn0_db);

/* Monte-Carlo AIR of the shortening detector; v taps sit at indices start.. */
CSOPT_API void csopt_sim_options_default(csopt_sim_options* options);
CSOPT_API int csopt_airsim(const csopt_complex* v_taps, size_t count, int start, double n0, int memory,
                           int alphabet, const csopt_sim_options* options, size_t grid_size, double* air,
                           double* stderr_bits);

/* Experiments */
CSOPT_API int csopt_experiment_parse(const char* text, const char* source_name, csopt_experiment** out);
CSOPT_API int csopt_experiment_load(const char* path, csopt_experiment** out);
CSOPT_API void csopt_experiment_destroy(csopt_experiment* experiment);
CSOPT_API int csopt_experiment_set_command(csopt_experiment* experiment, const char* command);
CSOPT_API int csopt_experiment_set_seed(csopt_experiment* experiment, uint64_t seed);
CSOPT_API int csopt_experiment_set_grid(csopt_experiment* experiment, size_t grid_size);
CSOPT_API int csopt_experiment_set_threads(csopt_experiment* experiment, int threads);
/* The returned string lives as long as the experiment. */
CSOPT_API int csopt_experiment_command(const csopt_experiment* experiment, const char** command);
CSOPT_API int csopt_experiment_run(const csopt_experiment* experiment, csopt_report** out);

CSOPT_API void csopt_report_destroy(csopt_report* report);
/* Returned strings live as long as the report. */
CSOPT_API int csopt_report_csv(const csopt_report* report, const char** csv);
CSOPT_API int csopt_report_summary(const csopt_report* report, const char** summary);
CSOPT_API int csopt_report_attachment_count(const csopt_report* report, size_t* count);
CSOPT_API int csopt_report_attachment(const csopt_report* report, size_t index, const char** suffix,
                                      const char** csv);
/* Writes path, path + ".summary.txt" and path + each attachment suffix. */
CSOPT_API int csopt_report_write(const csopt_report* report, const char* path);

#ifdef __cplusplus
}
#endif

#endif
