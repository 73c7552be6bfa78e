#include "csopt/csopt.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "core/air_sim.hpp"
#include "core/error.hpp"
#include "core/experiment_config.hpp"
#include "core/experiments.hpp"
#include "core/ftn.hpp"
#include "core/mimo.hpp"
#include "core/report.hpp"
#include "core/shortening.hpp"
#include "core/spectral.hpp"
#include "core/transmit_optimizer.hpp"
#include "core/waterfilling.hpp"

struct csopt_channel {
  csopt::ChannelTaps taps;
};

struct csopt_spectrum {
  csopt::SampledSpectrum spectrum;
};

struct csopt_receiver {
  csopt::ShorteningSolution solution;
};

struct csopt_filter {
  csopt::OptimizedFilter filter;
  int memory;
};

struct csopt_experiment {
  csopt::ExperimentConfig config;
};

struct csopt_report {
  csopt::Report report;
  std::string csv;
  std::string summary;
  std::vector<std::pair<std::string, std::string>> attachments;
};

namespace {

thread_local std::string g_last_error;

struct InvalidArgument {
  std::string message;
};

int status_for(csopt::ErrorKind kind) {
  switch (kind) {
    case csopt::ErrorKind::Config:
      return CSOPT_ERR_CONFIG;
    case csopt::ErrorKind::Domain:
      return CSOPT_ERR_DOMAIN;
    case csopt::ErrorKind::IllConditioned:
      return CSOPT_ERR_ILL_CONDITIONED;
    case csopt::ErrorKind::Numerical:
      return CSOPT_ERR_NUMERICAL;
    case csopt::ErrorKind::OptimizationFailed:
      return CSOPT_ERR_OPTIMIZATION_FAILED;
    case csopt::ErrorKind::Io:
      return CSOPT_ERR_IO;
  }
  return CSOPT_ERR_INTERNAL;
}

template <typename F>
int guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return CSOPT_OK;
  } catch (const InvalidArgument& e) {
    g_last_error = e.message;
    return CSOPT_ERR_INVALID_ARGUMENT;
  } catch (const csopt::Error& e) {
    g_last_error = e.what();
    return status_for(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CSOPT_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CSOPT_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return CSOPT_ERR_INTERNAL;
  }
}

void require(bool condition, const char* message) {
  if (!condition) throw InvalidArgument{message};
}

template <typename T>
void copy_out(const std::vector<T>& values, T* buffer, std::size_t capacity, std::size_t* count) {
  require(count != nullptr, "count must not be NULL");
  *count = values.size();
  if (buffer == nullptr) return;
  require(capacity >= values.size(), "buffer capacity is smaller than the result");
  std::copy(values.begin(), values.end(), buffer);
}

std::vector<csopt_complex> to_c(std::span<const csopt::Complex> values) {
  std::vector<csopt_complex> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back({v.real(), v.imag()});
  return out;
}

std::vector<csopt::Complex> from_c(const csopt_complex* values, std::size_t count) {
  std::vector<csopt::Complex> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.emplace_back(values[i].re, values[i].im);
  return out;
}

csopt::OptimizerOptions options_from(const csopt_optimizer_options* c) {
  csopt::OptimizerOptions o;
  if (c == nullptr) return o;
  o.restarts = c->restarts;
  o.max_iterations = c->max_iterations;
  o.x_tolerance = c->x_tolerance;
  o.f_tolerance = c->f_tolerance;
  o.rng_seed = c->rng_seed;
  o.init_scale = c->init_scale;
  o.threads = c->threads;
  csopt::validate(o);
  if (o.threads < 1) throw csopt::ConfigError("threads must be >= 1");
  return o;
}

csopt::MimoChannelTaps mimo_from(const csopt_complex* taps, std::size_t n, std::size_t num_taps) {
  require(taps != nullptr, "taps must not be NULL");
  require(n >= 1 && num_taps >= 1, "n and num_taps must be >= 1");
  std::vector<csopt::ComplexMatrix> mats;
  for (std::size_t l = 0; l < num_taps; ++l) mats.emplace_back(n, from_c(taps + l * n * n, n * n));
  return csopt::MimoChannelTaps(std::move(mats));
}

}  // namespace

extern "C" {

const char* csopt_version(void) { return "1.0.0"; }

const char* csopt_last_error(void) { return g_last_error.c_str(); }

const char* csopt_status_string(int status) {
  switch (status) {
    case CSOPT_OK:
      return "ok";
    case CSOPT_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case CSOPT_ERR_CONFIG:
      return "configuration error";
    case CSOPT_ERR_DOMAIN:
      return "domain error";
    case CSOPT_ERR_ILL_CONDITIONED:
      return "ill-conditioned problem";
    case CSOPT_ERR_NUMERICAL:
      return "numerical failure";
    case CSOPT_ERR_OPTIMIZATION_FAILED:
      return "optimization failed";
    case CSOPT_ERR_IO:
      return "i/o error";
    case CSOPT_ERR_INTERNAL:
      return "internal error";
    default:
      return "unknown status";
  }
}

int csopt_channel_create(const csopt_complex* taps, size_t count, csopt_channel** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be NULL");
    require(taps != nullptr && count > 0, "taps must hold at least one value");
    *out = new csopt_channel{csopt::ChannelTaps(from_c(taps, count))};
  });
}

void csopt_channel_destroy(csopt_channel* channel) { delete channel; }

int csopt_channel_normalized(const csopt_channel* channel, csopt_channel** out) {
  return guarded([&] {
    require(channel != nullptr && out != nullptr, "channel and out must not be NULL");
    *out = new csopt_channel{channel->taps.normalized()};
  });
}

int csopt_channel_taps(const csopt_channel* channel, csopt_complex* buffer, size_t capacity, size_t* count) {
  return guarded([&] {
    require(channel != nullptr, "channel must not be NULL");
    copy_out(to_c(channel->taps.taps()), buffer, capacity, count);
  });
}

int csopt_channel_autocorrelation(const csopt_channel* channel, csopt_complex* buffer, size_t capacity,
                                  size_t* count) {
  return guarded([&] {
    require(channel != nullptr, "channel must not be NULL");
    copy_out(to_c(csopt::autocorrelation(channel->taps).values()), buffer, capacity, count);
  });
}

int csopt_channel_power(const csopt_channel* channel, size_t grid_size, csopt_spectrum** out) {
  return guarded([&] {
    require(channel != nullptr && out != nullptr, "channel and out must not be NULL");
    *out = new csopt_spectrum{csopt::dtft_power(channel->taps, csopt::FrequencyGrid(grid_size))};
  });
}

int csopt_spectrum_create(const double* values, size_t grid_size, csopt_spectrum** out) {
  return guarded([&] {
    require(values != nullptr && out != nullptr, "values and out must not be NULL");
    *out = new csopt_spectrum{
        csopt::SampledSpectrum(csopt::FrequencyGrid(grid_size), std::vector<double>(values, values + grid_size))};
  });
}

void csopt_spectrum_destroy(csopt_spectrum* spectrum) { delete spectrum; }

int csopt_spectrum_values(const csopt_spectrum* spectrum, double* buffer, size_t capacity, size_t* count) {
  return guarded([&] {
    require(spectrum != nullptr, "spectrum must not be NULL");
    const auto v = spectrum->spectrum.values();
    copy_out(std::vector<double>(v.begin(), v.end()), buffer, capacity, count);
  });
}

int csopt_spectrum_power(const csopt_spectrum* spectrum, double* power) {
  return guarded([&] {
    require(spectrum != nullptr && power != nullptr, "spectrum and power must not be NULL");
    *power = csopt::spectrum_power(spectrum->spectrum);
  });
}

int csopt_spectrum_from_coeffs(double zero_lag, const csopt_complex* off_lags, size_t degree,
                               const csopt_spectrum* h2, double n0, csopt_spectrum** out) {
  return guarded([&] {
    require(h2 != nullptr && out != nullptr, "h2 and out must not be NULL");
    require(degree == 0 || off_lags != nullptr, "off_lags must not be NULL when degree > 0");
    csopt::TrigPolyCoeffs coeffs{zero_lag, from_c(off_lags, degree)};
    *out = new csopt_spectrum{csopt::spectrum_from_coeffs(coeffs, h2->spectrum, n0)};
  });
}

int csopt_solve_water_level(const csopt_complex* off_lags, size_t degree, const csopt_spectrum* h2, double n0,
                            double target_power, double* zero_lag, int* feasible) {
  return guarded([&] {
    require(h2 != nullptr && zero_lag != nullptr && feasible != nullptr, "h2, zero_lag and feasible must not be NULL");
    require(degree == 0 || off_lags != nullptr, "off_lags must not be NULL when degree > 0");
    const auto lags = from_c(off_lags, degree);
    const auto result = csopt::solve_water_level(lags, h2->spectrum, n0, target_power);
    *feasible = result ? 1 : 0;
    *zero_lag = result ? result->zero_lag : 0.0;
  });
}

int csopt_shorten(const csopt_spectrum* sv, double n0, int memory, csopt_receiver** out) {
  return guarded([&] {
    require(sv != nullptr && out != nullptr, "sv and out must not be NULL");
    *out = new csopt_receiver{csopt::solve_shortening(csopt::ShorteningProblem(sv->spectrum, n0, memory))};
  });
}

void csopt_receiver_destroy(csopt_receiver* receiver) { delete receiver; }

int csopt_receiver_info(const csopt_receiver* receiver, double* c, double* air, double* condition_estimate) {
  return guarded([&] {
    require(receiver != nullptr, "receiver must not be NULL");
    if (c) *c = receiver->solution.c;
    if (air) *air = receiver->solution.air;
    if (condition_estimate) *condition_estimate = receiver->solution.condition_estimate;
  });
}

int csopt_receiver_b(const csopt_receiver* receiver, csopt_complex* buffer, size_t capacity, size_t* count) {
  return guarded([&] {
    require(receiver != nullptr, "receiver must not be NULL");
    copy_out(to_c(receiver->solution.b), buffer, capacity, count);
  });
}

int csopt_receiver_seed_taps(const csopt_receiver* receiver, csopt_complex* buffer, size_t capacity,
                             size_t* count) {
  return guarded([&] {
    require(receiver != nullptr, "receiver must not be NULL");
    copy_out(to_c(receiver->solution.seed_taps), buffer, capacity, count);
  });
}

int csopt_receiver_gr_lags(const csopt_receiver* receiver, csopt_complex* buffer, size_t capacity, size_t* count) {
  return guarded([&] {
    require(receiver != nullptr, "receiver must not be NULL");
    copy_out(to_c(receiver->solution.gr_lags), buffer, capacity, count);
  });
}

int csopt_air_gaussian(double c, double* air) {
  return guarded([&] {
    require(air != nullptr, "air must not be NULL");
    *air = csopt::air_gaussian(c);
  });
}

void csopt_optimizer_options_default(csopt_optimizer_options* options) {
  if (options == nullptr) return;
  const csopt::OptimizerOptions d;
  *options = csopt_optimizer_options{d.restarts,   d.max_iterations, d.x_tolerance, d.f_tolerance,
                                     d.rng_seed,   d.init_scale,     d.threads};
}

int csopt_evaluate_objective(const csopt_complex* off_lags, size_t degree, const csopt_spectrum* h2, double n0,
                             int memory, double* c) {
  return guarded([&] {
    require(h2 != nullptr && c != nullptr, "h2 and c must not be NULL");
    require(degree == 0 || off_lags != nullptr, "off_lags must not be NULL when degree > 0");
    const auto lags = from_c(off_lags, degree);
    *c = csopt::evaluate_objective(lags, h2->spectrum, n0, memory);
  });
}

int csopt_optimize(const csopt_channel* channel, double n0, int memory, const csopt_optimizer_options* options,
                   size_t grid_size, csopt_filter** out) {
  return guarded([&] {
    require(channel != nullptr && out != nullptr, "channel and out must not be NULL");
    auto f = csopt::optimize_transmit_filter(channel->taps, n0, memory, options_from(options),
                                             csopt::FrequencyGrid(grid_size));
    *out = new csopt_filter{std::move(f), memory};
  });
}

int csopt_optimize_spectrum(const csopt_spectrum* h2, double n0, int memory, int real_coefficients,
                            const csopt_optimizer_options* options, csopt_filter** out) {
  return guarded([&] {
    require(h2 != nullptr && out != nullptr, "h2 and out must not be NULL");
    auto f = csopt::optimize_transmit_spectrum(h2->spectrum, n0, memory, real_coefficients != 0,
                                               options_from(options));
    *out = new csopt_filter{std::move(f), memory};
  });
}

void csopt_filter_destroy(csopt_filter* filter) { delete filter; }

int csopt_filter_info(const csopt_filter* filter, double* air, double* flat_air, double* c, int* converged) {
  return guarded([&] {
    require(filter != nullptr, "filter must not be NULL");
    if (air) *air = filter->filter.air;
    if (flat_air) *flat_air = filter->filter.flat_air;
    if (c) *c = filter->filter.receiver.c;
    if (converged) *converged = filter->filter.converged ? 1 : 0;
  });
}

int csopt_filter_coeffs(const csopt_filter* filter, double* zero_lag, csopt_complex* buffer, size_t capacity,
                        size_t* count) {
  return guarded([&] {
    require(filter != nullptr, "filter must not be NULL");
    if (zero_lag) *zero_lag = filter->filter.coeffs.zero_lag;
    copy_out(to_c(filter->filter.coeffs.off_lags), buffer, capacity, count);
  });
}

int csopt_filter_spectrum(const csopt_filter* filter, csopt_spectrum** out) {
  return guarded([&] {
    require(filter != nullptr && out != nullptr, "filter and out must not be NULL");
    *out = new csopt_spectrum{filter->filter.spectrum};
  });
}

int csopt_filter_stationarity(const csopt_filter* filter, const csopt_spectrum* h2, double n0, double step,
                              double* max_component) {
  return guarded([&] {
    require(filter != nullptr && h2 != nullptr && max_component != nullptr,
            "filter, h2 and max_component must not be NULL");
    require(step > 0.0, "step must be positive");
    *max_component = csopt::stationarity_check(filter->filter, h2->spectrum, n0, filter->memory, step).max_component;
  });
}

int csopt_waterfill(const csopt_spectrum* h2, double n0, double* theta, double* capacity,
                    csopt_spectrum** spectrum_out) {
  return guarded([&] {
    require(h2 != nullptr, "h2 must not be NULL");
    auto wf = csopt::waterfill(h2->spectrum, n0);
    if (theta) *theta = wf.theta;
    if (capacity) *capacity = wf.capacity;
    if (spectrum_out) *spectrum_out = new csopt_spectrum{std::move(wf.spectrum)};
  });
}

int csopt_combined_memory(const csopt_channel* channel, const csopt_spectrum* sp, double threshold_rel,
                          int* memory) {
  return guarded([&] {
    require(channel != nullptr && sp != nullptr && memory != nullptr, "channel, sp and memory must not be NULL");
    require(threshold_rel > 0.0, "threshold_rel must be positive");
    *memory = csopt::combined_memory(channel->taps, sp->spectrum, threshold_rel);
  });
}

int csopt_mimo_gains(const csopt_complex* taps, size_t n, size_t num_taps, size_t grid_size, double* buffer,
                     size_t capacity, size_t* count) {
  return guarded([&] {
    const auto ch = mimo_from(taps, n, num_taps);
    const auto sub = csopt::svd_spectra(ch, csopt::FrequencyGrid(grid_size));
    std::vector<double> flat;
    for (const auto& g : sub.gains) flat.insert(flat.end(), g.values().begin(), g.values().end());
    copy_out(flat, buffer, capacity, count);
  });
}

int csopt_mimo_optimize(const csopt_complex* taps, size_t n, size_t num_taps, double n0, int memory,
                        const csopt_optimizer_options* options, size_t grid_size, double* total_air,
                        double* flat_air, double* capacity, double* power_fractions) {
  return guarded([&] {
    const auto ch = mimo_from(taps, n, num_taps);
    const csopt::FrequencyGrid grid(grid_size);
    const auto result = csopt::optimize_mimo(ch, n0, memory, options_from(options), grid);
    if (total_air) *total_air = result.total_air;
    if (flat_air) *flat_air = result.flat_air;
    if (capacity) *capacity = csopt::mimo_waterfill_capacity(csopt::svd_spectra(ch, grid), n0);
    if (power_fractions) std::copy(result.power_fractions.begin(), result.power_fractions.end(), power_fractions);
  });
}

int csopt_ftn_optimize(double product, double symbol_time, double n0, int memory,
                       const csopt_optimizer_options* options, size_t grid_size, double* air, double* ase,
                       csopt_spectrum** spectrum_out) {
  return guarded([&] {
    require(product > 0.0 && symbol_time > 0.0, "product and symbol_time must be positive");
    const csopt::FtnScenario sc(product / (2.0 * symbol_time), symbol_time, n0);
    auto d = csopt::optimize_pulse(sc, memory, options_from(options), csopt::FrequencyGrid(grid_size));
    if (air) *air = d.air;
    if (ase) *ase = d.ase;
    if (spectrum_out) *spectrum_out = new csopt_spectrum{std::move(d.discrete_spectrum)};
  });
}

int csopt_rrc_folded_spectrum(double alpha, double product, double symbol_time, size_t grid_size,
                              csopt_spectrum** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be NULL");
    require(product > 0.0 && symbol_time > 0.0, "product and symbol_time must be positive");
    const csopt::FtnScenario sc(product / (2.0 * symbol_time), symbol_time, 1.0);
    *out = new csopt_spectrum{csopt::rrc_folded_spectrum(alpha, sc, csopt::FrequencyGrid(grid_size))};
  });
}

int csopt_ebn0_db(double air, double n0, double* ebn0_db) {
  return guarded([&] {
    require(ebn0_db != nullptr, "ebn0_db must not be NULL");
    *ebn0_db = csopt::ebn0_db(air, n0);
  });
}

void csopt_sim_options_default(csopt_sim_options* options) {
  if (options == nullptr) return;
  const csopt::SimConfig d;
  *options = csopt_sim_options{d.num_symbols, d.num_blocks, d.rng_seed, d.frontend_taps, d.guard, d.threads};
}

int csopt_airsim(const csopt_complex* v_taps, size_t count, int start, double n0, int memory, int alphabet,
                 const csopt_sim_options* options, size_t grid_size, double* air, double* stderr_bits) {
  return guarded([&] {
    require(v_taps != nullptr && count > 0, "v_taps must hold at least one value");
    require(alphabet == CSOPT_ALPHABET_BPSK || alphabet == CSOPT_ALPHABET_QPSK, "unknown alphabet");
    csopt::SimConfig cfg;
    if (options) {
      cfg.num_symbols = options->num_symbols;
      cfg.num_blocks = options->num_blocks;
      cfg.rng_seed = options->rng_seed;
      cfg.frontend_taps = options->frontend_taps;
      cfg.guard = options->guard;
      cfg.threads = options->threads;
    }
    require(cfg.threads >= 1, "threads must be >= 1");
    const csopt::TimeTaps v{from_c(v_taps, count), start};
    const auto a = alphabet == CSOPT_ALPHABET_QPSK ? csopt::Alphabet::qpsk() : csopt::Alphabet::bpsk();
    const auto est = csopt::simulate_shortened_rate(a, v, n0, memory, cfg, csopt::FrequencyGrid(grid_size));
    if (air) *air = est.air;
    if (stderr_bits) *stderr_bits = est.stderr_bits;
  });
}

int csopt_experiment_parse(const char* text, const char* source_name, csopt_experiment** out) {
  return guarded([&] {
    require(text != nullptr && out != nullptr, "text and out must not be NULL");
    *out = new csopt_experiment{csopt::parse_experiment_config(text, source_name ? source_name : "config")};
  });
}

int csopt_experiment_load(const char* path, csopt_experiment** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path and out must not be NULL");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw csopt::IoError(std::string("cannot open config file '") + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    *out = new csopt_experiment{csopt::parse_experiment_config(ss.str(), path)};
  });
}

void csopt_experiment_destroy(csopt_experiment* experiment) { delete experiment; }

int csopt_experiment_set_command(csopt_experiment* experiment, const char* command) {
  return guarded([&] {
    require(experiment != nullptr && command != nullptr, "experiment and command must not be NULL");
    const auto& known = csopt::known_commands();
    if (std::find(known.begin(), known.end(), command) == known.end()) {
      throw csopt::ConfigError(std::string("unknown command '") + command + "'");
    }
    experiment->config.command = command;
  });
}

int csopt_experiment_set_seed(csopt_experiment* experiment, uint64_t seed) {
  return guarded([&] {
    require(experiment != nullptr, "experiment must not be NULL");
    experiment->config.seed = seed;
  });
}

int csopt_experiment_set_grid(csopt_experiment* experiment, size_t grid_size) {
  return guarded([&] {
    require(experiment != nullptr, "experiment must not be NULL");
    if (grid_size < 4 || grid_size % 2 != 0) throw csopt::ConfigError("grid size M must be even and >= 4");
    experiment->config.grid_size = grid_size;
  });
}

int csopt_experiment_set_threads(csopt_experiment* experiment, int threads) {
  return guarded([&] {
    require(experiment != nullptr, "experiment must not be NULL");
    if (threads < 1) throw csopt::ConfigError("threads must be >= 1");
    experiment->config.threads = threads;
  });
}

int csopt_experiment_command(const csopt_experiment* experiment, const char** command) {
  return guarded([&] {
    require(experiment != nullptr && command != nullptr, "experiment and command must not be NULL");
    *command = experiment->config.command.c_str();
  });
}

int csopt_experiment_run(const csopt_experiment* experiment, csopt_report** out) {
  return guarded([&] {
    require(experiment != nullptr && out != nullptr, "experiment and out must not be NULL");
    auto report = csopt::run_experiment(experiment->config);
    auto* r = new csopt_report{};
    r->csv = csopt::render_csv(report.table, report.config_hash, report.command);
    r->summary = csopt::render_summary(report);
    for (const auto& a : report.attachments) {
      r->attachments.emplace_back(a.suffix, csopt::render_csv(a.table, report.config_hash, report.command));
    }
    r->report = std::move(report);
    *out = r;
  });
}

void csopt_report_destroy(csopt_report* report) { delete report; }

int csopt_report_csv(const csopt_report* report, const char** csv) {
  return guarded([&] {
    require(report != nullptr && csv != nullptr, "report and csv must not be NULL");
    *csv = report->csv.c_str();
  });
}

int csopt_report_summary(const csopt_report* report, const char** summary) {
  return guarded([&] {
    require(report != nullptr && summary != nullptr, "report and summary must not be NULL");
    *summary = report->summary.c_str();
  });
}

int csopt_report_attachment_count(const csopt_report* report, size_t* count) {
  return guarded([&] {
    require(report != nullptr && count != nullptr, "report and count must not be NULL");
    *count = report->attachments.size();
  });
}

int csopt_report_attachment(const csopt_report* report, size_t index, const char** suffix, const char** csv) {
  return guarded([&] {
    require(report != nullptr, "report must not be NULL");
    require(index < report->attachments.size(), "attachment index out of range");
    if (suffix) *suffix = report->attachments[index].first.c_str();
    if (csv) *csv = report->attachments[index].second.c_str();
  });
}

int csopt_report_write(const csopt_report* report, const char* path) {
  return guarded([&] {
    require(report != nullptr && path != nullptr, "report and path must not be NULL");
    auto write = [](const std::string& file, const std::string& content) {
      std::ofstream out(file, std::ios::binary | std::ios::trunc);
      if (!out) throw csopt::IoError("cannot open '" + file + "' for writing");
      out << content;
      out.flush();
      if (!out) throw csopt::IoError("failed writing '" + file + "'");
    };
    const std::string base(path);
    write(base, report->csv);
    write(base + ".summary.txt", report->summary);
    for (const auto& [suffix, csv] : report->attachments) write(base + suffix, csv);
  });
}

}  // extern "C"
