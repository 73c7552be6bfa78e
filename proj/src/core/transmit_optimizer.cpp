#include "core/transmit_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "core/error.hpp"
#include "core/nelder_mead.hpp"
#include "core/parallel.hpp"

namespace csopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Grids at least this fine are searched on a nested decimated grid first.
constexpr std::size_t kCoarseGridSize = 512;
constexpr double kFineStepFactor = 0.1;

template <class Basis>
double residual_for_spectrum(const SampledSpectrum& gain, std::vector<double> sp, const Basis& basis, double n0,
                             int memory) {
  const auto g = gain.values();
  for (std::size_t m = 0; m < sp.size(); ++m) sp[m] *= g[m];
  try {
    return shortening_residual(sp, basis, n0, memory);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::IllConditioned) return kInf;
    throw;
  }
}

SampledSpectrum decimate(const SampledSpectrum& s, std::size_t factor) {
  const FrequencyGrid coarse(s.size() / factor);
  std::vector<double> out(coarse.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = s[j * factor];
  return SampledSpectrum(coarse, std::move(out));
}

}  // namespace

void validate(const OptimizerOptions& o) {
  if (o.restarts < 1) throw ConfigError("optimizer restarts must be >= 1");
  if (o.max_iterations < 1) throw ConfigError("optimizer max_iterations must be >= 1");
  if (!(o.x_tolerance > 0.0) || !(o.f_tolerance > 0.0)) throw ConfigError("optimizer tolerances must be positive");
  if (!(o.init_scale >= 0.0)) throw ConfigError("optimizer init_scale must be nonnegative");
  if (!(o.initial_step > 0.0)) throw ConfigError("optimizer initial_step must be positive");
}

double evaluate_objective(std::span<const Complex> off_lags, const SampledSpectrum& h2, double n0,
                          int memory, const WaterLevelOptions& options) {
  if (memory < 0) throw DomainError("receiver memory L must be nonnegative");
  h2.grid().require_alias_free(0, memory);
  const WaterLevelSolver solver(off_lags, h2, n0, options);
  const auto level = solver.solve(kTwoPi);
  if (!level) return kInf;
  return residual_for_spectrum(h2, solver.spectrum_values(*level), h2.grid(), n0, memory);
}

JointObjective::JointObjective(std::vector<SampledSpectrum> gains, double n0, int memory, bool real_coefficients,
                               double power_per_subchannel, WaterLevelOptions options)
    : gains_(std::move(gains)),
      n0_(n0),
      memory_(memory),
      real_(real_coefficients),
      power_per_subchannel_(power_per_subchannel),
      wl_options_(options) {
  if (gains_.empty()) throw DomainError("joint optimization needs at least one subchannel");
  if (!(n0 > 0.0)) throw DomainError("noise variance N0 must be positive");
  if (memory < 0) throw DomainError("receiver memory L must be nonnegative");
  if (!(power_per_subchannel > 0.0)) throw DomainError("power per subchannel must be positive");
  for (const auto& g : gains_) {
    if (!(g.grid() == gains_.front().grid())) throw DomainError("subchannel gains live on different grids");
  }
  per_channel_dim_ = static_cast<std::size_t>(real_ ? memory : 2 * memory);
  harmonics_ = std::make_shared<const HarmonicTable>(gains_.front().grid(), memory_);
  for (const auto& g : gains_) inverse_.push_back(inverse_gain(g));
  active_.resize(gains_.size());
  scales_.assign(gains_.size(), 1.0);
  for (std::size_t n = 0; n < gains_.size(); ++n) {
    const auto v = gains_[n].values();
    active_[n] = std::any_of(v.begin(), v.end(), [](double x) { return x > 0.0; });
    if (!active_[n]) continue;
    active_index_.push_back(n);
    const auto level = WaterLevelSolver({}, gains_[n], n0_, wl_options_).solve(power_per_subchannel_);
    if (level && *level > 0.0) scales_[n] = *level;
  }
  if (active_index_.empty()) throw DomainError("all subchannel gains are identically zero");
}

std::size_t JointObjective::dimension() const {
  return gains_.size() * per_channel_dim_ + (active_index_.size() - 1);
}

std::vector<double> JointObjective::power_fractions(std::span<const double> x) const {
  std::vector<double> fractions(gains_.size(), 0.0);
  const std::size_t base = gains_.size() * per_channel_dim_;
  const std::size_t count = active_index_.size();
  std::vector<double> logits(count, 0.0);
  for (std::size_t i = 0; i + 1 < count; ++i) logits[i] = x[base + i];
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (auto& l : logits) {
    l = std::exp(l - top);
    total += l;
  }
  for (std::size_t i = 0; i < count; ++i) fractions[active_index_[i]] = logits[i] / total;
  return fractions;
}

std::vector<Complex> JointObjective::off_lags(std::size_t n, std::span<const double> x) const {
  std::vector<Complex> out(static_cast<std::size_t>(memory_));
  const std::size_t base = n * per_channel_dim_;
  const double s = scales_[n];
  for (std::size_t l = 0; l < out.size(); ++l) {
    out[l] = real_ ? Complex(s * x[base + l], 0.0) : Complex(s * x[base + 2 * l], s * x[base + 2 * l + 1]);
  }
  return out;
}

double JointObjective::subchannel_residual(std::size_t n, std::span<const double> x, double power) const {
  if (!(power > 1e-300)) return 1.0;
  const auto lags = off_lags(n, x);
  const WaterLevelSolver solver(*harmonics_, lags, gains_[n], inverse_[n], n0_, wl_options_);
  const auto level = solver.solve(power, scales_[n]);
  if (!level) return kInf;
  return residual_for_spectrum(gains_[n], solver.spectrum_values(*level), *harmonics_, n0_, memory_);
}

double JointObjective::operator()(std::span<const double> x) const {
  const auto fractions = power_fractions(x);
  const double pooled = power_per_subchannel_ * static_cast<double>(gains_.size());
  double product = 1.0;
  for (std::size_t n : active_index_) {
    const double c = subchannel_residual(n, x, pooled * fractions[n]);
    if (!std::isfinite(c)) return kInf;
    product *= c;
  }
  return product;
}

std::optional<JointObjective> JointObjective::decimated(std::size_t factor) const {
  const std::size_t size = gains_.front().size();
  if (factor < 2 || size % factor != 0 || (size / factor) % 2 != 0 || size / factor < 4) return std::nullopt;
  JointObjective out(*this);
  for (std::size_t n = 0; n < gains_.size(); ++n) {
    out.gains_[n] = decimate(gains_[n], factor);
    out.inverse_[n] = inverse_gain(out.gains_[n]);
    const auto v = out.gains_[n].values();
    const bool active = std::any_of(v.begin(), v.end(), [](double x) { return x > 0.0; });
    if (active != active_[n]) return std::nullopt;
  }
  try {
    out.gains_.front().grid().require_alias_free(0, memory_);
  } catch (const ConfigError&) {
    return std::nullopt;
  }
  out.harmonics_ = std::make_shared<const HarmonicTable>(out.gains_.front().grid(), memory_);
  return out;
}

std::vector<double> JointObjective::flat_fit_point(std::size_t n) const {
  std::vector<double> out(per_channel_dim_, 0.0);
  if (!active_[n] || memory_ == 0) return out;
  const auto& gain = gains_[n];
  const auto& grid = gain.grid();
  const double s = scales_[n];
  // Polynomial that would make S_p = 1 exactly, capped near spectral nulls.
  std::vector<double> target(grid.size(), 0.0);
  for (std::size_t m = 0; m < grid.size(); ++m) {
    const double g = gain[m];
    if (g <= 0.0) continue;
    const double value = (g + n0_) * (g + n0_) / (n0_ * n0_ * g);
    target[m] = std::min(value, 100.0 * s);
  }
  for (int l = 1; l <= memory_; ++l) {
    const Complex a = std::conj(fourier_coefficient(target, grid, l)) / s;
    const auto i = static_cast<std::size_t>(l - 1);
    if (real_) {
      out[i] = a.real();
    } else {
      out[2 * i] = a.real();
      out[2 * i + 1] = a.imag();
    }
  }
  return out;
}

std::vector<double> JointObjective::logits_for(std::span<const double> fractions) const {
  std::vector<double> out;
  const std::size_t count = active_index_.size();
  const double last = std::max(fractions[active_index_.back()], 1e-12);
  for (std::size_t i = 0; i + 1 < count; ++i) {
    out.push_back(std::log(std::max(fractions[active_index_[i]], 1e-12) / last));
  }
  return out;
}

std::vector<OptimizedFilter> JointObjective::build(std::span<const double> x) const {
  const auto fractions = power_fractions(x);
  const double pooled = power_per_subchannel_ * static_cast<double>(gains_.size());
  std::vector<OptimizedFilter> out;
  out.reserve(gains_.size());
  for (std::size_t n = 0; n < gains_.size(); ++n) {
    const auto& gain = gains_[n];
    OptimizedFilter f{TrigPolyCoeffs{}, SampledSpectrum::constant(gain.grid(), 0.0), 0.0,
                      ShorteningSolution{}, false, 0, 0.0, scales_[n], real_, {}, 0, 0.0};
    f.search_point.assign(x.begin() + static_cast<std::ptrdiff_t>(n * per_channel_dim_),
                          x.begin() + static_cast<std::ptrdiff_t>((n + 1) * per_channel_dim_));
    f.coeffs.off_lags = off_lags(n, x);
    f.power = pooled * fractions[n];
    if (active_[n] && f.power > 1e-300) {
      const WaterLevelSolver solver(f.coeffs.off_lags, gain, n0_, wl_options_);
      const auto level = solver.solve(f.power);
      if (!level) throw NumericalError("water level infeasible at the selected optimum");
      f.coeffs.zero_lag = *level;
      f.spectrum = SampledSpectrum(gain.grid(), solver.spectrum_values(*level));
    }
    f.receiver = solve_shortening(ShorteningProblem(gain.times(f.spectrum), n0_, memory_));
    f.air = f.receiver.air;
    f.flat_air = solve_shortening_rate_only(ShorteningProblem(gain, n0_, memory_)).air;
    out.push_back(std::move(f));
  }
  return out;
}

JointResult optimize_joint(const JointObjective& objective, const OptimizerOptions& options,
                           std::span<const std::vector<double>> warm_starts) {
  validate(options);
  const std::size_t dim = objective.dimension();
  const std::size_t per = objective.offlag_dimension();

  std::vector<std::vector<double>> starts;
  starts.emplace_back(dim, 0.0);
  {
    std::vector<double> fit(dim, 0.0);
    for (std::size_t n = 0; n < objective.subchannels(); ++n) {
      const auto p = objective.flat_fit_point(n);
      std::copy(p.begin(), p.end(), fit.begin() + static_cast<std::ptrdiff_t>(n * per));
    }
    if (dim > 0) starts.push_back(std::move(fit));
  }
  for (const auto& w : warm_starts) {
    if (w.size() != dim) {
      throw DomainError("warm start has dimension " + std::to_string(w.size()) + ", expected " +
                        std::to_string(dim));
    }
    starts.push_back(w);
  }
  if (dim > 0) {
    for (int r = 1; r < options.restarts; ++r) {
      std::seed_seq seq{static_cast<std::uint32_t>(options.rng_seed & 0xffffffffu),
                        static_cast<std::uint32_t>(options.rng_seed >> 32), static_cast<std::uint32_t>(r)};
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> normal(0.0, options.init_scale);
      std::vector<double> x(dim);
      for (auto& v : x) v = normal(rng);
      starts.push_back(std::move(x));
    }
  }

  NelderMeadOptions nm;
  nm.max_iterations = options.max_iterations;
  nm.x_tolerance = options.x_tolerance;
  nm.f_tolerance = options.f_tolerance;
  nm.initial_step = options.initial_step;

  // Every start runs on a nested coarse grid when one is available; the best
  // of the coarse endpoints and the starts themselves, scored on the full
  // grid, seeds a final full-grid run.
  std::optional<JointObjective> coarse;
  const std::size_t size = objective.grid_size();
  if (size >= 2 * kCoarseGridSize && size % kCoarseGridSize == 0) coarse = objective.decimated(size / kCoarseGridSize);
  const JointObjective& search = coarse ? *coarse : objective;

  std::vector<NelderMeadResult> runs(starts.size());
  const Objective f = [&search](std::span<const double> x) { return search(x); };
  parallel_for(starts.size(), options.threads, [&](std::size_t i) { runs[i] = nelder_mead(f, starts[i], nm); });

  int evaluations = 0;
  for (const auto& r : runs) evaluations += r.evaluations;

  if (coarse) {
    std::vector<std::vector<double>> candidates;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      candidates.push_back(runs[i].x);
      candidates.push_back(starts[i]);
    }
    std::size_t pick = candidates.size();
    double pick_value = kInf;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const double v = objective(candidates[i]);
      ++evaluations;
      if (std::isfinite(v) && (pick == candidates.size() || v < pick_value)) {
        pick = i;
        pick_value = v;
      }
    }
    if (pick != candidates.size()) {
      NelderMeadOptions fine = nm;
      fine.initial_step = nm.initial_step * kFineStepFactor;
      const Objective full = [&objective](std::span<const double> x) { return objective(x); };
      auto run = nelder_mead(full, candidates[pick], fine);
      evaluations += run.evaluations;
      runs.assign(1, std::move(run));
    } else {
      for (auto& r : runs) r.value = kInf;
    }
  }

  std::size_t best = runs.size();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!std::isfinite(runs[i].value)) continue;
    if (best == runs.size() || runs[i].value < runs[best].value) best = i;
  }
  if (best == runs.size()) {
    throw OptimizationFailed("all " + std::to_string(starts.size()) +
                             " optimizer starts were infeasible (water level not reachable within a_max = " +
                             std::to_string(options.water_level.a_max) + ")");
  }

  JointResult result;
  result.x = runs[best].x;
  result.objective = runs[best].value;
  result.converged = runs[best].converged;
  result.restarts_used = static_cast<int>(starts.size());
  result.evaluations = evaluations;
  result.power_fractions = objective.power_fractions(result.x);
  result.filters = objective.build(result.x);
  for (auto& filt : result.filters) {
    filt.converged = result.converged;
    filt.restarts_used = result.restarts_used;
    filt.evaluations = evaluations;
    result.total_air += filt.air;
  }
  return result;
}

OptimizedFilter optimize_transmit_spectrum(const SampledSpectrum& h2, double n0, int memory, bool real_coefficients,
                                           const OptimizerOptions& options,
                                           std::span<const std::vector<double>> warm_starts) {
  WaterLevelOptions wl = options.water_level;
  const JointObjective objective({h2}, n0, memory, real_coefficients, kTwoPi, wl);
  auto result = optimize_joint(objective, options, warm_starts);
  return std::move(result.filters.front());
}

OptimizedFilter optimize_transmit_filter(const ChannelTaps& h, double n0, int memory, const OptimizerOptions& options,
                                         const FrequencyGrid& grid, std::span<const std::vector<double>> warm_starts,
                                         std::optional<bool> real_coefficients) {
  if (memory < 0) throw DomainError("receiver memory L must be nonnegative");
  grid.require_alias_free(h.memory(), memory);
  const auto h2 = dtft_power(h, grid);
  return optimize_transmit_spectrum(h2, n0, memory, real_coefficients.value_or(h.is_real()), options, warm_starts);
}

std::vector<double> pad_search_point(std::span<const double> x, bool real_coefficients, int extra) {
  std::vector<double> out(x.begin(), x.end());
  out.resize(out.size() + static_cast<std::size_t>(real_coefficients ? extra : 2 * extra), 0.0);
  return out;
}

StationarityReport stationarity_check(const OptimizedFilter& result, const SampledSpectrum& h2, double n0, int memory,
                                      double step, double threshold) {
  StationarityReport report;
  report.threshold = threshold;
  const double s = result.coeff_scale;
  std::vector<double> x;
  for (const auto& a : result.coeffs.off_lags) {
    x.push_back(a.real() / s);
    x.push_back(a.imag() / s);
  }
  auto lags_at = [&](const std::vector<double>& p) {
    std::vector<Complex> out(static_cast<std::size_t>(memory));
    for (std::size_t l = 0; l < out.size(); ++l) out[l] = Complex(s * p[2 * l], s * p[2 * l + 1]);
    return out;
  };
  report.gradient.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto plus = x;
    auto minus = x;
    plus[i] += step;
    minus[i] -= step;
    const double fp = evaluate_objective(lags_at(plus), h2, n0, memory);
    const double fm = evaluate_objective(lags_at(minus), h2, n0, memory);
    report.gradient[i] = (fp - fm) / (2.0 * step);
    report.max_component = std::max(report.max_component, std::abs(report.gradient[i]));
  }
  report.stationary = report.max_component < threshold;
  return report;
}

}  // namespace csopt
