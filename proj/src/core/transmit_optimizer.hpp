#pragma once

// Search over the optimal-form transmit spectra for the one minimizing the
// shortening residual c under the power constraint.
//
// The search runs in normalized coordinates: off-lag A_l = s * x_l, where the
// scale s is the water level of the zero-off-lag spectrum. A_0 is never a
// search variable; it is re-solved at every evaluation to meet the power
// constraint exactly.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "core/shortening.hpp"
#include "core/spectral.hpp"

namespace csopt {

struct OptimizerOptions {
  int restarts = 3;
  int max_iterations = 2000;
  double x_tolerance = 1e-9;
  double f_tolerance = 1e-12;
  std::uint64_t rng_seed = 1;
  double init_scale = 0.1;
  double initial_step = 0.1;
  int threads = 1;
  WaterLevelOptions water_level{};
};

void validate(const OptimizerOptions& options);

struct OptimizedFilter {
  TrigPolyCoeffs coeffs;
  SampledSpectrum spectrum;
  double air = 0.0;
  ShorteningSolution receiver;
  bool converged = false;
  int restarts_used = 0;
  double power = kTwoPi;        ///< power carried by `spectrum`
  double coeff_scale = 1.0;     ///< s in A_l = s x_l
  bool real_coefficients = false;
  std::vector<double> search_point;  ///< normalized off-lag coordinates
  int evaluations = 0;
  double flat_air = 0.0;        ///< AIR of S_p = 1 at the same memory
};

/// c for the given off-lags, or +inf when the water level is infeasible.
double evaluate_objective(std::span<const Complex> off_lags, const SampledSpectrum& h2, double n0,
                          int memory, const WaterLevelOptions& options = {});

/// Multi-subchannel objective: independent optimal-form spectra per
/// subchannel, pooled power N * power_per_subchannel split by a softmax over
/// N-1 logits, objective prod_n c_n.
class JointObjective {
 public:
  JointObjective(std::vector<SampledSpectrum> gains, double n0, int memory, bool real_coefficients,
                 double power_per_subchannel = kTwoPi, WaterLevelOptions options = {});

  std::size_t subchannels() const { return gains_.size(); }
  std::size_t offlag_dimension() const { return per_channel_dim_; }
  std::size_t dimension() const;
  double scale(std::size_t n) const { return scales_[n]; }
  bool real_coefficients() const { return real_; }
  int memory() const { return memory_; }
  std::size_t grid_size() const { return gains_.front().size(); }

  /// The same objective on every `factor`-th grid node, with the full-grid
  /// scales kept so search points carry over. nullopt when the decimated grid
  /// is invalid or loses a subchannel.
  std::optional<JointObjective> decimated(std::size_t factor) const;

  double operator()(std::span<const double> x) const;

  std::vector<double> power_fractions(std::span<const double> x) const;
  std::vector<Complex> off_lags(std::size_t n, std::span<const double> x) const;

  /// Normalized coordinates of a flat-spectrum least-squares fit, per subchannel.
  std::vector<double> flat_fit_point(std::size_t n) const;

  /// Split logits reproducing the given nonnegative power fractions.
  std::vector<double> logits_for(std::span<const double> fractions) const;

  std::vector<OptimizedFilter> build(std::span<const double> x) const;

 private:
  double subchannel_residual(std::size_t n, std::span<const double> x, double power) const;

  std::vector<SampledSpectrum> gains_;
  std::vector<bool> active_;
  std::vector<std::size_t> active_index_;
  double n0_;
  int memory_;
  bool real_;
  double power_per_subchannel_;
  WaterLevelOptions wl_options_;
  std::size_t per_channel_dim_;
  std::vector<double> scales_;
  std::shared_ptr<const HarmonicTable> harmonics_;
  std::vector<std::vector<double>> inverse_;
};

struct JointResult {
  std::vector<OptimizedFilter> filters;
  std::vector<double> power_fractions;
  std::vector<double> x;
  double objective = 0.0;
  double total_air = 0.0;
  bool converged = false;
  int restarts_used = 0;
  int evaluations = 0;
};

/// Best of: all-zero start, flat-fit start, caller warm starts, and
/// restarts-1 random Gaussian starts. On grids of 1024 nodes or more the
/// starts run on a nested 512-node grid and the winner is refined on the full
/// grid.
JointResult optimize_joint(const JointObjective& objective, const OptimizerOptions& options,
                           std::span<const std::vector<double>> warm_starts = {});

/// Transmit spectrum optimization for a scalar gain |H|^2. Real coefficients
/// are used when `real_coefficients` is set.
OptimizedFilter optimize_transmit_spectrum(const SampledSpectrum& h2, double n0, int memory,
                                           bool real_coefficients, const OptimizerOptions& options,
                                           std::span<const std::vector<double>> warm_starts = {});

OptimizedFilter optimize_transmit_filter(const ChannelTaps& h, double n0, int memory,
                                         const OptimizerOptions& options,
                                         const FrequencyGrid& grid = FrequencyGrid(),
                                         std::span<const std::vector<double>> warm_starts = {},
                                         std::optional<bool> real_coefficients = std::nullopt);

/// Pads a normalized search point from memory L to L + extra (zero off-lags).
std::vector<double> pad_search_point(std::span<const double> x, bool real_coefficients, int extra);

struct StationarityReport {
  std::vector<double> gradient;  ///< dc/dx over 2L normalized coordinates (Re, Im interleaved)
  double max_component = 0.0;
  double threshold = 0.0;
  bool stationary = true;
};

StationarityReport stationarity_check(const OptimizedFilter& result, const SampledSpectrum& h2,
                                      double n0, int memory, double step = 1e-5,
                                      double threshold = 1e-4);

}  // namespace csopt
