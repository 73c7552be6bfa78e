#pragma once

// Frequency-domain primitives shared by every other module: channel taps,
// the uniform frequency grid, sampled power spectra, Hermitian trigonometric
// polynomials and the water-level (A_0) power normalization.
//
// All integrals over [-pi, pi) are rectangle-rule sums on the grid. For
// trigonometric polynomials of degree < M the rule is exact.

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace csopt {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Discrete-time channel impulse response h_0..h_{L_H}.
///
/// Leading and trailing zero taps are trimmed on construction, so the first
/// and last stored taps are nonzero. An all-zero response is rejected.
class ChannelTaps {
 public:
  explicit ChannelTaps(std::vector<Complex> taps);

  std::span<const Complex> taps() const { return taps_; }
  std::size_t size() const { return taps_.size(); }
  int memory() const { return static_cast<int>(taps_.size()) - 1; }
  bool is_real() const;
  double energy() const;

  /// Scaled copy with sum |h_k|^2 = 1.
  ChannelTaps normalized() const;

 private:
  std::vector<Complex> taps_;
};

/// Uniform grid omega_m = -pi + 2 pi m / M, m = 0..M-1, with M even.
///
/// Node phasors e^{j omega_m} are computed once and shared between copies.
class FrequencyGrid {
 public:
  static constexpr std::size_t kDefaultSize = 4096;

  explicit FrequencyGrid(std::size_t size = kDefaultSize);

  std::size_t size() const { return size_; }
  double step() const { return kTwoPi / static_cast<double>(size_); }
  double node(std::size_t m) const;
  Complex phasor(std::size_t m) const { return (*phasors_)[m]; }
  std::span<const Complex> phasors() const { return *phasors_; }

  /// Index of the node at omega = 0.
  std::size_t zero_index() const { return size_ / 2; }

  /// Throws ConfigError unless M >= 4 (channel_memory + receiver_memory + 2).
  void require_alias_free(int channel_memory, int receiver_memory) const;

  friend bool operator==(const FrequencyGrid& a, const FrequencyGrid& b) {
    return a.size_ == b.size_;
  }

 private:
  std::size_t size_;
  std::shared_ptr<const std::vector<Complex>> phasors_;
};

/// Real nonnegative function sampled on a FrequencyGrid.
class SampledSpectrum {
 public:
  SampledSpectrum(FrequencyGrid grid, std::vector<double> values);

  static SampledSpectrum constant(const FrequencyGrid& grid, double value);

  const FrequencyGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t m) const { return values_[m]; }
  std::size_t size() const { return values_.size(); }

  /// Nodewise product (e.g. |V|^2 = |H|^2 S_p).
  SampledSpectrum times(const SampledSpectrum& other) const;
  SampledSpectrum scaled(double factor) const;

 private:
  FrequencyGrid grid_;
  std::vector<double> values_;
};

/// Autocorrelation lags g_{-L}..g_{L} of a tap sequence, stored with offset.
class LagSequence {
 public:
  LagSequence(std::vector<Complex> values, int max_lag)
      : values_(std::move(values)), max_lag_(max_lag) {}

  int max_lag() const { return max_lag_; }
  Complex at(int lag) const;
  std::span<const Complex> values() const { return values_; }

 private:
  std::vector<Complex> values_;
  int max_lag_;
};

/// Hermitian coefficients {A_l}, l = -L..L, stored as A_0 and A_1..A_L.
struct TrigPolyCoeffs {
  double zero_lag = 0.0;
  std::vector<Complex> off_lags;

  int degree() const { return static_cast<int>(off_lags.size()); }

  /// poly(omega_m) = A_0 + 2 Re sum_{l>=1} A_l e^{j l omega_m}.
  std::vector<double> evaluate(const FrequencyGrid& grid) const;

  /// Max |Im sum_{l=-L}^{L} A_l e^{j l omega}| over the grid from the
  /// explicit two-sided sum.
  double imag_residue(const FrequencyGrid& grid) const;
};

/// cos(l omega_m) and sin(l omega_m) for l = 1..degree, one contiguous row
/// per lag, for loops that evaluate the same low-degree harmonics many times.
class HarmonicTable {
 public:
  HarmonicTable(const FrequencyGrid& grid, int degree);

  int degree() const { return degree_; }
  std::size_t size() const { return size_; }
  std::span<const double> cos(int l) const { return row(cos_, l); }
  std::span<const double> sin(int l) const { return row(sin_, l); }

  /// 2 Re sum_{l>=1} A_l e^{j l omega_m}; needs degree() >= off_lags.size().
  std::vector<double> off_lag_part(std::span<const Complex> off_lags) const;

 private:
  std::span<const double> row(const std::vector<double>& table, int l) const;

  std::size_t size_;
  int degree_;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

// g_l = sum_k h_k conj(h_{k-l}).
LagSequence autocorrelation(const ChannelTaps& h);

/// H(omega_m) = sum_k h_k e^{-j k omega_m}.
std::vector<Complex> dtft(std::span<const Complex> taps, const FrequencyGrid& grid,
                          int start_index = 0);

/// |H(omega_m)|^2 on the grid.
SampledSpectrum dtft_power(const ChannelTaps& h, const FrequencyGrid& grid);

/// Optimal-form transmit spectrum:
///   S_p = N0 sqrt(poly / H2) - N0 / H2  where H2 > 0 and poly H2 > 1,
///   S_p = 0 elsewhere.
SampledSpectrum spectrum_from_coeffs(const TrigPolyCoeffs& coeffs, const SampledSpectrum& h2,
                                     double n0);

/// (2 pi / M) sum_m S(omega_m).
double spectrum_power(const SampledSpectrum& s);

/// Rectangle-rule mean (1/M) sum_m f(omega_m).
double grid_mean(std::span<const double> values);

/// Fourier coefficient (1/M) sum_m f(omega_m) e^{j k omega_m}.
Complex fourier_coefficient(std::span<const double> values, const FrequencyGrid& grid, int k);

struct WaterLevelOptions {
  double a_max = 1e12;
  double relative_tolerance = 1e-12;
  int max_iterations = 200;
};

/// Solves for A_0 so that the optimal-form spectrum with the given off-lags
/// carries `target_power`. The spectrum is nondecreasing in A_0 at every
/// node, so the solution is unique where the power is positive.
///
/// The off-lag part of the polynomial is evaluated once; repeated solves
/// against different targets reuse it. The solver keeps a view of `h2`, which
/// must outlive it.
class WaterLevelSolver {
 public:
  WaterLevelSolver(std::span<const Complex> off_lags, const SampledSpectrum& h2, double n0,
                   WaterLevelOptions options = {});

  /// Same, with precomputed harmonics and `inverse_h2` from inverse_gain(h2).
  WaterLevelSolver(const HarmonicTable& harmonics, std::span<const Complex> off_lags,
                   const SampledSpectrum& h2, std::span<const double> inverse_h2, double n0,
                   WaterLevelOptions options = {});

  WaterLevelSolver(const WaterLevelSolver&) = delete;
  WaterLevelSolver& operator=(const WaterLevelSolver&) = delete;

  /// Returns A_0, or nullopt when no A_0 in [-a_max, a_max] reaches the target.
  /// `hint` is a starting point for the Newton iteration; it changes the
  /// iteration count, not the solution.
  std::optional<double> solve(double target_power, std::optional<double> hint = std::nullopt) const;

  /// Spectrum values for a given A_0.
  std::vector<double> spectrum_values(double zero_lag) const;

  double power(double zero_lag) const;

 private:
  double power_and_slope(double zero_lag, double* slope) const;

  void init();

  std::vector<double> offlag_part_;
  std::span<const double> h2_;
  std::vector<double> own_inverse_;
  std::span<const double> inverse_;  ///< 1 / H2, +inf where H2 = 0
  double zero_power_level_;
  double n0_;
  double step_;
  WaterLevelOptions options_;
};

/// 1 / H2 per node, +inf where H2 = 0.
std::vector<double> inverse_gain(const SampledSpectrum& h2);

std::optional<TrigPolyCoeffs> solve_water_level(std::span<const Complex> off_lags,
                                                const SampledSpectrum& h2, double n0,
                                                double target_power,
                                                const WaterLevelOptions& options = {});

}  // namespace csopt
