#include "core/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "core/error.hpp"

namespace csopt {

ChannelTaps::ChannelTaps(std::vector<Complex> taps) {
  auto nonzero = [](const Complex& t) { return t != Complex{}; };
  auto first = std::find_if(taps.begin(), taps.end(), nonzero);
  if (first == taps.end()) {
    throw DomainError("channel taps must contain at least one nonzero tap");
  }
  auto last = std::find_if(taps.rbegin(), taps.rend(), nonzero).base();
  taps_.assign(first, last);
  for (const auto& t : taps_) {
    if (!std::isfinite(t.real()) || !std::isfinite(t.imag())) {
      throw DomainError("channel taps must be finite");
    }
  }
}

bool ChannelTaps::is_real() const {
  return std::all_of(taps_.begin(), taps_.end(), [](const Complex& t) { return t.imag() == 0.0; });
}

double ChannelTaps::energy() const {
  double e = 0.0;
  for (const auto& t : taps_) e += std::norm(t);
  return e;
}

ChannelTaps ChannelTaps::normalized() const {
  const double scale = 1.0 / std::sqrt(energy());
  std::vector<Complex> out(taps_);
  for (auto& t : out) t *= scale;
  return ChannelTaps(std::move(out));
}

FrequencyGrid::FrequencyGrid(std::size_t size) : size_(size) {
  if (size < 4 || size % 2 != 0) {
    throw ConfigError("frequency grid size must be even and >= 4, got " + std::to_string(size));
  }
  auto phasors = std::make_shared<std::vector<Complex>>(size);
  for (std::size_t m = 0; m < size; ++m) (*phasors)[m] = std::polar(1.0, node(m));
  phasors_ = std::move(phasors);
}

double FrequencyGrid::node(std::size_t m) const {
  const double twice_offset = 2.0 * static_cast<double>(m) - static_cast<double>(size_);
  return twice_offset * kPi / static_cast<double>(size_);
}

void FrequencyGrid::require_alias_free(int channel_memory, int receiver_memory) const {
  const long needed = 4L * (static_cast<long>(channel_memory) + receiver_memory + 2);
  if (static_cast<long>(size_) < needed) {
    throw ConfigError("frequency grid too coarse: M = " + std::to_string(size_) +
                      " but channel memory " + std::to_string(channel_memory) +
                      " and receiver memory " + std::to_string(receiver_memory) +
                      " require M >= " + std::to_string(needed));
  }
}

SampledSpectrum::SampledSpectrum(FrequencyGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw DomainError("spectrum has " + std::to_string(values_.size()) +
                      " samples for a grid of size " + std::to_string(grid_.size()));
  }
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw DomainError("spectrum values must be finite and nonnegative");
    }
  }
}

SampledSpectrum SampledSpectrum::constant(const FrequencyGrid& grid, double value) {
  return SampledSpectrum(grid, std::vector<double>(grid.size(), value));
}

SampledSpectrum SampledSpectrum::times(const SampledSpectrum& other) const {
  if (!(grid_ == other.grid_)) throw DomainError("spectra live on different grids");
  std::vector<double> out(values_.size());
  for (std::size_t m = 0; m < out.size(); ++m) out[m] = values_[m] * other.values_[m];
  return SampledSpectrum(grid_, std::move(out));
}

SampledSpectrum SampledSpectrum::scaled(double factor) const {
  std::vector<double> out(values_);
  for (auto& v : out) v *= factor;
  return SampledSpectrum(grid_, std::move(out));
}

Complex LagSequence::at(int lag) const {
  if (lag < -max_lag_ || lag > max_lag_) return {};
  return values_[static_cast<std::size_t>(lag + max_lag_)];
}

std::vector<double> TrigPolyCoeffs::evaluate(const FrequencyGrid& grid) const {
  std::vector<double> out(grid.size(), zero_lag);
  if (off_lags.empty()) return out;
  const auto phasors = grid.phasors();
  const std::size_t size = grid.size();
  for (std::size_t l = 1; l <= off_lags.size(); ++l) {
    // e^{j l omega_m} = (-1)^(l+1) phasors[m l mod M] on this grid.
    const Complex a = (l % 2 == 1 ? 2.0 : -2.0) * off_lags[l - 1];
    std::size_t idx = 0;
    for (std::size_t m = 0; m < size; ++m) {
      const Complex z = phasors[idx];
      out[m] += a.real() * z.real() - a.imag() * z.imag();
      idx += l;
      if (idx >= size) idx -= size;
    }
  }
  return out;
}

double TrigPolyCoeffs::imag_residue(const FrequencyGrid& grid) const {
  double worst = 0.0;
  const int degree = this->degree();
  for (std::size_t m = 0; m < grid.size(); ++m) {
    const double w = grid.node(m);
    Complex sum = zero_lag;
    for (int l = 1; l <= degree; ++l) {
      const Complex a = off_lags[static_cast<std::size_t>(l - 1)];
      sum += a * std::polar(1.0, l * w);
      sum += std::conj(a) * std::polar(1.0, -l * w);
    }
    worst = std::max(worst, std::abs(sum.imag()));
  }
  return worst;
}

LagSequence autocorrelation(const ChannelTaps& h) {
  const auto taps = h.taps();
  const int memory = h.memory();
  std::vector<Complex> g(static_cast<std::size_t>(2 * memory + 1));
  for (int lag = -memory; lag <= memory; ++lag) {
    Complex acc{};
    for (int k = 0; k <= memory; ++k) {
      const int j = k - lag;
      if (j < 0 || j > memory) continue;
      acc += taps[static_cast<std::size_t>(k)] * std::conj(taps[static_cast<std::size_t>(j)]);
    }
    g[static_cast<std::size_t>(lag + memory)] = acc;
  }
  // Lag zero is real by definition; drop roundoff.
  g[static_cast<std::size_t>(memory)] = Complex(g[static_cast<std::size_t>(memory)].real(), 0.0);
  return LagSequence(std::move(g), memory);
}

std::vector<Complex> dtft(std::span<const Complex> taps, const FrequencyGrid& grid,
                          int start_index) {
  std::vector<Complex> out(grid.size());
  if (taps.empty()) return out;
  const auto phasors = grid.phasors();
  for (std::size_t m = 0; m < out.size(); ++m) {
    const Complex w = std::conj(phasors[m]);
    Complex acc = taps.back();
    for (std::size_t i = taps.size() - 1; i-- > 0;) acc = acc * w + taps[i];
    if (start_index != 0) acc *= std::polar(1.0, -start_index * grid.node(m));
    out[m] = acc;
  }
  return out;
}

SampledSpectrum dtft_power(const ChannelTaps& h, const FrequencyGrid& grid) {
  grid.require_alias_free(h.memory(), 0);
  const auto response = dtft(h.taps(), grid);
  std::vector<double> values(grid.size());
  for (std::size_t m = 0; m < values.size(); ++m) values[m] = std::norm(response[m]);
  return SampledSpectrum(grid, std::move(values));
}

SampledSpectrum spectrum_from_coeffs(const TrigPolyCoeffs& coeffs, const SampledSpectrum& h2,
                                     double n0) {
  if (!(n0 > 0.0)) throw DomainError("noise variance N0 must be positive");
  const auto poly = coeffs.evaluate(h2.grid());
  std::vector<double> out(h2.size(), 0.0);
  for (std::size_t m = 0; m < out.size(); ++m) {
    const double g = h2[m];
    // In/out decision before the square root: negative poly never reaches sqrt.
    if (g > 0.0 && poly[m] * g > 1.0) {
      out[m] = std::max(0.0, n0 * std::sqrt(poly[m] / g) - n0 / g);
    }
  }
  return SampledSpectrum(h2.grid(), std::move(out));
}

double spectrum_power(const SampledSpectrum& s) {
  const auto v = s.values();
  return s.grid().step() * std::accumulate(v.begin(), v.end(), 0.0);
}

double grid_mean(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

Complex fourier_coefficient(std::span<const double> values, const FrequencyGrid& grid, int k) {
  Complex acc{};
  for (std::size_t m = 0; m < values.size(); ++m) {
    acc += values[m] * std::polar(1.0, k * grid.node(m));
  }
  return acc / static_cast<double>(values.size());
}

HarmonicTable::HarmonicTable(const FrequencyGrid& grid, int degree)
    : size_(grid.size()),
      degree_(degree),
      cos_(grid.size() * static_cast<std::size_t>(std::max(degree, 0))),
      sin_(cos_.size()) {
  if (degree < 0) throw DomainError("harmonic table degree must be nonnegative");
  const auto phasors = grid.phasors();
  for (int l = 1; l <= degree; ++l) {
    // e^{j l omega_m} = (-1)^(l+1) phasors[m l mod M] on this grid.
    const double sign = l % 2 == 1 ? 1.0 : -1.0;
    const auto step = static_cast<std::size_t>(l);
    const std::size_t base = static_cast<std::size_t>(l - 1) * size_;
    std::size_t idx = 0;
    for (std::size_t m = 0; m < size_; ++m) {
      cos_[base + m] = sign * phasors[idx].real();
      sin_[base + m] = sign * phasors[idx].imag();
      idx += step;
      if (idx >= size_) idx -= size_;
    }
  }
}

std::span<const double> HarmonicTable::row(const std::vector<double>& table, int l) const {
  if (l < 1 || l > degree_) throw DomainError("harmonic " + std::to_string(l) + " outside the table");
  return std::span<const double>(table).subspan(static_cast<std::size_t>(l - 1) * size_, size_);
}

std::vector<double> HarmonicTable::off_lag_part(std::span<const Complex> off_lags) const {
  std::vector<double> out(size_, 0.0);
  for (std::size_t i = 0; i < off_lags.size(); ++i) {
    const auto l = static_cast<int>(i + 1);
    const double re = 2.0 * off_lags[i].real();
    const double im = 2.0 * off_lags[i].imag();
    const auto c = cos(l);
    const auto s = sin(l);
    for (std::size_t m = 0; m < size_; ++m) out[m] += re * c[m] - im * s[m];
  }
  return out;
}

std::vector<double> inverse_gain(const SampledSpectrum& h2) {
  std::vector<double> out(h2.size(), std::numeric_limits<double>::infinity());
  for (std::size_t m = 0; m < out.size(); ++m) {
    if (h2[m] > 0.0) out[m] = 1.0 / h2[m];
  }
  return out;
}

WaterLevelSolver::WaterLevelSolver(std::span<const Complex> off_lags, const SampledSpectrum& h2,
                                   double n0, WaterLevelOptions options)
    : h2_(h2.values()),
      own_inverse_(inverse_gain(h2)),
      inverse_(own_inverse_),
      n0_(n0),
      step_(h2.grid().step()),
      options_(options) {
  TrigPolyCoeffs partial{0.0, std::vector<Complex>(off_lags.begin(), off_lags.end())};
  offlag_part_ = partial.evaluate(h2.grid());
  init();
}

WaterLevelSolver::WaterLevelSolver(const HarmonicTable& harmonics, std::span<const Complex> off_lags,
                                   const SampledSpectrum& h2, std::span<const double> inverse_h2, double n0,
                                   WaterLevelOptions options)
    : offlag_part_(harmonics.off_lag_part(off_lags)),
      h2_(h2.values()),
      inverse_(inverse_h2),
      n0_(n0),
      step_(h2.grid().step()),
      options_(options) {
  if (harmonics.size() != h2.size() || inverse_h2.size() != h2.size()) {
    throw DomainError("water level inputs live on different grids");
  }
  if (harmonics.degree() < static_cast<int>(off_lags.size())) {
    throw DomainError("harmonic table degree below the number of off-lags");
  }
  init();
}

void WaterLevelSolver::init() {
  if (!(n0_ > 0.0)) throw DomainError("noise variance N0 must be positive");
  // Below `zero_power_level_` every node is clipped.
  zero_power_level_ = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < h2_.size(); ++m) {
    zero_power_level_ = std::min(zero_power_level_, inverse_[m] - offlag_part_[m]);
  }
}

double WaterLevelSolver::power_and_slope(double zero_lag, double* slope) const {
  double power = 0.0;
  double d = 0.0;
  for (std::size_t m = 0; m < h2_.size(); ++m) {
    const double poly = zero_lag + offlag_part_[m];
    if (!(poly > inverse_[m])) continue;
    const double root = std::sqrt(poly * h2_[m]);
    power += (root - 1.0) * inverse_[m];
    d += 1.0 / root;
  }
  if (slope) *slope = 0.5 * n0_ * d * step_;
  return n0_ * power * step_;
}

double WaterLevelSolver::power(double zero_lag) const { return power_and_slope(zero_lag, nullptr); }

std::vector<double> WaterLevelSolver::spectrum_values(double zero_lag) const {
  std::vector<double> out(h2_.size(), 0.0);
  for (std::size_t m = 0; m < h2_.size(); ++m) {
    const double poly = zero_lag + offlag_part_[m];
    if (!(poly > inverse_[m])) continue;
    out[m] = std::max(0.0, n0_ * (std::sqrt(poly * h2_[m]) - 1.0) * inverse_[m]);
  }
  return out;
}

std::optional<double> WaterLevelSolver::solve(double target_power, std::optional<double> hint) const {
  if (!(target_power > 0.0)) throw DomainError("target power must be positive");
  const double a_max = options_.a_max;
  if (!std::isfinite(zero_power_level_)) return std::nullopt;

  double lo = zero_power_level_;
  if (lo < -a_max) {
    if (power(-a_max) > target_power) return std::nullopt;
    lo = -a_max;
  }
  if (lo > a_max) return std::nullopt;

  // Safeguarded Newton. Until an upper bracket is known, steps that fail to
  // move right of `lo` fall back to a doubling expansion.
  const double tol = options_.relative_tolerance * target_power;
  double width = std::max(1.0, std::abs(lo));
  double hi = a_max;
  bool bracketed = false;
  double x = (hint && *hint > lo && *hint <= a_max) ? *hint : std::min(lo + width, a_max);
  double best_x = x;
  double best_err = std::numeric_limits<double>::infinity();
  for (int it = 0; it < options_.max_iterations; ++it) {
    double slope = 0.0;
    const double p = power_and_slope(x, &slope);
    const double err = p - target_power;
    if (std::abs(err) < best_err) {
      best_err = std::abs(err);
      best_x = x;
    }
    if (std::abs(err) <= tol) return x;
    if (err < 0.0) {
      if (x >= a_max) return std::nullopt;
      lo = x;
    } else {
      hi = x;
      bracketed = true;
    }
    double next = (slope > 0.0) ? x - err / slope : std::numeric_limits<double>::quiet_NaN();
    if (!bracketed) {
      if (!(next > lo)) {
        next = lo + width;
        width *= 2.0;
      }
      next = std::min(next, a_max);
    } else if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
    }
    if (next == x || (bracketed && hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x))) break;
    x = next;
  }
  // Bracket exhausted at machine precision; accept if within 1e-10.
  if (best_err <= 1e-10 * target_power) return best_x;
  return std::nullopt;
}

std::optional<TrigPolyCoeffs> solve_water_level(std::span<const Complex> off_lags,
                                                const SampledSpectrum& h2, double n0,
                                                double target_power,
                                                const WaterLevelOptions& options) {
  WaterLevelSolver solver(off_lags, h2, n0, options);
  const auto a0 = solver.solve(target_power);
  if (!a0) return std::nullopt;
  return TrigPolyCoeffs{*a0, std::vector<Complex>(off_lags.begin(), off_lags.end())};
}

}  // namespace csopt
