#include "core/ftn.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "core/shortening.hpp"

namespace csopt {

FtnScenario::FtnScenario(double w, double t, double noise) : bandwidth(w), symbol_time(t), n0(noise) {
  if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("bandwidth W must be positive");
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("symbol time T must be positive");
  if (!(noise > 0.0)) throw DomainError("noise variance N0 must be positive");
}

SampledSpectrum brickwall_spectrum(double product, const FrequencyGrid& grid) {
  if (!(product > 0.0)) throw DomainError("time-bandwidth product 2WT must be positive");
  std::vector<double> values(grid.size(), 1.0);
  if (product < 1.0) {
    const double edge = product * kPi;
    for (std::size_t m = 0; m < values.size(); ++m) {
      // Closed edge with a relative slack of a few ulps for nodes on the boundary.
      values[m] = std::abs(grid.node(m)) <= edge * (1.0 + 1e-12) ? 1.0 : 0.0;
    }
  }
  return SampledSpectrum(grid, std::move(values));
}

double PulseDesign::continuous_spectrum(double f) const {
  const double omega = kTwoPi * symbol_time * f;
  if (omega < -kPi || omega > kPi) return 0.0;
  const auto& grid = discrete_spectrum.grid();
  const double pos = (omega + kPi) / grid.step();
  auto i0 = static_cast<std::size_t>(std::floor(pos));
  if (i0 >= grid.size()) i0 = grid.size() - 1;
  const double frac = pos - static_cast<double>(i0);
  const std::size_t i1 = (i0 + 1) % grid.size();
  return symbol_time * ((1.0 - frac) * discrete_spectrum[i0] + frac * discrete_spectrum[i1]);
}

PulseDesign optimize_pulse(const FtnScenario& scenario, int memory, const OptimizerOptions& options,
                           const FrequencyGrid& grid, const PulseOptions& pulse,
                           std::span<const std::vector<double>> warm_starts) {
  if (memory < 0) throw DomainError("receiver memory L must be nonnegative");
  grid.require_alias_free(0, memory);
  const double product = scenario.product();
  const auto h2 = brickwall_spectrum(product, grid);
  const double n0 = scenario.n0;

  PulseDesign design{product, scenario.symbol_time, SampledSpectrum::constant(grid, 1.0),
                     OptimizedFilter{TrigPolyCoeffs{}, SampledSpectrum::constant(grid, 1.0), 0.0,
                                     ShorteningSolution{}, true, 0, kTwoPi, 1.0, true, {}, 0, 0.0},
                     0.0, 0.0, false};
  if (product >= 1.0 && pulse.flat_shortcut) {
    auto& f = design.filter;
    const double root = (1.0 + n0) / n0;
    f.coeffs.zero_lag = root * root;
    f.coeffs.off_lags.assign(static_cast<std::size_t>(memory), Complex{});
    f.coeff_scale = f.coeffs.zero_lag;
    f.search_point.assign(static_cast<std::size_t>(memory), 0.0);
    f.receiver = solve_shortening(ShorteningProblem(h2, n0, memory));
    f.air = f.receiver.air;
    f.flat_air = f.air;
    design.flat_shortcut = true;
  } else {
    design.filter = optimize_transmit_spectrum(h2, n0, memory, true, options, warm_starts);
    design.discrete_spectrum = design.filter.spectrum;
  }
  design.air = design.filter.air;
  design.ase = spectral_efficiency(design.air, product);
  return design;
}

double raised_cosine(double f, double alpha, double t0) {
  const double a = std::abs(f);
  const double inner = (1.0 - alpha) / (2.0 * t0);
  const double outer = (1.0 + alpha) / (2.0 * t0);
  if (alpha == 0.0 && a == outer) return 0.5 * t0;
  if (a <= inner) return t0;
  if (a > outer) return 0.0;
  return 0.5 * t0 * (1.0 + std::cos(kPi * t0 / alpha * (a - inner)));
}

SampledSpectrum rrc_folded_spectrum(double alpha, const FtnScenario& scenario, const FrequencyGrid& grid) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("roll-off alpha must lie in [0, 1]");
  const double t = scenario.symbol_time;
  const double t0 = (1.0 + alpha) / (2.0 * scenario.bandwidth);
  if ((1.0 + alpha) / (2.0 * t0) > 1.5 / t) {
    throw DomainError("RRC bandwidth exceeds 1.5 / T; folding terms k in {-1, 0, 1} are insufficient");
  }
  std::vector<double> values(grid.size());
  for (std::size_t m = 0; m < values.size(); ++m) {
    const double f = grid.node(m) / (kTwoPi * t);
    double acc = 0.0;
    for (int k = -1; k <= 1; ++k) acc += raised_cosine(f - k / t, alpha, t0);
    values[m] = acc / t;
  }
  // The rectangle rule on a finite grid is not exact for the RC roll-off;
  // rescale to unit energy.
  const double mean = grid_mean(values);
  for (auto& v : values) v /= mean;
  return SampledSpectrum(grid, std::move(values));
}

PulseTaps pulse_time_domain(const PulseDesign& design, Window window, int num_taps, double kaiser_beta,
                            int oversampling) {
  if (num_taps < 1 || num_taps % 2 == 0) throw DomainError("num_taps must be odd and >= 1");
  if (oversampling < 1) throw DomainError("oversampling must be >= 1");
  const auto& sp = design.discrete_spectrum;
  const auto& grid = sp.grid();
  const double t = design.symbol_time;
  const int half = (num_taps - 1) / 2;

  std::vector<double> root(grid.size());
  for (std::size_t m = 0; m < root.size(); ++m) root[m] = std::sqrt(sp[m]);

  PulseTaps out;
  out.sample_period = t / oversampling;
  const double i0_beta = std::cyl_bessel_i(0.0, kaiser_beta);
  for (int n = -half; n <= half; ++n) {
    const double x = static_cast<double>(n) / oversampling;
    Complex acc{};
    for (std::size_t m = 0; m < root.size(); ++m) acc += root[m] * std::polar(1.0, grid.node(m) * x);
    // p~(t) = (1 / (2 pi T)) int sqrt(T S(omega)) e^{j omega t / T} d omega
    acc *= 1.0 / (std::sqrt(t) * static_cast<double>(root.size()));
    double w = 1.0;
    if (window == Window::Kaiser && half > 0) {
      const double r = static_cast<double>(n) / half;
      w = std::cyl_bessel_i(0.0, kaiser_beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    }
    out.times.push_back(n * out.sample_period);
    out.amplitudes.push_back(acc * w);
  }

  const double w = 0.5 * design.product / t;
  out.leakage = 1.0 - band_energy_fraction(out, w);
  out.stopband_leakage = 1.0 - band_energy_fraction(out, kStopbandEdge * w);
  return out;
}

double band_energy_fraction(const PulseTaps& taps, double edge) {
  // int_{-edge}^{edge} |Pa(f)|^2 df in closed form over one period of Pa.
  const double ts = taps.sample_period;
  const double w = std::min(edge, 0.5 / ts);
  double total = 0.0;
  for (const auto& a : taps.amplitudes) total += std::norm(a);
  total *= ts;
  if (!(total > 0.0)) return 1.0;
  double in_band = 0.0;
  const auto count = taps.amplitudes.size();
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t k = 0; k < count; ++k) {
      const double x = 2.0 * w * (static_cast<double>(i) - static_cast<double>(k)) * ts;
      const double sinc = x == 0.0 ? 1.0 : std::sin(kPi * x) / (kPi * x);
      in_band += (taps.amplitudes[i] * std::conj(taps.amplitudes[k])).real() * 2.0 * w * sinc;
    }
  }
  return std::clamp(in_band * ts * ts / total, 0.0, 1.0);
}

double pulse_taps_spectrum(const PulseTaps& taps, double f) {
  Complex acc{};
  for (std::size_t i = 0; i < taps.amplitudes.size(); ++i) {
    acc += taps.amplitudes[i] * std::polar(1.0, -kTwoPi * f * taps.times[i]);
  }
  return std::norm(acc * taps.sample_period);
}

double ebn0_db(double air, double n0) {
  if (!(air > 0.0)) throw DomainError("Eb/N0 needs a positive information rate");
  if (!(n0 > 0.0)) throw DomainError("noise variance N0 must be positive");
  return -10.0 * std::log10(air * n0);
}

double spectral_efficiency(double air, double product) { return 2.0 * air / product; }

double awgn_ase_bound(double ebn0_db_value) {
  const double e = std::pow(10.0, ebn0_db_value / 10.0);
  auto gap = [e](double eta) { return 2.0 * std::log2(1.0 + eta * e / 2.0) - eta; };
  double lo = 1e-12;
  if (!(gap(lo) > 0.0)) return 0.0;
  double hi = 1.0;
  while (gap(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace csopt
