#include "core/air_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace csopt {

namespace {

constexpr std::size_t kMaxStates = 4096;

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

}  // namespace

Alphabet::Alphabet(std::vector<Complex> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw DomainError("alphabet needs at least two points");
  double energy = 0.0;
  for (const auto& p : points_) energy += std::norm(p);
  energy /= static_cast<double>(points_.size());
  if (std::abs(energy - 1.0) > 1e-12) {
    throw DomainError("alphabet must have unit average energy, got " + std::to_string(energy));
  }
}

Alphabet Alphabet::bpsk() { return Alphabet({Complex(1.0, 0.0), Complex(-1.0, 0.0)}); }

Alphabet Alphabet::qpsk() {
  const double a = std::sqrt(0.5);
  return Alphabet({Complex(a, a), Complex(-a, a), Complex(-a, -a), Complex(a, -a)});
}

TimeTaps transmit_taps(const SampledSpectrum& sp, int count) {
  if (count < 1 || count % 2 == 0) throw DomainError("transmit tap count must be odd and >= 1");
  const auto& grid = sp.grid();
  if (static_cast<std::size_t>(count) > grid.size()) {
    throw ConfigError("transmit taps (" + std::to_string(count) + ") exceed the grid size M = " +
                      std::to_string(grid.size()));
  }
  const int half = (count - 1) / 2;
  std::vector<double> root(sp.size());
  for (std::size_t m = 0; m < root.size(); ++m) root[m] = std::sqrt(sp[m]);
  TimeTaps p;
  p.start = -half;
  double energy = 0.0;
  for (int n = -half; n <= half; ++n) {
    const Complex c = fourier_coefficient(root, grid, n);
    p.taps.push_back(c);
    energy += std::norm(c);
  }
  if (!(energy > 0.0)) throw DomainError("transmit spectrum is identically zero");
  const double scale = 1.0 / std::sqrt(energy);
  for (auto& c : p.taps) c *= scale;
  return p;
}

TimeTaps convolve(const ChannelTaps& h, const TimeTaps& p) {
  const auto ht = h.taps();
  TimeTaps v;
  v.start = p.start;
  v.taps.assign(ht.size() + p.taps.size() - 1, Complex{});
  for (std::size_t i = 0; i < ht.size(); ++i) {
    for (std::size_t k = 0; k < p.taps.size(); ++k) v.taps[i + k] += ht[i] * p.taps[k];
  }
  return v;
}

std::vector<Complex> simulate_channel(std::span<const Complex> u, const TimeTaps& v, double n0,
                                      std::mt19937_64& rng) {
  if (!(n0 >= 0.0)) throw DomainError("noise variance N0 must be nonnegative");
  const int end = v.start + static_cast<int>(v.taps.size()) - 1;
  const auto length = u.size() + static_cast<std::size_t>(std::max(0, end));
  std::vector<Complex> y(length);
  const auto n = static_cast<long>(u.size());
  for (std::size_t k = 0; k < length; ++k) {
    Complex acc{};
    for (std::size_t i = 0; i < v.taps.size(); ++i) {
      const long idx = static_cast<long>(k) - v.start - static_cast<long>(i);
      if (idx >= 0 && idx < n) acc += v.taps[i] * u[static_cast<std::size_t>(idx)];
    }
    y[k] = acc;
  }
  if (n0 > 0.0) {
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * n0));
    for (auto& s : y) {
      const double re = normal(rng);
      const double im = normal(rng);
      s += Complex(re, im);
    }
  }
  return y;
}

FrontEnd design_frontend(std::span<const Complex> hr, const FrequencyGrid& grid, int taps) {
  if (taps < 1 || taps % 2 == 0) throw DomainError("front-end tap count must be odd and >= 1");
  if (hr.size() != grid.size()) throw DomainError("H^r must be sampled on the grid");
  if (static_cast<std::size_t>(taps) > grid.size()) {
    throw ConfigError("front-end taps (" + std::to_string(taps) + ") exceed the grid size M = " +
                      std::to_string(grid.size()));
  }
  const auto phasors = grid.phasors();
  const int half = (taps - 1) / 2;
  FrontEnd fe;
  double kept = 0.0;
  for (int n = -half; n <= half; ++n) {
    // f_n = (1/M) sum_m conj(H^r_m) e^{j n omega_m}
    Complex acc{};
    for (std::size_t m = 0; m < hr.size(); ++m) {
      acc += std::conj(hr[m]) * (n >= 0 ? std::pow(phasors[m], n) : std::conj(std::pow(phasors[m], -n)));
    }
    acc /= static_cast<double>(hr.size());
    fe.taps.push_back(acc);
    kept += std::norm(acc);
  }
  double total = 0.0;
  for (const auto& h : hr) total += std::norm(h);
  total /= static_cast<double>(hr.size());
  fe.truncation_loss = total > 0.0 ? std::max(0.0, 1.0 - kept / total) : 0.0;
  fe.truncation_warning = fe.truncation_loss > 1e-2;
  return fe;
}

std::vector<Complex> frontend_filter(std::span<const Complex> y, const FrontEnd& fe) {
  const long half = static_cast<long>(fe.taps.size() - 1) / 2;
  const auto n = static_cast<long>(y.size());
  std::vector<Complex> z(y.size());
  for (long k = 0; k < n; ++k) {
    Complex acc{};
    const long lo = std::max(-half, k - n + 1);
    const long hi = std::min(half, k);
    for (long j = lo; j <= hi; ++j) acc += fe.taps[static_cast<std::size_t>(j + half)] * y[static_cast<std::size_t>(k - j)];
    z[static_cast<std::size_t>(k)] = acc;
  }
  return z;
}

ShorteningSolution receiver_for_taps(const TimeTaps& v, double n0, int memory, const FrequencyGrid& grid) {
  grid.require_alias_free(static_cast<int>(v.taps.size()) - 1, memory);
  const auto response = v.response(grid);
  std::vector<double> sv(grid.size());
  for (std::size_t m = 0; m < sv.size(); ++m) sv[m] = std::norm(response[m]);
  auto sol = solve_shortening(ShorteningProblem(SampledSpectrum(grid, std::move(sv)), n0, memory));
  sol.hr = shortener_response(sol, response, n0);
  return sol;
}

double branch_metric(Complex u, Complex z, std::span<const Complex> gr_lags, std::span<const Complex> past) {
  Complex isi{};
  for (std::size_t l = 1; l < gr_lags.size() && l <= past.size(); ++l) isi += gr_lags[l] * past[l - 1];
  return 2.0 * (std::conj(u) * (z - isi)).real() - std::norm(u) * gr_lags[0].real();
}

void validate(const SimConfig& cfg, int memory) {
  if (cfg.num_blocks < 1) throw ConfigError("num_blocks must be >= 1");
  if (cfg.num_symbols < 100 * std::max(memory, 1)) {
    throw ConfigError("num_symbols must be >= 100 L (got " + std::to_string(cfg.num_symbols) + ")");
  }
  if (cfg.guard < 0 || 2 * cfg.guard >= cfg.num_symbols) throw ConfigError("guard must satisfy 0 <= 2 guard < N");
  if (cfg.frontend_taps < 1 || cfg.frontend_taps % 2 == 0) throw ConfigError("frontend_taps must be odd and >= 1");
}

AirEstimate mismatched_air_estimate(const Alphabet& alphabet, const TimeTaps& v, double n0,
                                    const ShorteningSolution& receiver, const FrontEnd& frontend,
                                    const SimConfig& cfg) {
  const int memory = receiver.memory;
  validate(cfg, memory);
  const std::size_t u_size = alphabet.size();
  std::size_t states = 1;
  for (int l = 0; l < memory; ++l) {
    states *= u_size;
    if (states > kMaxStates) {
      throw ConfigError("trellis has more than 4096 states (U^L); reduce L or the alphabet size");
    }
  }
  const auto points = alphabet.points();
  const auto& g = receiver.gr_lags;
  const double g0 = g.front().real();

  // Interference term sum_l g_l u_{k-l} per state; state digit l-1 is u_{k-l}.
  std::vector<Complex> isi(states);
  for (std::size_t s = 0; s < states; ++s) {
    std::size_t rest = s;
    Complex acc{};
    for (int l = 1; l <= memory; ++l) {
      acc += g[static_cast<std::size_t>(l)] * points[rest % u_size];
      rest /= u_size;
    }
    isi[s] = acc;
  }
  const std::size_t shift_mod = states / u_size;  // U^{L-1}, or 0 for L = 0
  const double log_u = std::log(static_cast<double>(u_size));
  const int n_sym = cfg.num_symbols;

  std::vector<double> rates(static_cast<std::size_t>(cfg.num_blocks));
  parallel_for(rates.size(), cfg.threads, [&](std::size_t block) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.rng_seed & 0xffffffffu),
                      static_cast<std::uint32_t>(cfg.rng_seed >> 32), static_cast<std::uint32_t>(block)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> pick(0, u_size - 1);
    std::vector<std::size_t> idx(static_cast<std::size_t>(n_sym));
    std::vector<Complex> u(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      idx[k] = pick(rng);
      u[k] = points[idx[k]];
    }
    const auto y = simulate_channel(u, v, n0, rng);
    const auto z = frontend_filter(y, frontend);

    std::vector<double> alpha(states, -std::log(static_cast<double>(states)));
    std::vector<double> next(states);
    std::vector<double> branch(states * u_size);
    std::vector<Complex> past(static_cast<std::size_t>(memory));
    double acc = 0.0;
    for (int k = 0; k < n_sym; ++k) {
      const Complex zk = z[static_cast<std::size_t>(k)];
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < states; ++s) {
        const Complex resid = zk - isi[s];
        for (std::size_t a = 0; a < u_size; ++a) {
          const double w = alpha[s] - log_u + 2.0 * (std::conj(points[a]) * resid).real() - std::norm(points[a]) * g0;
          branch[s * u_size + a] = w;
          top = std::max(top, w);
        }
      }
      if (!std::isfinite(top)) {
        throw NumericalError("trellis recursion produced non-finite values at symbol " + std::to_string(k) +
                             "; avoid extreme N0 or shorten the block");
      }
      std::fill(next.begin(), next.end(), 0.0);
      for (std::size_t s = 0; s < states; ++s) {
        const std::size_t base = shift_mod == 0 ? 0 : u_size * (s % shift_mod);
        for (std::size_t a = 0; a < u_size; ++a) {
          next[shift_mod == 0 ? 0 : base + a] += std::exp(branch[s * u_size + a] - top);
        }
      }
      double total = 0.0;
      for (double x : next) total += x;
      const double log_lambda = top + std::log(total);
      for (std::size_t s = 0; s < states; ++s) alpha[s] = std::log(next[s] / total);

      for (int l = 1; l <= memory; ++l) {
        const int j = k - l;
        past[static_cast<std::size_t>(l - 1)] = j >= 0 ? u[static_cast<std::size_t>(j)] : Complex{};
      }
      const double metric_true = branch_metric(u[static_cast<std::size_t>(k)], zk, g, past);
      if (k >= cfg.guard && k < n_sym - cfg.guard) acc += metric_true - log_lambda;
    }
    rates[block] = acc / (static_cast<double>(n_sym - 2 * cfg.guard) * std::log(2.0));
  });

  AirEstimate est;
  est.block_rates = rates;
  double mean = 0.0;
  for (double r : rates) mean += r;
  mean /= static_cast<double>(rates.size());
  double var = 0.0;
  for (double r : rates) var += (r - mean) * (r - mean);
  est.air = mean;
  if (rates.size() > 1) est.stderr_bits = std::sqrt(var / static_cast<double>(rates.size() - 1) / static_cast<double>(rates.size()));
  est.truncation_loss = frontend.truncation_loss;
  est.truncation_warning = frontend.truncation_warning;
  if (!std::isfinite(est.air)) throw NumericalError("simulated information rate is not finite");
  return est;
}

AirEstimate simulate_shortened_rate(const Alphabet& alphabet, const TimeTaps& v, double n0, int memory,
                                    const SimConfig& cfg, const FrequencyGrid& grid) {
  const auto receiver = receiver_for_taps(v, n0, memory, grid);
  const auto fe = design_frontend(receiver.hr, grid, cfg.frontend_taps);
  return mismatched_air_estimate(alphabet, v, n0, receiver, fe, cfg);
}

double bpsk_awgn_rate(double n0) {
  if (!(n0 > 0.0)) throw DomainError("noise variance N0 must be positive");
  // y = 1 + n, n ~ N(0, N0/2); I = 1 - E[log2(1 + e^{-4y/N0})].
  const double sigma = std::sqrt(0.5 * n0);
  const int count = 20000;
  const double lo = 1.0 - 12.0 * sigma;
  const double hi = 1.0 + 12.0 * sigma;
  const double h = (hi - lo) / count;
  double acc = 0.0;
  for (int i = 0; i <= count; ++i) {
    const double y = lo + h * i;
    const double pdf = std::exp(-0.5 * (y - 1.0) * (y - 1.0) / (sigma * sigma)) / (sigma * std::sqrt(kTwoPi));
    const double w = (i == 0 || i == count) ? 0.5 : 1.0;
    acc += w * pdf * softplus(-4.0 * y / n0);
  }
  return 1.0 - acc * h / std::log(2.0);
}

}  // namespace csopt
