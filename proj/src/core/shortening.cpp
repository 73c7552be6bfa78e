#include "core/shortening.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/error.hpp"
#include "core/toeplitz.hpp"

namespace csopt {

ShorteningProblem::ShorteningProblem(SampledSpectrum sv_, double n0_, int memory_)
    : sv(std::move(sv_)), n0(n0_), memory(memory_) {
  if (!(n0 > 0.0) || !std::isfinite(n0)) throw DomainError("noise variance N0 must be positive");
  if (memory < 0) throw DomainError("receiver memory L must be nonnegative");
  sv.grid().require_alias_free(0, memory);
}

std::vector<Complex> compute_b(std::span<const double> values, const FrequencyGrid& grid, double n0,
                               int memory) {
  const auto phasors = grid.phasors();
  const std::size_t size = values.size();
  const auto count = static_cast<std::size_t>(memory + 1);
  std::vector<double> y(size);
  double sum = 0.0;
  for (std::size_t m = 0; m < size; ++m) {
    y[m] = n0 / (values[m] + n0);
    sum += y[m];
  }
  std::vector<Complex> b(count);
  b[0] = sum;
  for (std::size_t k = 1; k < count; ++k) {
    // e^{j k omega_m} = (-1)^(k+1) phasors[m k mod M] on this grid.
    // Two interleaved partial sums; the grid size is even.
    double re[2] = {0.0, 0.0};
    double im[2] = {0.0, 0.0};
    std::size_t idx = 0;
    for (std::size_t m = 0; m < size; m += 2) {
      re[0] += y[m] * phasors[idx].real();
      im[0] += y[m] * phasors[idx].imag();
      idx += k;
      if (idx >= size) idx -= size;
      re[1] += y[m + 1] * phasors[idx].real();
      im[1] += y[m + 1] * phasors[idx].imag();
      idx += k;
      if (idx >= size) idx -= size;
    }
    b[k] = (k % 2 == 1 ? 1.0 : -1.0) * Complex(re[0] + re[1], im[0] + im[1]);
  }
  const double inv_m = 1.0 / static_cast<double>(size);
  for (auto& v : b) v *= inv_m;
  return b;
}

std::vector<Complex> compute_b(const ShorteningProblem& problem) {
  return compute_b(problem.sv.values(), problem.sv.grid(), problem.n0, problem.memory);
}

namespace {

double condition_estimate(std::span<const double> values, double n0) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  // Eigenvalues of B lie in [min y, max y].
  const double cond = (*hi + n0) / (*lo + n0);
  if (!(cond <= kMaxConditionEstimate)) {
    throw IllConditionedError("Toeplitz matrix B is numerically singular (condition estimate " +
                              std::to_string(cond) +
                              "); use a larger grid size M or a smaller memory L");
  }
  return cond;
}

std::vector<Complex> compute_b(std::span<const double> values, const HarmonicTable& harmonics, double n0,
                               int memory) {
  const std::size_t size = values.size();
  if (harmonics.size() != size || harmonics.degree() < memory) {
    throw DomainError("harmonic table does not cover the shortening lags");
  }
  std::vector<double> y(size);
  double sum = 0.0;
  for (std::size_t m = 0; m < size; ++m) {
    y[m] = n0 / (values[m] + n0);
    sum += y[m];
  }
  std::vector<Complex> b(static_cast<std::size_t>(memory + 1));
  b[0] = sum;
  for (int k = 1; k <= memory; ++k) {
    const auto c = harmonics.cos(k);
    const auto s = harmonics.sin(k);
    double re[2] = {0.0, 0.0};
    double im[2] = {0.0, 0.0};
    for (std::size_t m = 0; m < size; m += 2) {
      re[0] += y[m] * c[m];
      im[0] += y[m] * s[m];
      re[1] += y[m + 1] * c[m + 1];
      im[1] += y[m + 1] * s[m + 1];
    }
    b[static_cast<std::size_t>(k)] = Complex(re[0] + re[1], im[0] + im[1]);
  }
  const double inv_m = 1.0 / static_cast<double>(size);
  for (auto& v : b) v *= inv_m;
  return b;
}

}  // namespace

double shortening_residual(std::span<const double> sv, const HarmonicTable& harmonics, double n0, int memory) {
  condition_estimate(sv, n0);
  const auto pred = levinson_predictor(compute_b(sv, harmonics, n0, memory));
  return std::clamp(pred.residual, 1e-300, 1.0);
}

double shortening_residual(std::span<const double> sv, const FrequencyGrid& grid, double n0, int memory) {
  condition_estimate(sv, n0);
  const auto pred = levinson_predictor(compute_b(sv, grid, n0, memory));
  return std::clamp(pred.residual, 1e-300, 1.0);
}

double air_gaussian(double c) {
  if (!(c > 0.0) || c > 1.0) {
    throw DomainError("prediction residual c must lie in (0, 1], got " + std::to_string(c));
  }
  return -std::log2(std::clamp(c, 1e-300, 1.0));
}

ShorteningSolution solve_shortening_rate_only(const ShorteningProblem& problem) {
  const double cond = condition_estimate(problem.sv.values(), problem.n0);

  ShorteningSolution sol;
  sol.memory = problem.memory;
  sol.condition_estimate = cond;
  sol.b = compute_b(problem);
  const auto pred = levinson_predictor(sol.b);
  sol.dense_fallback = pred.dense_fallback;
  sol.c = std::clamp(pred.residual, 1e-300, 1.0);
  sol.air = air_gaussian(sol.c);

  const double inv_root = 1.0 / std::sqrt(sol.c);
  sol.seed_taps.resize(pred.coeffs.size());
  for (std::size_t k = 0; k < pred.coeffs.size(); ++k) sol.seed_taps[k] = pred.coeffs[k] * inv_root;

  const int L = problem.memory;
  sol.gr_lags.assign(static_cast<std::size_t>(L + 1), Complex{});
  for (int lag = 0; lag <= L; ++lag) {
    Complex acc{};
    for (int k = lag; k <= L; ++k) {
      acc += sol.seed_taps[static_cast<std::size_t>(k)] * std::conj(sol.seed_taps[static_cast<std::size_t>(k - lag)]);
    }
    sol.gr_lags[static_cast<std::size_t>(lag)] = acc;
  }
  sol.gr_lags[0] = Complex(sol.gr_lags[0].real() - 1.0, 0.0);
  return sol;
}

ShorteningSolution solve_shortening(const ShorteningProblem& problem) {
  auto sol = solve_shortening_rate_only(problem);
  const auto& grid = problem.sv.grid();
  const auto u_response = dtft(sol.seed_taps, grid);
  sol.gr.resize(grid.size());
  for (std::size_t m = 0; m < grid.size(); ++m) sol.gr[m] = std::norm(u_response[m]) - 1.0;

  std::vector<Complex> v(grid.size());
  for (std::size_t m = 0; m < grid.size(); ++m) v[m] = std::sqrt(problem.sv[m]);
  sol.hr = shortener_response(sol, v, problem.n0);
  return sol;
}

std::vector<Complex> shortener_response(const ShorteningSolution& solution,
                                        std::span<const Complex> v_response, double n0) {
  if (solution.gr.size() != v_response.size()) {
    throw DomainError("shortener synthesis needs V on the same grid as G^r");
  }
  std::vector<Complex> hr(v_response.size());
  for (std::size_t m = 0; m < hr.size(); ++m) {
    hr[m] = v_response[m] * (solution.gr[m] + 1.0) / (std::norm(v_response[m]) + n0);
  }
  return hr;
}

double matched_gaussian_rate(const SampledSpectrum& sv, double n0) {
  double acc = 0.0;
  for (double v : sv.values()) acc += std::log2(1.0 + v / n0);
  return acc / static_cast<double>(sv.size());
}

}  // namespace csopt
