#pragma once

// Closed-form information-rate-optimal channel-shortening receiver for
// Gaussian inputs, given the combined power spectrum |V(omega)|^2 and the
// noise variance. All quantities except the shortener H^r depend on |V|^2
// only; H^r additionally needs the phase of V.

#include <span>
#include <vector>

#include "core/spectral.hpp"

namespace csopt {

struct ShorteningProblem {
  SampledSpectrum sv;  ///< |V(omega)|^2
  double n0 = 1.0;
  int memory = 0;      ///< receiver memory L

  ShorteningProblem(SampledSpectrum sv_, double n0_, int memory_);
};

struct ShorteningSolution {
  int memory = 0;
  std::vector<Complex> b;           ///< b_0..b_L
  double c = 1.0;
  std::vector<Complex> seed_taps;   ///< u_0..u_L, U(omega) = sum u_k e^{-jk omega}
  std::vector<double> gr;           ///< G^r(omega_m) = |U|^2 - 1 (may be negative)
  std::vector<Complex> gr_lags;     ///< g^r_0..g^r_L, G^r(omega) = sum g^r_l e^{-jl omega}
  std::vector<Complex> hr;          ///< H^r(omega_m)
  double air = 0.0;                 ///< bits per channel use
  double condition_estimate = 1.0;  ///< upper bound on cond(B)
  bool dense_fallback = false;
};

inline constexpr double kMaxConditionEstimate = 1e12;

/// b_k = (1/M) sum_m y(omega_m) e^{j k omega_m}, y = N0 / (Sv + N0), k = 0..L.
std::vector<Complex> compute_b(const ShorteningProblem& problem);
std::vector<Complex> compute_b(std::span<const double> sv, const FrequencyGrid& grid, double n0, int memory);

/// Residual c alone, for Sv given as raw samples on `grid` (no validation).
/// Throws IllConditionedError under the same rule as the full solve.
double shortening_residual(std::span<const double> sv, const FrequencyGrid& grid, double n0, int memory);
double shortening_residual(std::span<const double> sv, const HarmonicTable& harmonics, double n0, int memory);

/// Full receiver with the zero-phase convention V = sqrt(Sv) for H^r.
ShorteningSolution solve_shortening(const ShorteningProblem& problem);

/// Receiver quantities without H^r, for tight optimization loops.
ShorteningSolution solve_shortening_rate_only(const ShorteningProblem& problem);

/// H^r(omega) = V(omega) (G^r(omega) + 1) / (|V(omega)|^2 + N0) for an explicit V.
std::vector<Complex> shortener_response(const ShorteningSolution& solution,
                                        std::span<const Complex> v_response, double n0);

/// -log2 c; c outside (0, 1] is a domain error. c is clamped at 1e-300.
double air_gaussian(double c);

/// (1/M) sum_m log2(1 + Sv / N0): the matched Gaussian rate of an unconstrained receiver.
double matched_gaussian_rate(const SampledSpectrum& sv, double n0);

}  // namespace csopt
