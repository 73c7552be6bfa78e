#pragma once

// Shaping-pulse design for the bandlimited AWGN channel, including
// faster-than-Nyquist operating points (2WT < 1).

#include <span>
#include <string>
#include <vector>

#include "core/spectral.hpp"
#include "core/transmit_optimizer.hpp"

namespace csopt {

struct FtnScenario {
  double bandwidth = 0.5;    ///< W, one-sided, Hz
  double symbol_time = 1.0;  ///< T, s
  double n0 = 1.0;

  FtnScenario(double w, double t, double noise);
  double product() const { return 2.0 * bandwidth * symbol_time; }
  bool faster_than_nyquist() const { return product() < 1.0; }
};

/// H2 = 1 on |omega| <= 2 W T pi (closed), 0 elsewhere; H2 = 1 for 2WT >= 1.
SampledSpectrum brickwall_spectrum(double product, const FrequencyGrid& grid);

struct PulseDesign {
  double product = 1.0;
  double symbol_time = 1.0;
  SampledSpectrum discrete_spectrum;  ///< |P(omega)|^2 on [-pi, pi)
  OptimizedFilter filter;
  double air = 0.0;
  double ase = 0.0;  ///< air / (W T)
  bool flat_shortcut = false;

  /// |P~(f)|^2 = T |P(2 pi T f)|^2, linear interpolation between nodes.
  double continuous_spectrum(double f) const;
};

struct PulseOptions {
  /// Accept the flat spectrum without searching when 2WT >= 1.
  bool flat_shortcut = true;
};

PulseDesign optimize_pulse(const FtnScenario& scenario, int memory, const OptimizerOptions& options,
                           const FrequencyGrid& grid = FrequencyGrid(), const PulseOptions& pulse = {},
                           std::span<const std::vector<double>> warm_starts = {});

/// Raised-cosine spectrum with unit energy, roll-off alpha, period T0.
double raised_cosine(double f, double alpha, double t0);

/// Folded |V(omega)|^2 of an RRC pulse with roll-off alpha occupying |f| <= W,
/// normalized to unit pulse energy (grid mean 1).
SampledSpectrum rrc_folded_spectrum(double alpha, const FtnScenario& scenario, const FrequencyGrid& grid);

enum class Window { Rectangular, Kaiser };

struct PulseTaps {
  std::vector<double> times;
  std::vector<Complex> amplitudes;  ///< samples of p~(t), windowed
  double sample_period = 1.0;
  double leakage = 0.0;           ///< energy outside |f| <= W over total
  double stopband_leakage = 0.0;  ///< energy outside |f| <= 1.05 W over total
};

inline constexpr double kStopbandEdge = 1.05;

/// Zero-phase inverse transform of sqrt(|P~(f)|^2), sampled at T / oversampling,
/// truncated to num_taps (odd) and windowed.
PulseTaps pulse_time_domain(const PulseDesign& design, Window window = Window::Kaiser, int num_taps = 257,
                            double kaiser_beta = 8.0, int oversampling = 1);

/// Fraction of the sampled pulse energy in |f| <= edge.
double band_energy_fraction(const PulseTaps& taps, double edge);

/// |Pa(f)|^2 of the sampled pulse, Pa(f) = Ts sum_n a_n e^{-j 2 pi f t_n}.
double pulse_taps_spectrum(const PulseTaps& taps, double f);

/// 10 log10(1 / (air N0)).
double ebn0_db(double air, double n0);

/// eta = air / (W T), with W T = product / 2.
double spectral_efficiency(double air, double product);

/// Largest eta with eta <= 2 log2(1 + eta Eb/N0 / 2); zero below the Shannon limit.
double awgn_ase_bound(double ebn0_db_value);

}  // namespace csopt
