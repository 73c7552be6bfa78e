#pragma once

// Capacity-achieving waterfilling spectra and the effective memory of a
// combined channel.

#include <span>
#include <vector>

#include "core/spectral.hpp"

namespace csopt {

struct WaterfillSolution {
  double theta = 0.0;
  SampledSpectrum spectrum;
  double capacity = 0.0;  ///< bits per channel use
};

/// S_p = max(0, theta - N0 / H2) with power 2 pi.
WaterfillSolution waterfill(const SampledSpectrum& h2, double n0);

struct JointWaterfillSolution {
  double theta = 0.0;
  std::vector<SampledSpectrum> spectra;
  std::vector<double> powers;  ///< per-subchannel power, summing to 2 pi N
  double capacity = 0.0;       ///< sum over subchannels, bits per channel use
};

/// One water level across N parallel gains with pooled power 2 pi N.
JointWaterfillSolution waterfill_joint(std::span<const SampledSpectrum> gains, double n0);

/// Lags r_l = (1/M) sum_m Sv(omega_m) e^{j l omega_m} for l = 0..max_lag.
std::vector<Complex> spectrum_lags(const SampledSpectrum& sv, int max_lag);

/// Largest lag l <= M/2 with |r_l| > threshold_rel * r_0 for Sv = |H|^2 S_p.
int combined_memory(const ChannelTaps& h, const SampledSpectrum& sp, double threshold_rel = 1e-6);

}  // namespace csopt
