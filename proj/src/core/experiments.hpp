#pragma once

// Experiment orchestration: single-operation commands and figure sweeps.

#include <vector>

#include "core/experiment_config.hpp"
#include "core/mimo.hpp"
#include "core/report.hpp"
#include "core/transmit_optimizer.hpp"

namespace csopt {

/// snr_db = -10 log10 N0.
double n0_from_snr_db(double snr_db);

/// Scalar channel from the config, tap-normalized when cfg.normalize is set.
ChannelTaps config_channel(const ExperimentConfig& cfg);

/// MIMO channel from explicit taps or the seeded random generator.
MimoChannelTaps config_mimo_channel(const ExperimentConfig& cfg);

/// Optimizer options with the experiment seed and thread count applied.
OptimizerOptions config_optimizer(const ExperimentConfig& cfg);

/// Optimized filters for every (snr, L) point, row-major in snr. Each point is
/// warm-started from the previous SNR at the same L and from the padded
/// result of the next smaller L at the same SNR.
std::vector<std::vector<OptimizedFilter>> optimize_sweep(const SampledSpectrum& h2, bool real_coefficients,
                                                         const std::vector<double>& n0s,
                                                         const std::vector<int>& memories,
                                                         const OptimizerOptions& options);

/// Validates and runs cfg.command.
Report run_experiment(const ExperimentConfig& cfg);

}  // namespace csopt
