#pragma once

// Experiment description: a flat key-value text format with [section]
// headers, '#' comments, comma-separated lists and start:step:stop ranges.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/air_sim.hpp"
#include "core/spectral.hpp"
#include "core/transmit_optimizer.hpp"

namespace csopt {

struct MimoSpec {
  std::size_t dim = 2;
  int channel_memory = 3;
  std::uint64_t channel_seed = 1;
  std::vector<Complex> taps;  ///< row-major N x N blocks, H_0 first; empty selects a random channel
};

struct FtnSpec {
  double product = 0.48;
  double symbol_time = 1.0;
  std::vector<double> alphas{0.1, 0.2};
  std::string input = "bpsk";  ///< gaussian | bpsk
  int num_taps = 257;
  std::string window = "kaiser";
  double kaiser_beta = 8.0;
  int oversampling = 1;
};

struct ExperimentConfig {
  std::string command;
  std::size_t grid_size = FrequencyGrid::kDefaultSize;
  std::uint64_t seed = 1;
  int threads = 1;
  bool normalize = true;
  bool spectra = false;  ///< also write per-point spectrum CSVs

  std::vector<Complex> taps;
  std::vector<double> snr_db;
  std::vector<int> memories;

  OptimizerOptions optimizer;
  MimoSpec mimo;
  FtnSpec ftn;

  SimConfig sim;
  int transmit_taps = 65;
  std::string alphabet = "bpsk";
  std::vector<std::string> filters{"optimized", "flat"};

  double memory_threshold = 1e-6;
};

inline const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> commands{"shorten", "optimize", "waterfill", "mimo", "ftn", "airsim",
                                                 "fig2",    "fig3",     "fig4",      "fig6", "fig7"};
  return commands;
}

/// Parses config text; errors carry "<source>:<line>:" prefixes.
ExperimentConfig parse_experiment_config(std::string_view text, std::string_view source = "config");

/// Semantic checks (command known, sweep nonempty, L >= 0, ...).
void validate(const ExperimentConfig& cfg);

/// Canonical key-value rendering of every setting that affects results
/// (the thread count does not).
std::string canonical_text(const ExperimentConfig& cfg);

/// "start:step:stop" or a single number, expanded inclusively.
std::vector<double> parse_number_list(std::string_view text);

/// Whitespace-separated "re,im" pairs (a bare number is a real tap).
std::vector<Complex> parse_complex_list(std::string_view text);

}  // namespace csopt
