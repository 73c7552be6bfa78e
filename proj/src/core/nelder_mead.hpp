#pragma once

#include <functional>
#include <span>
#include <vector>

namespace csopt {

struct NelderMeadOptions {
  int max_iterations = 2000;
  double x_tolerance = 1e-9;
  double f_tolerance = 1e-12;
  double initial_step = 0.1;
  /// Simplex rebuilds around the incumbent after convergence, kept while
  /// they still improve the objective.
  int polish_rounds = 3;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Minimizes f from `start`. Non-finite objective values are treated as +inf;
/// the start point itself is always evaluated, so the result never exceeds f(start).
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> start,
                             const NelderMeadOptions& options);

}  // namespace csopt
