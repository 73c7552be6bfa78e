#include "core/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace csopt {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

struct Counter {
  const Objective& f;
  int evaluations = 0;

  double operator()(std::span<const double> x) {
    ++evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  }
};

// One simplex run. Returns true when the tolerances were met.
bool run_simplex(Counter& eval, std::vector<double>& best_x, double& best_f, const NelderMeadOptions& opt,
                 int& iterations) {
  const std::size_t n = best_x.size();
  std::vector<std::vector<double>> pts(n + 1, best_x);
  std::vector<double> vals(n + 1, best_f);
  for (std::size_t i = 0; i < n; ++i) {
    const double step = best_x[i] != 0.0 ? opt.initial_step * std::max(1.0, std::abs(best_x[i])) : opt.initial_step;
    pts[i + 1][i] += step;
    vals[i + 1] = eval(pts[i + 1]);
  }

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  bool converged = false;
  while (iterations < opt.max_iterations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t lo = order.front();
    const std::size_t hi = order.back();
    const std::size_t second = order[n - 1];

    double diameter = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t d = 0; d < n; ++d) diameter = std::max(diameter, std::abs(pts[i][d] - pts[lo][d]));
    }
    const double spread = vals[hi] - vals[lo];
    if (diameter <= opt.x_tolerance && spread <= opt.f_tolerance * std::max(1.0, std::abs(vals[lo]))) {
      converged = true;
      break;
    }
    ++iterations;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == hi) continue;
      for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[i][d];
    }
    for (auto& c : centroid) c /= static_cast<double>(n);

    for (std::size_t d = 0; d < n; ++d) trial[d] = centroid[d] + kReflect * (centroid[d] - pts[hi][d]);
    const double fr = eval(trial);
    if (fr < vals[lo]) {
      for (std::size_t d = 0; d < n; ++d) trial2[d] = centroid[d] + kExpand * (trial[d] - centroid[d]);
      const double fe = eval(trial2);
      if (fe < fr) {
        pts[hi] = trial2;
        vals[hi] = fe;
      } else {
        pts[hi] = trial;
        vals[hi] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[hi] = trial;
      vals[hi] = fr;
      continue;
    }
    const bool outside = fr < vals[hi];
    for (std::size_t d = 0; d < n; ++d) {
      trial2[d] = outside ? centroid[d] + kContract * (trial[d] - centroid[d])
                          : centroid[d] + kContract * (pts[hi][d] - centroid[d]);
    }
    const double fc = eval(trial2);
    if (fc < (outside ? fr : vals[hi])) {
      pts[hi] = trial2;
      vals[hi] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == lo) continue;
      for (std::size_t d = 0; d < n; ++d) pts[i][d] = pts[lo][d] + kShrink * (pts[i][d] - pts[lo][d]);
      vals[i] = eval(pts[i]);
    }
  }

  const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  if (vals[best] < best_f) {
    best_f = vals[best];
    best_x = pts[best];
  }
  return converged;
}

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> start, const NelderMeadOptions& options) {
  Counter eval{f};
  NelderMeadResult out;
  out.x = std::move(start);
  out.value = eval(out.x);
  if (out.x.empty()) {
    out.converged = std::isfinite(out.value);
    out.evaluations = eval.evaluations;
    return out;
  }

  out.converged = run_simplex(eval, out.x, out.value, options, out.iterations);
  for (int round = 0; round < options.polish_rounds && out.iterations < options.max_iterations; ++round) {
    const double before = out.value;
    NelderMeadOptions polish = options;
    polish.initial_step = std::max(options.initial_step * 0.01, 100.0 * options.x_tolerance);
    out.converged = run_simplex(eval, out.x, out.value, polish, out.iterations);
    if (!(out.value < before)) break;
  }
  out.evaluations = eval.evaluations;
  return out;
}

}  // namespace csopt
