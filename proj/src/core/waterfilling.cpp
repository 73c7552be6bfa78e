#include "core/waterfilling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/error.hpp"

namespace csopt {

namespace {

struct PowerAt {
  double power = 0.0;
  std::size_t active = 0;
};

PowerAt joint_power(std::span<const SampledSpectrum> gains, double n0, double theta) {
  PowerAt out;
  for (const auto& g : gains) {
    for (double v : g.values()) {
      if (v <= 0.0) continue;
      const double s = theta - n0 / v;
      if (s > 0.0) {
        out.power += s;
        ++out.active;
      }
    }
  }
  out.power *= gains.front().grid().step();
  return out;
}

}  // namespace

JointWaterfillSolution waterfill_joint(std::span<const SampledSpectrum> gains, double n0) {
  if (gains.empty()) throw DomainError("waterfilling needs at least one subchannel");
  if (!(n0 > 0.0)) throw DomainError("noise variance N0 must be positive");
  double g_max = 0.0;
  double g_min_pos = std::numeric_limits<double>::infinity();
  for (const auto& g : gains) {
    if (!(g.grid() == gains.front().grid())) throw DomainError("subchannel gains live on different grids");
    for (double v : g.values()) {
      if (v > 0.0) {
        g_max = std::max(g_max, v);
        g_min_pos = std::min(g_min_pos, v);
      }
    }
  }
  if (g_max <= 0.0) throw DomainError("channel gain is identically zero; waterfilling undefined");

  const double target = kTwoPi * static_cast<double>(gains.size());
  double lo = n0 / g_max;
  double hi = n0 / g_min_pos + kTwoPi;
  while (joint_power(gains, n0, hi).power < target) hi = lo + 2.0 * (hi - lo);
  for (int it = 0; it < 300 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (joint_power(gains, n0, mid).power < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double theta = 0.5 * (lo + hi);
  // Power is piecewise linear in theta; one secant step on the active set
  // removes the residual bisection error.
  const auto at = joint_power(gains, n0, theta);
  if (at.active > 0) theta += (target - at.power) / (gains.front().grid().step() * static_cast<double>(at.active));

  JointWaterfillSolution sol;
  sol.theta = theta;
  for (const auto& g : gains) {
    std::vector<double> s(g.size(), 0.0);
    double rate = 0.0;
    for (std::size_t m = 0; m < g.size(); ++m) {
      if (g[m] > 0.0) s[m] = std::max(0.0, theta - n0 / g[m]);
      rate += std::log2(1.0 + g[m] * s[m] / n0);
    }
    sol.capacity += rate / static_cast<double>(g.size());
    SampledSpectrum spec(g.grid(), std::move(s));
    sol.powers.push_back(spectrum_power(spec));
    sol.spectra.push_back(std::move(spec));
  }
  return sol;
}

WaterfillSolution waterfill(const SampledSpectrum& h2, double n0) {
  auto joint = waterfill_joint(std::span<const SampledSpectrum>(&h2, 1), n0);
  return WaterfillSolution{joint.theta, std::move(joint.spectra.front()), joint.capacity};
}

std::vector<Complex> spectrum_lags(const SampledSpectrum& sv, int max_lag) {
  const std::size_t m_size = sv.size();
  std::vector<Complex> table(m_size);
  for (std::size_t k = 0; k < m_size; ++k) {
    const double angle = kTwoPi * static_cast<double>(k) / static_cast<double>(m_size);
    table[k] = Complex(std::cos(angle), std::sin(angle));
  }
  const auto values = sv.values();
  std::vector<Complex> lags(static_cast<std::size_t>(max_lag + 1));
  for (int l = 0; l <= max_lag; ++l) {
    // e^{j l omega_m} = (-1)^l e^{j 2 pi l m / M}
    Complex acc{};
    const std::size_t stride = static_cast<std::size_t>(l) % m_size;
    std::size_t idx = 0;
    for (std::size_t m = 0; m < m_size; ++m) {
      acc += values[m] * table[idx];
      idx += stride;
      if (idx >= m_size) idx -= m_size;
    }
    if (l % 2 != 0) acc = -acc;
    lags[static_cast<std::size_t>(l)] = acc / static_cast<double>(m_size);
  }
  return lags;
}

int combined_memory(const ChannelTaps& h, const SampledSpectrum& sp, double threshold_rel) {
  const auto h2 = dtft_power(h, sp.grid());
  const auto lags = spectrum_lags(h2.times(sp), static_cast<int>(sp.size() / 2));
  const double r0 = std::abs(lags.front());
  if (r0 <= 0.0) return 0;
  int k = 0;
  for (std::size_t l = 1; l < lags.size(); ++l) {
    if (std::abs(lags[l]) > threshold_rel * r0) k = static_cast<int>(l);
  }
  return k;
}

}  // namespace csopt
