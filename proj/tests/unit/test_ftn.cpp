#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "core/error.hpp"
#include "core/ftn.hpp"
#include "core/shortening.hpp"

using namespace csopt;

namespace {

FtnScenario scenario(double product, double n0, double t = 1.0) { return FtnScenario(product / (2.0 * t), t, n0); }

OptimizerOptions opts() {
  OptimizerOptions o;
  o.restarts = 3;
  return o;
}

double integrate(const std::function<double(double)>& f, double a, double b, int n = 200000) {
  const double h = (b - a) / n;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += f(a + (i + 0.5) * h);
  return acc * h;
}

}  // namespace

TEST(Brickwall, NyquistIsFlat) {
  const auto h2 = brickwall_spectrum(1.0, FrequencyGrid(256));
  for (double v : h2.values()) EXPECT_EQ(v, 1.0);
}

TEST(Brickwall, InBandFraction) {
  const FrequencyGrid grid(4096);
  const auto h2 = brickwall_spectrum(0.48, grid);
  double inside = 0.0;
  for (double v : h2.values()) inside += v;
  EXPECT_NEAR(inside / grid.size(), 0.48, 1.0 / grid.size() + 1e-12);
}

TEST(Brickwall, ClosedBoundary) {
  const FrequencyGrid grid(4096);
  const auto h2 = brickwall_spectrum(0.5, grid);
  const std::size_t edge = grid.zero_index() + grid.size() / 4;
  ASSERT_NEAR(grid.node(edge), kPi / 2.0, 1e-12);
  EXPECT_EQ(h2[edge], 1.0);
  EXPECT_EQ(h2[edge + 1], 0.0);
  EXPECT_EQ(h2[grid.zero_index() - grid.size() / 4], 1.0);
}

TEST(Scenario, Validation) {
  EXPECT_THROW(FtnScenario(0.0, 1.0, 1.0), DomainError);
  EXPECT_THROW(FtnScenario(0.5, -1.0, 1.0), DomainError);
  EXPECT_TRUE(scenario(0.48, 1.0).faster_than_nyquist());
  EXPECT_FALSE(scenario(1.0, 1.0).faster_than_nyquist());
  EXPECT_NEAR(scenario(0.48, 1.0, 2.0).product(), 0.48, 1e-15);
}

TEST(OptimizePulse, NyquistShortcutIsFlat) {
  const FrequencyGrid grid(1024);
  const auto d = optimize_pulse(scenario(1.0, 0.1), 2, opts(), grid);
  EXPECT_TRUE(d.flat_shortcut);
  for (double v : d.discrete_spectrum.values()) EXPECT_EQ(v, 1.0);
  EXPECT_NEAR(d.air, std::log2(11.0), 1e-12);
  EXPECT_NEAR(d.ase, 2.0 * std::log2(11.0), 1e-12);
}

TEST(OptimizePulse, NyquistWithoutShortcutIsStillFlat) {
  const FrequencyGrid grid(1024);
  PulseOptions p;
  p.flat_shortcut = false;
  for (int L : {1, 2}) {
    const auto d = optimize_pulse(scenario(1.0, 0.1), L, opts(), grid, p);
    EXPECT_FALSE(d.flat_shortcut);
    double lo = 1e300, hi = 0.0;
    for (double v : d.discrete_spectrum.values()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    EXPECT_LT((hi - lo) / hi, 1e-3);
    EXPECT_NEAR(d.air, std::log2(11.0), 1e-6);
  }
}

TEST(OptimizePulse, FasterThanNyquistDesign) {
  const FrequencyGrid grid(4096);
  const double n0 = 0.1;
  const auto d = optimize_pulse(scenario(0.48, n0), 1, opts(), grid);
  const auto h2 = brickwall_spectrum(0.48, grid);
  for (std::size_t m = 0; m < grid.size(); ++m) {
    if (h2[m] == 0.0) {
      EXPECT_EQ(d.discrete_spectrum[m], 0.0);
    }
  }
  EXPECT_NEAR(spectrum_power(d.discrete_spectrum), kTwoPi, 1e-8 * kTwoPi);
  const double energy = integrate([&](double f) { return d.continuous_spectrum(f); }, -0.5, 0.5);
  EXPECT_NEAR(energy, 1.0, 1e-6);
  EXPECT_NEAR(d.ase, d.air / (0.24), 1e-12);
  EXPECT_GE(d.air, d.filter.flat_air - 1e-9);
}

TEST(Rrc, NyquistZeroRolloffIsFlat) {
  const auto s = rrc_folded_spectrum(0.0, scenario(1.0, 1.0), FrequencyGrid(1024));
  for (double v : s.values()) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Rrc, FoldedSpectrumHasUnitMean) {
  const FrequencyGrid grid(4096);
  for (double alpha : {0.1, 0.2}) {
    const auto s = rrc_folded_spectrum(alpha, scenario(0.48, 1.0), grid);
    EXPECT_NEAR(grid_mean(s.values()), 1.0, 1e-10);
    EXPECT_NEAR(spectrum_power(s), kTwoPi, 1e-9);
  }
}

TEST(Rrc, RolloffsGiveDistinctRates) {
  const FrequencyGrid grid(4096);
  const double n0 = 0.1;
  const auto a = solve_shortening(ShorteningProblem(rrc_folded_spectrum(0.1, scenario(0.48, n0), grid), n0, 1));
  const auto b = solve_shortening(ShorteningProblem(rrc_folded_spectrum(0.2, scenario(0.48, n0), grid), n0, 1));
  EXPECT_GT(std::abs(a.air - b.air), 1e-4);
}

TEST(Rrc, RejectsBadRolloff) {
  EXPECT_THROW(rrc_folded_spectrum(1.5, scenario(0.48, 1.0), FrequencyGrid(64)), DomainError);
}

TEST(RaisedCosine, UnitEnergy) {
  const double t0 = 0.7;
  for (double alpha : {0.0, 0.2, 0.5, 1.0}) {
    const double e = integrate([&](double f) { return raised_cosine(f, alpha, t0); }, -1.0 / t0, 1.0 / t0);
    EXPECT_NEAR(e, 1.0, 1e-6) << alpha;
  }
}

TEST(PulseTimeDomain, NyquistSincHasLowLeakage) {
  const auto d = optimize_pulse(scenario(1.0, 0.1), 1, opts(), FrequencyGrid(4096));
  const auto taps = pulse_time_domain(d, Window::Kaiser, 257);
  EXPECT_EQ(taps.amplitudes.size(), 257u);
  EXPECT_LT(taps.leakage, 1e-3);
  const auto os2 = pulse_time_domain(d, Window::Kaiser, 257, 8.0, 2);
  EXPECT_LT(os2.stopband_leakage, 1e-3);
}

TEST(PulseTimeDomain, KaiserBeatsRectangularInTheStopband) {
  const auto d = optimize_pulse(scenario(0.48, 0.1), 1, opts(), FrequencyGrid(4096));
  const auto kaiser = pulse_time_domain(d, Window::Kaiser, 257);
  const auto rect = pulse_time_domain(d, Window::Rectangular, 257);
  EXPECT_LT(kaiser.stopband_leakage, rect.stopband_leakage);
}

TEST(PulseTimeDomain, SingleTapIsBroadband) {
  const auto d = optimize_pulse(scenario(0.48, 0.1), 1, opts(), FrequencyGrid(1024));
  const auto taps = pulse_time_domain(d, Window::Kaiser, 1);
  EXPECT_EQ(taps.amplitudes.size(), 1u);
  EXPECT_NEAR(taps.leakage, 1.0 - 0.48, 1e-9);
}

TEST(PulseTimeDomain, RoundTripErrorBoundedByLeakage) {
  const auto d = optimize_pulse(scenario(0.48, 0.1), 1, opts(), FrequencyGrid(4096));
  const auto taps = pulse_time_domain(d, Window::Kaiser, 257, 8.0, 2);
  // Amplitude error energy over one period; smoothing the band edge puts about equal energy on either side.
  const double err = integrate(
      [&](double f) {
        const double e = std::sqrt(pulse_taps_spectrum(taps, f)) - std::sqrt(d.continuous_spectrum(f));
        return e * e;
      },
      -1.0, 1.0, 20000);
  EXPECT_LT(err, 2.0 * taps.leakage);
}

TEST(PulseTimeDomain, Validation) {
  const auto d = optimize_pulse(scenario(1.0, 0.1), 0, opts(), FrequencyGrid(64));
  EXPECT_THROW(pulse_time_domain(d, Window::Kaiser, 4), DomainError);
  EXPECT_THROW(pulse_time_domain(d, Window::Kaiser, 5, 8.0, 0), DomainError);
}

TEST(EbN0, Values) {
  EXPECT_NEAR(ebn0_db(1.0, 1.0), 0.0, 1e-15);
  EXPECT_NEAR(ebn0_db(0.5, 1.0), 3.0103, 1e-4);
  EXPECT_THROW(ebn0_db(0.0, 1.0), DomainError);
  EXPECT_THROW(ebn0_db(-1.0, 1.0), DomainError);
}

TEST(EbN0, MonotoneAlongNoiseSweep) {
  const FrequencyGrid grid(1024);
  double prev = -1e300;
  for (double n0 : {1.0, 0.5, 0.2, 0.1, 0.05}) {
    const auto d = optimize_pulse(scenario(1.0, n0), 1, opts(), grid);
    const double e = ebn0_db(d.air, n0);
    EXPECT_GT(e, prev);
    prev = e;
  }
}

TEST(AwgnBound, FixedPointAndShannonLimit) {
  for (double db : {0.0, 4.0, 10.0}) {
    const double eta = awgn_ase_bound(db);
    const double e = std::pow(10.0, db / 10.0);
    EXPECT_NEAR(eta, 2.0 * std::log2(1.0 + eta * e / 2.0), 1e-9);
  }
  EXPECT_EQ(awgn_ase_bound(-2.0), 0.0);
  EXPECT_GT(awgn_ase_bound(10.0), awgn_ase_bound(4.0));
}

TEST(SpectralEfficiency, Definition) { EXPECT_NEAR(spectral_efficiency(1.2, 0.48), 1.2 / 0.24, 1e-14); }
