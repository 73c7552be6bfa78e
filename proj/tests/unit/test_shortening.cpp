#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "core/error.hpp"
#include "core/shortening.hpp"
#include "core/toeplitz.hpp"

using namespace csopt;

namespace {

const ChannelTaps kRefChannel({{0.5, 0.0}, {0.5, 0.0}, {-0.5, 0.0}, {0.0, -0.5}});

SampledSpectrum one_plus_cos(const FrequencyGrid& grid) {
  std::vector<double> v(grid.size());
  for (std::size_t m = 0; m < grid.size(); ++m) v[m] = 1.0 + std::cos(grid.node(m));
  return SampledSpectrum(grid, v);
}

// Midpoint quadrature of (1/2pi) int e^{jk w} / (2 + cos w) dw on a fine offset grid.
Complex fine_b(int k) {
  const int n = 1 << 18;
  Complex acc{};
  for (int i = 0; i < n; ++i) {
    const double w = -kPi + kTwoPi * (i + 0.5) / n;
    acc += std::exp(Complex(0.0, k * w)) / (2.0 + std::cos(w));
  }
  return acc / static_cast<double>(n);
}

}  // namespace

TEST(ComputeB, FlatKernel) {
  const FrequencyGrid grid(64);
  const auto b = compute_b(ShorteningProblem(SampledSpectrum::constant(grid, 1.0), 1.0, 3));
  EXPECT_NEAR(b[0].real(), 0.5, 1e-15);
  for (int k = 1; k <= 3; ++k) EXPECT_LT(std::abs(b[k]), 1e-15);
}

TEST(ComputeB, NoSignal) {
  const FrequencyGrid grid(64);
  const auto b = compute_b(ShorteningProblem(SampledSpectrum::constant(grid, 0.0), 0.3, 2));
  EXPECT_NEAR(b[0].real(), 1.0, 1e-15);
  EXPECT_LT(std::abs(b[1]), 1e-15);
}

TEST(ComputeB, OnePlusCosineMatchesQuadratureOracle) {
  const auto b = compute_b(ShorteningProblem(one_plus_cos(FrequencyGrid(4096)), 1.0, 1));
  EXPECT_NEAR(b[0].real(), 1.0 / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(b[0].real(), 0.577350, 1e-6);
  EXPECT_NEAR(b[1].real(), -0.154701, 1e-6);
  EXPECT_LT(std::abs(b[0] - fine_b(0)), 1e-10);
  EXPECT_LT(std::abs(b[1] - fine_b(1)), 1e-10);
}

TEST(SolveShortening, ZeroMemory) {
  const FrequencyGrid grid(64);
  const auto sol = solve_shortening(ShorteningProblem(one_plus_cos(grid), 1.0, 0));
  const double b0 = sol.b[0].real();
  EXPECT_NEAR(sol.c, b0, 1e-15);
  ASSERT_EQ(sol.seed_taps.size(), 1u);
  EXPECT_NEAR(sol.seed_taps[0].real(), 1.0 / std::sqrt(b0), 1e-14);
  for (double g : sol.gr) EXPECT_NEAR(g, 1.0 / b0 - 1.0, 1e-12);
}

class MemorylessShortening : public ::testing::TestWithParam<int> {};

TEST_P(MemorylessShortening, ReachesCapacity) {
  const FrequencyGrid grid(256);
  const auto sol = solve_shortening(ShorteningProblem(SampledSpectrum::constant(grid, 1.0), 0.25, GetParam()));
  EXPECT_NEAR(sol.c, 0.2, 1e-14);
  EXPECT_NEAR(sol.air, std::log2(5.0), 1e-12);
  EXPECT_NEAR(sol.air, 2.321928, 1e-6);
}

INSTANTIATE_TEST_SUITE_P(Memories, MemorylessShortening, ::testing::Values(0, 1, 2, 3, 5));

TEST(SolveShortening, OnePlusCosineAgainstDenseOracle) {
  const auto sol = solve_shortening(ShorteningProblem(one_plus_cos(FrequencyGrid(4096)), 1.0, 1));
  const Complex b0 = fine_b(0), b1 = fine_b(1);
  Eigen::Matrix<std::complex<double>, 1, 1> B;
  B(0, 0) = b0;
  const Complex x = B.fullPivLu().solve(Eigen::Matrix<std::complex<double>, 1, 1>(b1))(0, 0);
  const double c_oracle = (b0 - std::conj(b1) * x).real();
  EXPECT_NEAR(sol.c, c_oracle, 1e-8);
  EXPECT_NEAR(sol.c, 0.535898, 1e-6);
  EXPECT_NEAR(sol.b[0].real(), 0.577350, 1e-6);
  EXPECT_NEAR(sol.b[1].real(), b1.real(), 1e-8);
  EXPECT_NEAR(sol.air, -std::log2(c_oracle), 1e-8);
  EXPECT_NEAR(sol.air, 0.900, 1e-3);
}

TEST(AirGaussian, Values) {
  EXPECT_DOUBLE_EQ(air_gaussian(0.5), 1.0);
  EXPECT_DOUBLE_EQ(air_gaussian(1.0), 0.0);
  EXPECT_NEAR(air_gaussian(0.535898), 0.900, 1e-3);
  EXPECT_THROW(air_gaussian(0.0), DomainError);
  EXPECT_THROW(air_gaussian(1.5), DomainError);
  EXPECT_THROW(air_gaussian(-0.1), DomainError);
}

TEST(SolveShortening, Invariants) {
  const FrequencyGrid grid(1024);
  const auto sv = dtft_power(kRefChannel, grid);
  for (int L = 0; L <= 4; ++L) {
    const auto sol = solve_shortening(ShorteningProblem(sv, 0.1, L));
    EXPECT_GT(sol.c, 0.0);
    EXPECT_LE(sol.c, sol.b[0].real() + 1e-15);
    EXPECT_LE(sol.b[0].real(), 1.0);
    for (double g : sol.gr) EXPECT_GE(g + 1.0, -1e-12);
    ASSERT_EQ(sol.gr_lags.size(), static_cast<std::size_t>(L + 1));
    // gr_lags are the Fourier coefficients of G^r: G^r(w) = sum_l g_l e^{-jlw}.
    for (int l = 0; l <= L + 1; ++l) {
      Complex acc{};
      for (std::size_t m = 0; m < grid.size(); ++m) acc += sol.gr[m] * std::pow(grid.phasor(m), l);
      acc /= static_cast<double>(grid.size());
      const Complex expect = l <= L ? sol.gr_lags[l] : Complex{};
      EXPECT_LT(std::abs(acc - expect), 1e-10) << "L=" << L << " lag " << l;
    }
  }
}

TEST(SolveShortening, MonotoneInMemory) {
  const FrequencyGrid grid(1024);
  const auto sv = dtft_power(kRefChannel, grid);
  for (double n0 : {1.0, 0.1, 0.01}) {
    double prev = 1.0;
    for (int L = 0; L <= 8; ++L) {
      const double c = solve_shortening_rate_only(ShorteningProblem(sv, n0, L)).c;
      EXPECT_LE(c, prev + 1e-14);
      prev = c;
    }
  }
}

TEST(SolveShortening, LargeMemoryReachesMatchedRate) {
  const FrequencyGrid grid(4096);
  const auto sv = dtft_power(kRefChannel, grid);
  const double n0 = 0.1;
  const auto sol = solve_shortening(ShorteningProblem(sv, n0, 40));
  EXPECT_NEAR(sol.air, matched_gaussian_rate(sv, n0), 1e-6);
}

TEST(SolveShortening, DependsOnlyOnPowerSpectrum) {
  const FrequencyGrid grid(256);
  const auto sv = dtft_power(kRefChannel, grid);
  const auto sol = solve_shortening(ShorteningProblem(sv, 0.2, 2));
  std::vector<Complex> v(grid.size());
  const Complex rot = std::exp(Complex(0.0, 1.1));
  const auto h = dtft(kRefChannel.taps(), grid);
  for (std::size_t m = 0; m < grid.size(); ++m) v[m] = rot * h[m];
  const auto hr = shortener_response(sol, v, 0.2);
  for (std::size_t m = 0; m < grid.size(); ++m) {
    EXPECT_NEAR(std::abs(hr[m]), std::abs(sol.hr[m]), 1e-12);
  }
  const auto rotated = dtft_power(ChannelTaps({rot * 0.5, rot * 0.5, rot * -0.5, rot * Complex(0.0, -0.5)}), grid);
  EXPECT_NEAR(solve_shortening(ShorteningProblem(rotated, 0.2, 2)).c, sol.c, 1e-14);
}

TEST(SolveShortening, IllConditionedIsReported) {
  const FrequencyGrid grid(64);
  std::vector<double> v(grid.size(), 0.0);
  v[3] = 1e14;
  EXPECT_THROW(solve_shortening(ShorteningProblem(SampledSpectrum(grid, v), 1.0, 2)), IllConditionedError);
}

TEST(SolveShortening, RejectsBadInputs) {
  const FrequencyGrid grid(64);
  const auto flat = SampledSpectrum::constant(grid, 1.0);
  EXPECT_THROW(ShorteningProblem(flat, 0.0, 1), DomainError);
  EXPECT_THROW(ShorteningProblem(flat, 1.0, -1), DomainError);
  EXPECT_THROW(ShorteningProblem(flat, 1.0, 62), ConfigError);
}

TEST(SolveShortening, LevinsonAgreesWithDenseOnReceiverLags) {
  const FrequencyGrid grid(2048);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Complex> taps(5);
    for (auto& t : taps) t = {n(rng), n(rng)};
    const auto sv = dtft_power(ChannelTaps(taps).normalized(), grid);
    for (int L = 1; L <= 8; ++L) {
      const auto b = compute_b(ShorteningProblem(sv, 0.05, L));
      const auto lev = levinson_predictor(b);
      const auto dense = dense_predictor(b);
      EXPECT_NEAR(lev.residual, dense.residual, 1e-10);
      for (int k = 0; k <= L; ++k) EXPECT_LT(std::abs(lev.coeffs[k] - dense.coeffs[k]), 1e-10);
    }
  }
}

TEST(ShorteningResidual, MatchesFullSolveOnBothPaths) {
  const FrequencyGrid grid(256);
  const auto sv = dtft_power(kRefChannel, grid).scaled(3.0);
  const HarmonicTable table(grid, 3);
  for (int l = 0; l <= 3; ++l) {
    const double c = solve_shortening_rate_only(ShorteningProblem(sv, 0.1, l)).c;
    EXPECT_NEAR(shortening_residual(sv.values(), grid, 0.1, l), c, 1e-13);
    EXPECT_NEAR(shortening_residual(sv.values(), table, 0.1, l), c, 1e-13);
  }
  EXPECT_THROW(shortening_residual(sv.values(), HarmonicTable(grid, 1), 0.1, 2), DomainError);
  std::vector<double> singular(grid.size(), 0.0);
  singular[0] = 1e14;
  EXPECT_THROW(shortening_residual(singular, table, 1.0, 1), IllConditionedError);
}
