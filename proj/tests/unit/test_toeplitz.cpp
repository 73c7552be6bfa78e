#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "core/toeplitz.hpp"

using namespace csopt;

namespace {

// Lags of a positive definite Hermitian Toeplitz form from a random spectrum.
std::vector<Complex> random_lags(int order, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  std::vector<Complex> taps(order + 3);
  for (auto& t : taps) t = {n(rng), n(rng)};
  std::vector<Complex> lags(order + 1);
  for (int k = 0; k <= order; ++k) {
    Complex s = 0.0;
    for (std::size_t i = k; i < taps.size(); ++i) s += taps[i] * std::conj(taps[i - k]);
    lags[k] = s;
  }
  lags[0] += 0.1;
  return lags;
}

struct Oracle {
  std::vector<Complex> coeffs;
  double residual;
};

// Minimizes a^H T a over a_0 = 1 with T_{l,k} = b_{l-k}.
Oracle eigen_oracle(const std::vector<Complex>& lags) {
  const int L = static_cast<int>(lags.size()) - 1;
  auto lag = [&](int k) { return k >= 0 ? lags[k] : std::conj(lags[-k]); };
  Oracle o{{Complex(1.0, 0.0)}, lags[0].real()};
  if (L == 0) return o;
  Eigen::MatrixXcd T(L, L);
  Eigen::VectorXcd r(L);
  for (int i = 0; i < L; ++i) {
    r(i) = lags[i + 1];
    for (int j = 0; j < L; ++j) T(i, j) = lag(i - j);
  }
  const Eigen::VectorXcd a = -T.ldlt().solve(r);
  o.residual = (lags[0] + (r.adjoint() * a)(0, 0)).real();
  for (int i = 0; i < L; ++i) o.coeffs.push_back(a(i));
  return o;
}

}  // namespace

class ToeplitzVsDense : public ::testing::TestWithParam<int> {};

TEST_P(ToeplitzVsDense, LevinsonMatchesEigen) {
  std::mt19937_64 rng(100 + GetParam());
  for (int trial = 0; trial < 10; ++trial) {
    const auto lags = random_lags(GetParam(), rng);
    const auto lev = levinson_predictor(lags);
    const auto dense = dense_predictor(lags);
    const auto oracle = eigen_oracle(lags);
    ASSERT_EQ(lev.coeffs.size(), oracle.coeffs.size());
    EXPECT_NEAR(lev.residual, oracle.residual, 1e-10);
    EXPECT_NEAR(dense.residual, oracle.residual, 1e-10);
    for (std::size_t i = 0; i < lev.coeffs.size(); ++i) {
      EXPECT_LT(std::abs(lev.coeffs[i] - oracle.coeffs[i]), 1e-10);
      EXPECT_LT(std::abs(dense.coeffs[i] - oracle.coeffs[i]), 1e-10);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Orders, ToeplitzVsDense, ::testing::Range(0, 9));

TEST(Levinson, ResidualNonincreasingWithOrder) {
  std::mt19937_64 rng(3);
  const auto lags = random_lags(8, rng);
  const auto lev = levinson_predictor(lags);
  ASSERT_EQ(lev.residual_by_order.size(), 9u);
  for (std::size_t k = 1; k < lev.residual_by_order.size(); ++k) {
    EXPECT_LE(lev.residual_by_order[k], lev.residual_by_order[k - 1] + 1e-15);
  }
}

TEST(Levinson, ZeroOffLagsGiveTrivialPredictor) {
  const std::vector<Complex> lags{{0.2, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
  const auto lev = levinson_predictor(lags);
  EXPECT_NEAR(lev.residual, 0.2, 1e-15);
  EXPECT_EQ(lev.coeffs[1], Complex(0.0, 0.0));
  EXPECT_FALSE(lev.dense_fallback);
}

TEST(Levinson, NearSingularFallsBackToDense) {
  // A pure tone plus a little white noise: reflection magnitude near one.
  const Complex z = std::exp(Complex(0.0, 0.7));
  const std::vector<Complex> lags{{1.0 + 1e-8, 0.0}, z, z * z};
  const auto lev = levinson_predictor(lags, 1e-6);
  EXPECT_TRUE(lev.dense_fallback);
  const auto dense = dense_predictor(lags);
  EXPECT_NEAR(lev.residual, dense.residual, 1e-12);
  EXPECT_GT(lev.residual, 0.0);
}
