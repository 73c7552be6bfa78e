#include "core/toeplitz.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/error.hpp"

namespace csopt {

namespace {

Complex lag_at(std::span<const Complex> lags, int k) {
  return k >= 0 ? lags[static_cast<std::size_t>(k)] : std::conj(lags[static_cast<std::size_t>(-k)]);
}

}  // namespace

PredictionResult levinson_predictor(std::span<const Complex> lags, double reflection_margin) {
  if (lags.empty()) throw DomainError("prediction needs at least the zero lag");
  const int order = static_cast<int>(lags.size()) - 1;
  const double b0 = lags[0].real();
  if (!(b0 > 0.0)) throw DomainError("zero lag must be positive");

  PredictionResult out;
  out.coeffs.assign(1, Complex(1.0, 0.0));
  out.residual = b0;
  out.residual_by_order.push_back(b0);

  std::vector<Complex> reversed;
  for (int p = 0; p < order; ++p) {
    // Mismatch of the extended order-p solution at lag p+1.
    Complex delta{};
    for (int k = 0; k <= p; ++k) delta += out.coeffs[static_cast<std::size_t>(k)] * lags[static_cast<std::size_t>(p + 1 - k)];
    const Complex kappa = -delta / out.residual;
    const double mag = std::abs(kappa);
    out.max_reflection = std::max(out.max_reflection, mag);
    if (!(mag < 1.0 - reflection_margin)) {
      auto dense = dense_predictor(lags);
      dense.max_reflection = out.max_reflection;
      return dense;
    }
    reversed.resize(static_cast<std::size_t>(p + 1));
    for (int k = 0; k <= p; ++k) reversed[static_cast<std::size_t>(k)] = std::conj(out.coeffs[static_cast<std::size_t>(p - k)]);
    out.coeffs.push_back(Complex{});
    for (int k = 1; k <= p + 1; ++k) out.coeffs[static_cast<std::size_t>(k)] += kappa * reversed[static_cast<std::size_t>(k - 1)];
    out.residual *= (1.0 - mag * mag);
    out.residual_by_order.push_back(out.residual);
  }
  return out;
}

PredictionResult dense_predictor(std::span<const Complex> lags) {
  if (lags.empty()) throw DomainError("prediction needs at least the zero lag");
  const int order = static_cast<int>(lags.size()) - 1;
  PredictionResult out;
  out.dense_fallback = true;
  out.coeffs.assign(static_cast<std::size_t>(order + 1), Complex{});
  out.coeffs[0] = 1.0;

  if (order > 0) {
    // sum_{k=1}^{L} a_k b_{l-k} = -b_l for l = 1..L.
    const auto n = static_cast<std::size_t>(order);
    std::vector<Complex> mat(n * (n + 1));
    auto at = [&](std::size_t r, std::size_t c) -> Complex& { return mat[r * (n + 1) + c]; };
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) at(r, c) = lag_at(lags, static_cast<int>(r) - static_cast<int>(c));
      at(r, n) = -lags[r + 1];
    }
    for (std::size_t col = 0; col < n; ++col) {
      std::size_t pivot = col;
      for (std::size_t r = col + 1; r < n; ++r) {
        if (std::abs(at(r, col)) > std::abs(at(pivot, col))) pivot = r;
      }
      if (std::abs(at(pivot, col)) == 0.0) {
        throw IllConditionedError("prediction matrix is singular; increase grid size M or reduce L");
      }
      if (pivot != col) {
        for (std::size_t c = 0; c <= n; ++c) std::swap(at(col, c), at(pivot, c));
      }
      for (std::size_t r = col + 1; r < n; ++r) {
        const Complex f = at(r, col) / at(col, col);
        for (std::size_t c = col; c <= n; ++c) at(r, c) -= f * at(col, c);
      }
    }
    for (std::size_t r = n; r-- > 0;) {
      Complex acc = at(r, n);
      for (std::size_t c = r + 1; c < n; ++c) acc -= at(r, c) * out.coeffs[c + 1];
      out.coeffs[r + 1] = acc / at(r, r);
    }
  }
  Complex c = lags[0];
  for (int k = 1; k <= order; ++k) c += out.coeffs[static_cast<std::size_t>(k)] * std::conj(lags[static_cast<std::size_t>(k)]);
  out.residual = c.real();
  return out;
}

}  // namespace csopt
