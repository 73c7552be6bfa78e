#pragma once

// Order-L linear prediction on a Hermitian Toeplitz form.
//
// Given lags b_0..b_L with b_{-k} = conj(b_k), finds the monic row vector
// a = [1, a_1..a_L] minimizing sum_{k,l} a_k conj(a_l) b_{l-k}. The optimum is
// a = [1, -b B^{-1}] with B_ij = b_{j-i}, and the minimum is the residual
// c = b_0 - b B^{-1} b^H.

#include <span>
#include <vector>

#include "core/spectral.hpp"

namespace csopt {

struct PredictionResult {
  std::vector<Complex> coeffs;  ///< a_0 = 1, a_1..a_L
  double residual = 0.0;        ///< c
  std::vector<double> residual_by_order;  ///< c at orders 0..L (Levinson only)
  double max_reflection = 0.0;
  bool dense_fallback = false;
};

/// Levinson-Durbin recursion. Switches to the dense solver when a reflection
/// coefficient magnitude comes within `reflection_margin` of 1.
PredictionResult levinson_predictor(std::span<const Complex> lags,
                                    double reflection_margin = 1e-12);

/// Gaussian elimination with partial pivoting on the L x L normal equations.
PredictionResult dense_predictor(std::span<const Complex> lags);

}  // namespace csopt
