#pragma once

// MIMO-ISI channels: per-frequency singular values, joint transmit-spectrum
// optimization across the parallel eigenchannels, and waterfilling capacity.

#include <cstdint>
#include <span>
#include <vector>

#include "core/spectral.hpp"
#include "core/transmit_optimizer.hpp"

namespace csopt {

/// Square N x N complex matrix, row-major.
struct ComplexMatrix {
  std::size_t n = 0;
  std::vector<Complex> data;

  ComplexMatrix() = default;
  ComplexMatrix(std::size_t size, std::vector<Complex> values);
  static ComplexMatrix identity(std::size_t size);

  Complex operator()(std::size_t r, std::size_t c) const { return data[r * n + c]; }
  Complex& operator()(std::size_t r, std::size_t c) { return data[r * n + c]; }

  ComplexMatrix operator*(const ComplexMatrix& other) const;
};

/// H_0..H_{L_H}, all N x N.
class MimoChannelTaps {
 public:
  explicit MimoChannelTaps(std::vector<ComplexMatrix> taps);

  std::size_t dim() const { return taps_.front().n; }
  int memory() const { return static_cast<int>(taps_.size()) - 1; }
  std::span<const ComplexMatrix> taps() const { return taps_; }
  bool is_real() const;

  /// E_H = sum_l tr(H_l H_l^dagger).
  double energy() const;

  /// Taps Q H_l for a constant matrix Q.
  MimoChannelTaps rotated(const ComplexMatrix& q) const;

 private:
  std::vector<ComplexMatrix> taps_;
};

/// Complex Gaussian taps, scaled so that E_H = N.
MimoChannelTaps random_mimo_channel(std::size_t n, int channel_memory, std::uint64_t seed);

/// Eigenvalues of a Hermitian matrix, descending, by cyclic Jacobi rotations.
std::vector<double> hermitian_eigenvalues(const ComplexMatrix& a);

/// Random unitary matrix from the QR factorization of a complex Gaussian matrix.
ComplexMatrix random_unitary(std::size_t n, std::uint64_t seed);

struct SubchannelSet {
  std::vector<SampledSpectrum> sigma;  ///< singular values, descending per node
  std::vector<SampledSpectrum> gains;  ///< sigma^2
  double e_h = 0.0;
};

SubchannelSet svd_spectra(const MimoChannelTaps& ch, const FrequencyGrid& grid);

struct MimoResult {
  std::vector<OptimizedFilter> filters;
  std::vector<double> power_fractions;
  double total_air = 0.0;
  double flat_air = 0.0;  ///< sum of subchannel AIRs with S_p,n = 1
  bool converged = false;
  int restarts_used = 0;
  std::vector<double> search_point;
};

MimoResult optimize_mimo_subchannels(const SubchannelSet& sub, double n0, int memory, bool real_coefficients,
                                     const OptimizerOptions& options,
                                     std::span<const std::vector<double>> warm_starts = {});

MimoResult optimize_mimo(const MimoChannelTaps& ch, double n0, int memory, const OptimizerOptions& options,
                         const FrequencyGrid& grid = FrequencyGrid(),
                         std::span<const std::vector<double>> warm_starts = {});

/// Pads a joint search point from memory L to L + extra (zero off-lags per
/// subchannel, split logits kept).
std::vector<double> pad_mimo_point(std::span<const double> x, std::size_t subchannels, bool real_coefficients,
                                   int memory, int extra);

double mimo_waterfill_capacity(const SubchannelSet& sub, double n0);

}  // namespace csopt
