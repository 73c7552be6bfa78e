#pragma once

// Monte-Carlo achievable information rate of the channel-shortening detector
// for discrete alphabets: forward recursion over the U^L-state trellis of the
// mismatched Ungerboeck metric.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "core/shortening.hpp"
#include "core/spectral.hpp"

namespace csopt {

class Alphabet {
 public:
  explicit Alphabet(std::vector<Complex> points);
  static Alphabet bpsk();
  static Alphabet qpsk();

  std::span<const Complex> points() const { return points_; }
  std::size_t size() const { return points_.size(); }

 private:
  std::vector<Complex> points_;
};

/// Taps v_i at time indices start + i.
struct TimeTaps {
  std::vector<Complex> taps;
  int start = 0;

  std::vector<Complex> response(const FrequencyGrid& grid) const { return dtft(taps, grid, start); }
};

/// Zero-phase taps of sqrt(S_p), indices -(count-1)/2..(count-1)/2, scaled to unit energy.
TimeTaps transmit_taps(const SampledSpectrum& sp, int count = 65);

/// h * p.
TimeTaps convolve(const ChannelTaps& h, const TimeTaps& p);

/// y_k = sum_l v_l u_{k-l} + w_k with circular complex Gaussian noise of variance N0.
std::vector<Complex> simulate_channel(std::span<const Complex> u, const TimeTaps& v, double n0,
                                      std::mt19937_64& rng);

struct FrontEnd {
  std::vector<Complex> taps;  ///< f_n for n = -(count-1)/2..(count-1)/2
  double truncation_loss = 0.0;
  bool truncation_warning = false;  ///< loss > 1e-2
};

/// FIR with frequency response conj(H^r), so that z = (H^r)^dagger y.
FrontEnd design_frontend(std::span<const Complex> hr, const FrequencyGrid& grid, int taps = 129);

/// z_k = sum_n f_n y_{k-n}; the FIR is centered so z_k aligns with u_k.
std::vector<Complex> frontend_filter(std::span<const Complex> y, const FrontEnd& fe);

/// Receiver for the physical combined response v: G^r from |V|^2 and
/// H^r = V (G^r + 1) / (|V|^2 + N0).
ShorteningSolution receiver_for_taps(const TimeTaps& v, double n0, int memory, const FrequencyGrid& grid);

/// Branch metric 2 Re{u* z} - |u|^2 g_0 - 2 Re{u* sum_l g_l u_{k-l}}; `past` holds u_{k-1}..u_{k-L}.
double branch_metric(Complex u, Complex z, std::span<const Complex> gr_lags, std::span<const Complex> past);

struct SimConfig {
  int num_symbols = 10000;
  int num_blocks = 10;
  std::uint64_t rng_seed = 1;
  int frontend_taps = 129;
  int guard = 64;
  int threads = 1;
};

void validate(const SimConfig& cfg, int memory);

struct AirEstimate {
  double air = 0.0;
  double stderr_bits = 0.0;
  std::vector<double> block_rates;
  double truncation_loss = 0.0;
  bool truncation_warning = false;
};

/// Symbols per block, metric on the transmitted sequence, trellis forward
/// recursion for log p~(y).
AirEstimate mismatched_air_estimate(const Alphabet& alphabet, const TimeTaps& v, double n0,
                                    const ShorteningSolution& receiver, const FrontEnd& frontend,
                                    const SimConfig& cfg);

/// Builds receiver and front end for v, then estimates the rate.
AirEstimate simulate_shortened_rate(const Alphabet& alphabet, const TimeTaps& v, double n0, int memory,
                                    const SimConfig& cfg, const FrequencyGrid& grid = FrequencyGrid());

/// BPSK mutual information over complex AWGN with noise variance N0, by quadrature.
double bpsk_awgn_rate(double n0);

}  // namespace csopt
