#include "core/mimo.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "core/error.hpp"
#include "core/shortening.hpp"
#include "core/waterfilling.hpp"

namespace csopt {

ComplexMatrix::ComplexMatrix(std::size_t size, std::vector<Complex> values) : n(size), data(std::move(values)) {
  if (size == 0) throw DomainError("matrix dimension must be >= 1");
  if (data.size() != size * size) throw DomainError("matrix needs N*N entries");
}

ComplexMatrix ComplexMatrix::identity(std::size_t size) {
  ComplexMatrix m(size, std::vector<Complex>(size * size));
  for (std::size_t i = 0; i < size; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::operator*(const ComplexMatrix& other) const {
  if (other.n != n) throw DomainError("matrix dimensions differ");
  ComplexMatrix out(n, std::vector<Complex>(n * n));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < n; ++k) {
      const Complex a = (*this)(r, k);
      for (std::size_t c = 0; c < n; ++c) out(r, c) += a * other(k, c);
    }
  }
  return out;
}

MimoChannelTaps::MimoChannelTaps(std::vector<ComplexMatrix> taps) : taps_(std::move(taps)) {
  if (taps_.empty()) throw DomainError("MIMO channel needs at least one tap matrix");
  const std::size_t n = taps_.front().n;
  if (n == 0) throw DomainError("MIMO tap matrices must be at least 1x1");
  for (const auto& t : taps_) {
    if (t.n != n || t.data.size() != n * n) throw DomainError("all MIMO tap matrices must be square of equal size");
    for (const auto& v : t.data) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw DomainError("MIMO taps must be finite");
    }
  }
  if (!(energy() > 0.0)) throw DomainError("MIMO channel is identically zero");
}

bool MimoChannelTaps::is_real() const {
  for (const auto& t : taps_) {
    for (const auto& v : t.data) {
      if (v.imag() != 0.0) return false;
    }
  }
  return true;
}

double MimoChannelTaps::energy() const {
  double e = 0.0;
  for (const auto& t : taps_) {
    for (const auto& v : t.data) e += std::norm(v);
  }
  return e;
}

MimoChannelTaps MimoChannelTaps::rotated(const ComplexMatrix& q) const {
  std::vector<ComplexMatrix> out;
  out.reserve(taps_.size());
  for (const auto& t : taps_) out.push_back(q * t);
  return MimoChannelTaps(std::move(out));
}

MimoChannelTaps random_mimo_channel(std::size_t n, int channel_memory, std::uint64_t seed) {
  if (n == 0) throw DomainError("MIMO dimension must be >= 1");
  if (channel_memory < 0) throw DomainError("channel memory must be nonnegative");
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  std::vector<ComplexMatrix> taps;
  double energy = 0.0;
  for (int l = 0; l <= channel_memory; ++l) {
    std::vector<Complex> values(n * n);
    for (auto& v : values) {
      const double re = normal(rng);
      const double im = normal(rng);
      v = Complex(re, im);
      energy += std::norm(v);
    }
    taps.emplace_back(n, std::move(values));
  }
  const double scale = std::sqrt(static_cast<double>(n) / energy);
  for (auto& t : taps) {
    for (auto& v : t.data) v *= scale;
  }
  return MimoChannelTaps(std::move(taps));
}

std::vector<double> hermitian_eigenvalues(const ComplexMatrix& a) {
  // Real symmetric embedding [[Re, -Im], [Im, Re]] has every eigenvalue of A
  // twice.
  const std::size_t n = a.n;
  const std::size_t d = 2 * n;
  std::vector<double> m(d * d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const Complex v = 0.5 * (a(r, c) + std::conj(a(c, r)));
      m[r * d + c] = v.real();
      m[(r + n) * d + (c + n)] = v.real();
      m[r * d + (c + n)] = -v.imag();
      m[(r + n) * d + c] = v.imag();
    }
  }
  auto at = [&](std::size_t r, std::size_t c) -> double& { return m[r * d + c]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    double diag = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
      diag += at(r, r) * at(r, r);
      for (std::size_t c = r + 1; c < d; ++c) off += at(r, c) * at(r, c);
    }
    if (off <= 1e-32 * diag || off == 0.0) break;
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          const double akp = at(k, p);
          const double akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double apk = at(p, k);
          const double aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> all(d);
  for (std::size_t r = 0; r < d; ++r) all[r] = at(r, r);
  std::sort(all.begin(), all.end(), std::greater<>());
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = 0.5 * (all[2 * i] + all[2 * i + 1]);
  return out;
}

ComplexMatrix random_unitary(std::size_t n, std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32), 7u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix q(n, std::vector<Complex>(n * n));
  for (auto& v : q.data) {
    const double re = normal(rng);
    const double im = normal(rng);
    v = Complex(re, im);
  }
  // Modified Gram-Schmidt on the columns.
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t k = 0; k < c; ++k) {
      Complex dot{};
      for (std::size_t r = 0; r < n; ++r) dot += std::conj(q(r, k)) * q(r, c);
      for (std::size_t r = 0; r < n; ++r) q(r, c) -= dot * q(r, k);
    }
    double norm = 0.0;
    for (std::size_t r = 0; r < n; ++r) norm += std::norm(q(r, c));
    norm = std::sqrt(norm);
    for (std::size_t r = 0; r < n; ++r) q(r, c) /= norm;
  }
  return q;
}

SubchannelSet svd_spectra(const MimoChannelTaps& ch, const FrequencyGrid& grid) {
  grid.require_alias_free(ch.memory(), 0);
  const std::size_t n = ch.dim();
  const std::size_t m_size = grid.size();
  std::vector<std::vector<double>> gains(n, std::vector<double>(m_size));
  const auto taps = ch.taps();
  const auto phasors = grid.phasors();
  for (std::size_t m = 0; m < m_size; ++m) {
    // H(omega) = sum_l H_l e^{-j l omega}
    const Complex zc = std::conj(phasors[m]);
    ComplexMatrix h(n, std::vector<Complex>(n * n));
    for (std::size_t l = taps.size(); l-- > 0;) {
      for (std::size_t i = 0; i < n * n; ++i) h.data[i] = h.data[i] * zc + taps[l].data[i];
    }
    if (n == 1) {
      gains[0][m] = std::norm(h.data[0]);
      continue;
    }
    ComplexMatrix hh(n, std::vector<Complex>(n * n));
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        Complex acc{};
        for (std::size_t k = 0; k < n; ++k) acc += std::conj(h(k, r)) * h(k, c);
        hh(r, c) = acc;
      }
    }
    const auto ev = hermitian_eigenvalues(hh);
    for (std::size_t i = 0; i < n; ++i) gains[i][m] = std::max(ev[i], 0.0);
  }
  SubchannelSet sub;
  sub.e_h = ch.energy();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> sigma(m_size);
    for (std::size_t m = 0; m < m_size; ++m) sigma[m] = std::sqrt(gains[i][m]);
    sub.sigma.emplace_back(grid, std::move(sigma));
    sub.gains.emplace_back(grid, std::move(gains[i]));
  }
  return sub;
}

MimoResult optimize_mimo_subchannels(const SubchannelSet& sub, double n0, int memory, bool real_coefficients,
                                     const OptimizerOptions& options,
                                     std::span<const std::vector<double>> warm_starts) {
  const JointObjective objective(sub.gains, n0, memory, real_coefficients, kTwoPi, options.water_level);
  std::vector<std::vector<double>> starts(warm_starts.begin(), warm_starts.end());
  if (sub.gains.size() > 1) {
    // Power split of the unconstrained waterfilling solution, flat-family off-lags.
    const auto wf = waterfill_joint(sub.gains, n0);
    std::vector<double> fractions(wf.powers.size());
    const double total = kTwoPi * static_cast<double>(wf.powers.size());
    for (std::size_t i = 0; i < fractions.size(); ++i) fractions[i] = wf.powers[i] / total;
    std::vector<double> x(objective.subchannels() * objective.offlag_dimension(), 0.0);
    const auto logits = objective.logits_for(fractions);
    x.insert(x.end(), logits.begin(), logits.end());
    starts.push_back(std::move(x));
  }
  auto joint = optimize_joint(objective, options, starts);
  MimoResult out;
  out.power_fractions = joint.power_fractions;
  out.total_air = joint.total_air;
  out.converged = joint.converged;
  out.restarts_used = joint.restarts_used;
  out.search_point = joint.x;
  for (const auto& f : joint.filters) out.flat_air += f.flat_air;
  out.filters = std::move(joint.filters);
  return out;
}

MimoResult optimize_mimo(const MimoChannelTaps& ch, double n0, int memory, const OptimizerOptions& options,
                         const FrequencyGrid& grid, std::span<const std::vector<double>> warm_starts) {
  if (memory < 0) throw DomainError("receiver memory L must be nonnegative");
  grid.require_alias_free(ch.memory(), memory);
  return optimize_mimo_subchannels(svd_spectra(ch, grid), n0, memory, ch.is_real(), options, warm_starts);
}

std::vector<double> pad_mimo_point(std::span<const double> x, std::size_t subchannels, bool real_coefficients,
                                   int memory, int extra) {
  const std::size_t per_old = static_cast<std::size_t>(real_coefficients ? memory : 2 * memory);
  const std::size_t pad = static_cast<std::size_t>(real_coefficients ? extra : 2 * extra);
  if (x.size() < subchannels * per_old) throw DomainError("search point is shorter than its off-lag blocks");
  std::vector<double> out;
  for (std::size_t n = 0; n < subchannels; ++n) {
    out.insert(out.end(), x.begin() + static_cast<std::ptrdiff_t>(n * per_old),
               x.begin() + static_cast<std::ptrdiff_t>((n + 1) * per_old));
    out.insert(out.end(), pad, 0.0);
  }
  out.insert(out.end(), x.begin() + static_cast<std::ptrdiff_t>(subchannels * per_old), x.end());
  return out;
}

double mimo_waterfill_capacity(const SubchannelSet& sub, double n0) {
  return waterfill_joint(sub.gains, n0).capacity;
}

}  // namespace csopt
