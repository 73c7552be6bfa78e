// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "core/air_sim.hpp"
#include "core/experiment_config.hpp"
#include "core/experiments.hpp"
#include "core/ftn.hpp"
#include "core/mimo.hpp"
#include "core/report.hpp"
#include "core/shortening.hpp"
#include "core/toeplitz.hpp"
#include "core/transmit_optimizer.hpp"
#include "core/waterfilling.hpp"

using namespace csopt;

namespace {

const ChannelTaps kRefChannel({{0.5, 0.0}, {0.5, 0.0}, {-0.5, 0.0}, {0.0, -0.5}});
constexpr double kSlack = 1e-9;

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

OptimizerOptions options(int restarts = 3) {
  OptimizerOptions o;
  o.restarts = restarts;
  return o;
}

double n0_db(double snr) { return std::pow(10.0, -snr / 10.0); }

Check memoryless_exactness() {
  Check ch;
  const ChannelTaps h(std::vector<Complex>{Complex(1.0, 0.0)});
  const FrequencyGrid grid(4096);
  double worst = 0.0, slowest = 0.0;
  for (double n0 : {1.0, 0.25, 0.1}) {
    for (int l = 0; l <= 3; ++l) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto f = optimize_transmit_filter(h, n0, l, options(), grid);
      slowest = std::max(slowest, seconds_since(t0));
      worst = std::max(worst, std::abs(f.air - std::log2(1.0 + 1.0 / n0)));
    }
  }
  ch.require(worst <= 1e-6, fmt("max error %.3g bits", worst));
  ch.require(slowest < 0.1, fmt("slowest point %.3f s", slowest));
  if (ch.ok) ch.detail = fmt("max error %.3g bits, slowest point %.3f s", worst, slowest);
  return ch;
}

Check receiver_oracle() {
  Check ch;
  const FrequencyGrid grid(4096);
  std::vector<double> v(grid.size());
  for (std::size_t m = 0; m < v.size(); ++m) v[m] = 1.0 + std::cos(grid.node(m));
  const auto sol = solve_shortening(ShorteningProblem(SampledSpectrum(grid, v), 1.0, 1));

  // Kernel N0 / (Sv + N0) = 1 / (2 + cos w), midpoint quadrature on 2^20 offset nodes.
  const int n = 1 << 20;
  Complex b0{}, b1{};
  for (int i = 0; i < n; ++i) {
    const double w = -kPi + kTwoPi * (i + 0.5) / n;
    const double k = 1.0 / (2.0 + std::cos(w));
    b0 += k;
    b1 += k * std::exp(Complex(0.0, w));
  }
  b0 /= static_cast<double>(n);
  b1 /= static_cast<double>(n);
  Eigen::MatrixXcd t(1, 1);
  t(0, 0) = b0;
  Eigen::VectorXcd r(1);
  r(0) = b1;
  const Eigen::VectorXcd a = -t.ldlt().solve(r);
  const double c = (b0 + (r.adjoint() * a)(0, 0)).real();

  const double e0 = std::abs(sol.b[0] - b0), e1 = std::abs(sol.b[1] - b1), ec = std::abs(sol.c - c);
  ch.require(e0 <= 1e-8 && e1 <= 1e-8, fmt("b errors %.3g %.3g", e0, e1));
  ch.require(ec <= 1e-8, fmt("c error %.3g", ec));
  ch.require(std::abs(sol.b[0].real() - 0.577350) < 1e-6 && std::abs(sol.c - 0.535898) < 1e-6,
             fmt("b0 %.6f c %.6f", sol.b[0].real(), sol.c));
  if (ch.ok) ch.detail = fmt("b0 %.9f c %.9f, max error %.3g", sol.b[0].real(), sol.c, std::max({e0, e1, ec}));
  return ch;
}

Check fig2_ordering() {
  Check ch;
  const FrequencyGrid grid(4096);
  const auto h2 = dtft_power(kRefChannel, grid);
  const std::vector<int> memories{1, 2, 3};
  double slowest = 0.0;
  for (double snr : {0.0, 4.0, 8.0, 12.0, 16.0}) {
    const double n0 = n0_db(snr);
    const auto t0 = std::chrono::steady_clock::now();
    const auto row = optimize_sweep(h2, false, {n0}, memories, options())[0];
    slowest = std::max(slowest, seconds_since(t0) / 3.0);
    const double cap = waterfill(h2, n0).capacity;
    for (std::size_t j = 0; j < 3; ++j) {
      ch.require(row[j].flat_air <= row[j].air + kSlack, fmt("flat above optimized at %g dB, L=%g", snr, j + 1.0));
      if (j) ch.require(row[j - 1].air <= row[j].air + kSlack, fmt("L ordering broken at %g dB, L=%g", snr, j + 1.0));
    }
    ch.require(row[2].air <= cap + kSlack, fmt("above capacity at %g dB", snr));
  }
  ch.require(slowest < 5.0, fmt("mean point time %.2f s", slowest));
  if (ch.ok) ch.detail = fmt("slowest per-point mean %.2f s", slowest);
  return ch;
}

Check waterfill_memory() {
  Check ch;
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> mem(1, 5);
  std::normal_distribution<double> g(0.0, 1.0);
  const FrequencyGrid grid(4096);
  int holds = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int lh = mem(rng);
    std::vector<Complex> taps;
    for (int k = 0; k <= lh; ++k) taps.emplace_back(g(rng), g(rng));
    if (std::abs(taps.back()) < 1e-3) taps.back() = Complex(0.5, 0.0);
    const ChannelTaps h = ChannelTaps(taps).normalized();
    const auto wf = waterfill(dtft_power(h, grid), n0_db(10.0));
    if (combined_memory(h, wf.spectrum, 1e-6) >= h.memory()) ++holds;
  }
  ch.require(holds == 20, fmt("%g/20 channels", holds));
  if (ch.ok) ch.detail = "20/20 channels";
  return ch;
}

Check fig3_behavior() {
  Check ch;
  const FrequencyGrid grid(4096);
  const auto h2 = dtft_power(kRefChannel, grid);
  bool found_below_flat = false;
  double gap10 = 0.0;
  for (double snr : {0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0}) {
    const double n0 = n0_db(snr);
    const auto wf = waterfill(h2, n0);
    const auto sv = h2.times(wf.spectrum);
    double prev = 0.0;
    for (int l : {1, 2, 4, 8, 16}) {
      const double air = solve_shortening_rate_only(ShorteningProblem(sv, n0, l)).air;
      ch.require(air >= prev - kSlack, fmt("air decreases at %g dB, L=%g", snr, l));
      prev = air;
      if (l == 1 && air < solve_shortening_rate_only(ShorteningProblem(h2, n0, 1)).air) found_below_flat = true;
      if (l == 16 && snr == 10.0) gap10 = wf.capacity - air;
    }
  }
  ch.require(gap10 < 0.05, fmt("L=16 gap to capacity at 10 dB %.4f bits", gap10));
  ch.require(found_below_flat, "no SNR with waterfill below flat at L=1");
  if (ch.ok) ch.detail = fmt("L=16 gap at 10 dB %.4f bits", gap10);
  return ch;
}

// Simpson rule for the BPSK rate over complex AWGN: I = 1 - E log2(1 + exp(-4 y / N0)), y ~ N(1, N0/2).
double bpsk_quadrature(double n0) {
  const double s = std::sqrt(0.5 * n0);
  const int n = 40000;
  const double a = 1.0 - 14.0 * s, b = 1.0 + 14.0 * s, h = (b - a) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double y = a + i * h;
    const double pdf = std::exp(-(y - 1.0) * (y - 1.0) / (2.0 * s * s)) / (s * std::sqrt(kTwoPi));
    const double x = -4.0 * y / n0;
    const double l = x > 0 ? x / std::log(2.0) + std::log2(1.0 + std::exp(-x)) : std::log2(1.0 + std::exp(x));
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * pdf * l;
  }
  return 1.0 - acc * h / 3.0;
}

Check simulation_oracle() {
  Check ch;
  SimConfig sim;
  sim.num_symbols = 10000;
  sim.num_blocks = 10;
  const TimeTaps v{{Complex(1.0, 0.0)}, 0};
  double worst = 0.0, slowest = 0.0;
  for (double n0 : {2.0, 1.0, 0.25}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto est = simulate_shortened_rate(Alphabet::bpsk(), v, n0, 0, sim, FrequencyGrid(256));
    const double err = std::abs(est.air - bpsk_quadrature(n0));
    worst = std::max(worst, err);
    slowest = std::max(slowest, seconds_since(t0));
    ch.require(err <= std::max(0.01, 2.0 * est.stderr_bits), fmt("N0=%g error %.4f bits", n0, err));
  }
  ch.require(slowest < 30.0, fmt("slowest point %.1f s", slowest));
  if (ch.ok) ch.detail = fmt("max error %.4f bits, slowest point %.1f s", worst, slowest);
  return ch;
}

Check fig4_consistency() {
  Check ch;
  auto cfg = parse_experiment_config(R"([experiment]
command = airsim
grid = 4096
[channel]
taps = 0.5 0.5 -0.5 0,-0.5
[sweep]
snr_db = 0:4:16
L = 1,2,3
[sim]
num_symbols = 10000
num_blocks = 10
filters = optimized
)",
                                     "fig4-acceptance");
  const auto r = run_experiment(cfg);
  auto col = [&](const char* name) {
    return static_cast<std::size_t>(std::find(r.table.columns.begin(), r.table.columns.end(), name) -
                                    r.table.columns.begin());
  };
  const std::size_t ca = col("air"), cs = col("stderr"), cg = col("air_gaussian"), cl = col("L"), cx = col("snr_db");
  const std::size_t points = 5;
  for (std::size_t i = 0; i < r.table.rows.size(); ++i) {
    const auto& row = r.table.rows[i];
    const double air = std::stod(row[ca]);
    ch.require(air <= std::min(1.0, std::stod(row[cg])) + kSlack,
               "BPSK above min(1, Gaussian) at " + row[cx] + " dB, L=" + row[cl]);
    if (i >= points) {
      const auto& prev = r.table.rows[i - points];
      const double tol = 2.0 * std::hypot(std::stod(row[cs]), std::stod(prev[cs]));
      ch.require(air >= std::stod(prev[ca]) - tol, "L ordering broken at " + row[cx] + " dB, L=" + row[cl]);
    }
  }
  if (ch.ok) ch.detail = std::to_string(r.table.rows.size()) + " points";
  return ch;
}

MimoChannelTaps diagonal(const ChannelTaps& a) {
  std::vector<ComplexMatrix> taps;
  for (const auto& t : a.taps()) taps.emplace_back(2, std::vector<Complex>{t, 0.0, 0.0, t});
  return MimoChannelTaps(taps);
}

Eigen::MatrixXcd response_at(const MimoChannelTaps& ch, double w) {
  const auto n = static_cast<Eigen::Index>(ch.dim());
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (int l = 0; l <= ch.memory(); ++l) {
    const Complex e = std::exp(Complex(0.0, -w * l));
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) h(r, c) += ch.taps()[l](r, c) * e;
    }
  }
  return h;
}

double fine_grid_mimo_capacity(const MimoChannelTaps& ch, double n0) {
  const std::size_t m = 1 << 16;
  const auto n = ch.dim();
  std::vector<double> gains;
  gains.reserve(n * m);
  for (std::size_t i = 0; i < m; ++i) {
    const double w = -kPi + kTwoPi * static_cast<double>(i) / static_cast<double>(m);
    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(response_at(ch, w));
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(n); ++k) {
      gains.push_back(svd.singularValues()(k) * svd.singularValues()(k));
    }
  }
  auto power = [&](double theta) {
    double p = 0.0;
    for (double g : gains) {
      if (g > 0.0) p += std::max(0.0, theta - n0 / g);
    }
    return p / static_cast<double>(m);
  };
  const double target = static_cast<double>(n);
  double lo = 0.0, hi = 1.0;
  while (power(hi) < target) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (power(mid) < target ? lo : hi) = mid;
  }
  const double theta = 0.5 * (lo + hi);
  double cap = 0.0;
  for (double g : gains) {
    if (g > 0.0) cap += std::log2(1.0 + g * std::max(0.0, theta - n0 / g) / n0);
  }
  return cap / static_cast<double>(m);
}

Check mimo_reductions() {
  Check ch;
  const FrequencyGrid grid(1024);
  const double n0 = 0.1;

  std::vector<ComplexMatrix> single;
  for (const auto& t : kRefChannel.taps()) single.emplace_back(1, std::vector<Complex>{t});
  const auto one = optimize_mimo(MimoChannelTaps(single), n0, 1, options(), grid);
  const auto scalar = optimize_transmit_filter(kRefChannel, n0, 1, options(), grid);
  const double e1 = std::abs(one.total_air - scalar.air);
  ch.require(e1 <= 1e-12, fmt("N=1 differs by %.3g bits", e1));

  const auto diag = optimize_mimo(diagonal(kRefChannel), n0, 1, options(), grid);
  const double e2 = std::abs(diag.total_air - 2.0 * scalar.air);
  ch.require(e2 <= 1e-4, fmt("diagonal differs by %.3g bits", e2));

  const FrequencyGrid small(512);
  const auto rnd = random_mimo_channel(2, 3, 7);
  const double n0r = 2.0 / std::pow(10.0, 0.5);
  const auto ra = optimize_mimo(rnd, n0r, 1, options(), small);
  const auto rb = optimize_mimo(rnd.rotated(random_unitary(2, 99)), n0r, 1, options(), small);
  const double e3 = std::abs(ra.total_air - rb.total_air);
  ch.require(e3 <= 1e-6, fmt("rotation changes air by %.3g bits", e3));

  const double cap = mimo_waterfill_capacity(svd_spectra(rnd, FrequencyGrid(1 << 16)), 0.2);
  const double e4 = std::abs(cap - fine_grid_mimo_capacity(rnd, 0.2));
  ch.require(e4 <= 1e-6, fmt("waterfill capacity differs by %.3g bits", e4));
  if (ch.ok) ch.detail = fmt("errors %.2g / %.2g / %.2g", e1, e2, e3) + fmt(" / %.2g bits", e4);
  return ch;
}

// Linear interpolation of y(x) on sorted points; nan outside the range.
double interpolate(const std::vector<std::pair<double, double>>& pts, double x) {
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (x >= pts[i - 1].first && x <= pts[i].first) {
      const double t = (x - pts[i - 1].first) / (pts[i].first - pts[i - 1].first);
      return pts[i - 1].second + t * (pts[i].second - pts[i - 1].second);
    }
  }
  return std::nan("");
}

Check ftn_behavior() {
  Check ch;
  const FrequencyGrid grid(4096);
  double worst_flat = 0.0;
  for (int l : {1, 2}) {
    for (double snr : {0.0, 10.0}) {
      const auto d = optimize_pulse(FtnScenario(0.5, 1.0, n0_db(snr)), l, options(), grid, PulseOptions{false});
      const auto v = d.discrete_spectrum.values();
      const double mean = grid_mean(v);
      for (double s : v) worst_flat = std::max(worst_flat, std::abs(s - mean) / mean);
    }
  }
  ch.require(worst_flat <= 1e-3, fmt("2WT=1 spectrum deviates by %.3g", worst_flat));

  const double product = 0.48, t = 1.0, w = product / (2.0 * t);
  int compared = 0;
  double worst_margin = 1e300;
  for (int l : {1, 2}) {
    std::vector<std::pair<double, double>> opt, rrc;
    std::vector<std::vector<double>> warm;
    for (double snr = -4.0; snr <= 14.0 + 1e-9; snr += 0.5) {
      const double n0 = n0_db(snr);
      const auto d = optimize_pulse(FtnScenario(w, t, n0), l, options(), grid, PulseOptions{}, warm);
      warm.assign(1, d.filter.search_point);
      opt.emplace_back(ebn0_db(d.air, n0), d.ase);
      const auto sv = rrc_folded_spectrum(0.2, FtnScenario(w, t, n0), grid);
      const double air = solve_shortening_rate_only(ShorteningProblem(sv, n0, l)).air;
      rrc.emplace_back(ebn0_db(air, n0), spectral_efficiency(air, product));
    }
    std::sort(opt.begin(), opt.end());
    std::sort(rrc.begin(), rrc.end());
    for (const auto& curve : {opt, rrc}) {
      for (const auto& [eb, ase] : curve) {
        ch.require(ase <= awgn_ase_bound(eb) + kSlack, fmt("ASE above AWGN bound at %.2f dB, L=%g", eb, l));
      }
    }
    for (const auto& [eb, ase] : rrc) {
      if (eb < 2.0 || eb > 10.0) continue;
      const double o = interpolate(opt, eb);
      if (std::isnan(o)) continue;
      ++compared;
      worst_margin = std::min(worst_margin, o - ase);
      ch.require(o >= ase - kSlack, fmt("RRC above optimized at %.2f dB, L=%g", eb, l));
    }
    for (const auto& [eb, ase] : opt) {
      if (eb < 2.0 || eb > 10.0) continue;
      const double r = interpolate(rrc, eb);
      if (std::isnan(r)) continue;
      ++compared;
      worst_margin = std::min(worst_margin, ase - r);
      ch.require(ase >= r - kSlack, fmt("RRC above optimized at %.2f dB, L=%g", eb, l));
    }
  }
  ch.require(compared > 0, "no comparison points in [2, 10] dB");
  if (ch.ok) {
    ch.detail = fmt("2WT=1 deviation %.2g, %g comparisons, min ASE margin %.4f", worst_flat, compared, worst_margin);
  }
  return ch;
}

std::vector<Complex> random_lags(int order, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Complex> taps(order + 3);
  for (auto& t : taps) t = Complex(g(rng), g(rng));
  std::vector<Complex> lags(order + 1);
  for (int k = 0; k <= order; ++k) {
    Complex s{};
    for (std::size_t i = k; i < taps.size(); ++i) s += taps[i] * std::conj(taps[i - k]);
    lags[k] = s;
  }
  lags[0] += 0.1;
  return lags;
}

Check numerical_hygiene() {
  Check ch;
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int order = 0; order <= 8; ++order) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto lags = random_lags(order, rng);
      const auto a = levinson_predictor(lags);
      const auto b = dense_predictor(lags);
      worst = std::max(worst, std::abs(a.residual - b.residual));
      for (std::size_t i = 0; i < a.coeffs.size(); ++i) worst = std::max(worst, std::abs(a.coeffs[i] - b.coeffs[i]));
    }
  }
  ch.require(worst <= 1e-10, fmt("Levinson vs dense %.3g", worst));

  auto fig2 = [](std::size_t m, int threads) {
    auto cfg = parse_experiment_config(R"([experiment]
command = fig2
[channel]
taps = 0.5 0.5 -0.5 0,-0.5
[sweep]
snr_db = 0,8,16
L = 1,2,3
)",
                                       "hygiene");
    cfg.grid_size = m;
    cfg.threads = threads;
    return run_experiment(cfg);
  };
  const auto coarse = fig2(2048, 1);
  const auto fine = fig2(4096, 1);
  double drift = 0.0;
  for (std::size_t i = 0; i < coarse.table.rows.size(); ++i) {
    for (std::size_t c : {2u, 3u, 4u}) {
      drift = std::max(drift, std::abs(std::stod(coarse.table.rows[i][c]) - std::stod(fine.table.rows[i][c])));
    }
  }
  ch.require(drift < 1e-4, fmt("doubling M moves air by %.3g bits", drift));

  const auto again = fig2(4096, 1);
  const auto threaded = fig2(4096, 4);
  const auto csv = render_csv(fine.table, fine.config_hash, fine.command);
  ch.require(csv == render_csv(again.table, again.config_hash, again.command), "rerun CSV differs");
  ch.require(csv == render_csv(threaded.table, threaded.config_hash, threaded.command), "threaded CSV differs");
  if (ch.ok) ch.detail = fmt("Levinson vs dense %.2g, grid drift %.2g bits, CSVs identical", worst, drift);
  return ch;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Check()>>> criteria{
      {"memoryless exactness", memoryless_exactness},
      {"closed-form receiver oracle", receiver_oracle},
      {"optimized vs flat ordering", fig2_ordering},
      {"combined memory of waterfilling", waterfill_memory},
      {"waterfilling spectrum under constrained L", fig3_behavior},
      {"BPSK simulation oracle", simulation_oracle},
      {"BPSK vs Gaussian consistency", fig4_consistency},
      {"MIMO reductions", mimo_reductions},
      {"bandlimited and faster-than-Nyquist pulses", ftn_behavior},
      {"numerical hygiene", numerical_hygiene},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
      c = criteria[i].second();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    if (!c.ok) ++failed;
    std::printf("%s %zu %s: %s [%.1f s]\n", c.ok ? "PASS" : "FAIL", i + 1, criteria[i].first, c.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
