#include "core/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "core/air_sim.hpp"
#include "core/error.hpp"
#include "core/ftn.hpp"
#include "core/shortening.hpp"
#include "core/waterfilling.hpp"

namespace csopt {

namespace {

using Row = std::vector<std::string>;

std::string num(double v) { return format_number(v); }
std::string num(int v) { return std::to_string(v); }
std::string flag(bool v) { return v ? "1" : "0"; }

std::vector<double> noise_levels(const ExperimentConfig& cfg) {
  std::vector<double> out;
  for (double s : cfg.snr_db) out.push_back(n0_from_snr_db(s));
  return out;
}

/// Indices of `memories` in ascending L order (stable).
std::vector<std::size_t> ascending(const std::vector<int>& memories) {
  std::vector<std::size_t> idx(memories.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return memories[a] < memories[b]; });
  return idx;
}

Report make_report(const ExperimentConfig& cfg, std::vector<std::string> columns) {
  Report r;
  r.command = cfg.command;
  r.config_hash = fnv1a64(canonical_text(cfg));
  r.table.columns = std::move(columns);
  return r;
}

void add_channel_summary(Report& r, const ExperimentConfig& cfg) {
  const ChannelTaps raw(cfg.taps);
  r.summary.emplace_back("channel_memory", num(raw.memory()));
  r.summary.emplace_back("channel_energy", num(raw.energy()));
  r.summary.emplace_back("normalized", cfg.normalize ? "true" : "false");
  r.summary.emplace_back("grid", std::to_string(cfg.grid_size));
}

void append_spectrum(Table& t, double x, int memory, const SampledSpectrum& s) {
  const auto& grid = s.grid();
  for (std::size_t m = 0; m < s.size(); ++m) t.add_row({num(x), num(memory), num(grid.node(m)), num(s[m])});
}

Alphabet config_alphabet(const ExperimentConfig& cfg) {
  return cfg.alphabet == "qpsk" ? Alphabet::qpsk() : Alphabet::bpsk();
}

SimConfig config_sim(const ExperimentConfig& cfg) {
  SimConfig s = cfg.sim;
  s.rng_seed = cfg.seed;
  s.threads = cfg.threads;
  return s;
}

Report run_shorten(const ExperimentConfig& cfg) {
  auto r = make_report(cfg, {"snr_db", "L", "b0", "c", "air", "matched_rate", "condition_estimate",
                             "dense_fallback", "b", "seed_taps", "gr_lags"});
  add_channel_summary(r, cfg);
  const FrequencyGrid grid(cfg.grid_size);
  const auto h = config_channel(cfg);
  grid.require_alias_free(h.memory(), *std::max_element(cfg.memories.begin(), cfg.memories.end()));
  const auto h2 = dtft_power(h, grid);
  for (double snr : cfg.snr_db) {
    const double n0 = n0_from_snr_db(snr);
    for (int l : cfg.memories) {
      const auto sol = solve_shortening(ShorteningProblem(h2, n0, l));
      r.table.add_row({num(snr), num(l), num(sol.b[0].real()), num(sol.c), num(sol.air),
                       num(matched_gaussian_rate(h2, n0)), num(sol.condition_estimate), flag(sol.dense_fallback),
                       format_complex_list(sol.b), format_complex_list(sol.seed_taps),
                       format_complex_list(sol.gr_lags)});
    }
  }
  return r;
}

Report run_optimize(const ExperimentConfig& cfg, bool figure) {
  auto r = figure ? make_report(cfg, {"snr_db", "L", "air_optimized", "air_flat", "capacity"})
                  : make_report(cfg, {"snr_db", "L", "air_optimized", "air_flat", "capacity", "c", "converged",
                                      "restarts_used", "evaluations", "max_gradient", "a0", "off_lags"});
  add_channel_summary(r, cfg);
  const FrequencyGrid grid(cfg.grid_size);
  const auto h = config_channel(cfg);
  grid.require_alias_free(h.memory(), *std::max_element(cfg.memories.begin(), cfg.memories.end()));
  const auto h2 = dtft_power(h, grid);
  const auto n0s = noise_levels(cfg);
  const auto opts = config_optimizer(cfg);
  const auto sweep = optimize_sweep(h2, h.is_real(), n0s, cfg.memories, opts);
  Attachment spectra{".spectrum.csv", Table{{"snr_db", "L", "omega", "value"}, {}}};
  int not_converged = 0;
  for (std::size_t i = 0; i < n0s.size(); ++i) {
    const double capacity = waterfill(h2, n0s[i]).capacity;
    for (std::size_t j = 0; j < cfg.memories.size(); ++j) {
      const auto& f = sweep[i][j];
      const int l = cfg.memories[j];
      if (!f.converged) ++not_converged;
      if (figure) {
        r.table.add_row({num(cfg.snr_db[i]), num(l), num(f.air), num(f.flat_air), num(capacity)});
      } else {
        const auto st = stationarity_check(f, h2, n0s[i], l);
        r.table.add_row({num(cfg.snr_db[i]), num(l), num(f.air), num(f.flat_air), num(capacity), num(f.receiver.c),
                         flag(f.converged), num(f.restarts_used), num(f.evaluations), num(st.max_component),
                         num(f.coeffs.zero_lag), format_complex_list(f.coeffs.off_lags)});
      }
      if (cfg.spectra) append_spectrum(spectra.table, cfg.snr_db[i], l, f.spectrum);
    }
  }
  r.summary.emplace_back("real_coefficients", h.is_real() ? "true" : "false");
  r.summary.emplace_back("points_not_converged", num(not_converged));
  if (cfg.spectra) r.attachments.push_back(std::move(spectra));
  return r;
}

Report run_waterfill(const ExperimentConfig& cfg) {
  auto r = make_report(cfg, {"snr_db", "theta", "capacity", "combined_memory"});
  add_channel_summary(r, cfg);
  const FrequencyGrid grid(cfg.grid_size);
  const auto h = config_channel(cfg);
  const auto h2 = dtft_power(h, grid);
  Attachment spectra{".spectrum.csv", Table{{"snr_db", "L", "omega", "value"}, {}}};
  bool memory_grows = true;
  for (double snr : cfg.snr_db) {
    const auto wf = waterfill(h2, n0_from_snr_db(snr));
    const int k = combined_memory(h, wf.spectrum, cfg.memory_threshold);
    memory_grows = memory_grows && k >= h.memory();
    r.table.add_row({num(snr), num(wf.theta), num(wf.capacity), num(k)});
    if (cfg.spectra) append_spectrum(spectra.table, snr, 0, wf.spectrum);
  }
  r.summary.emplace_back("memory_threshold", num(cfg.memory_threshold));
  r.summary.emplace_back("combined_memory_at_least_channel_memory", memory_grows ? "true" : "false");
  if (cfg.spectra) r.attachments.push_back(std::move(spectra));
  return r;
}

Report run_fig3(const ExperimentConfig& cfg) {
  auto r = make_report(cfg, {"snr_db", "L", "air_waterfill_spectrum", "air_flat", "capacity"});
  add_channel_summary(r, cfg);
  const FrequencyGrid grid(cfg.grid_size);
  const auto h = config_channel(cfg);
  grid.require_alias_free(h.memory(), *std::max_element(cfg.memories.begin(), cfg.memories.end()));
  const auto h2 = dtft_power(h, grid);
  int below_flat = 0;
  for (double snr : cfg.snr_db) {
    const double n0 = n0_from_snr_db(snr);
    const auto wf = waterfill(h2, n0);
    const auto sv = h2.times(wf.spectrum);
    for (int l : cfg.memories) {
      const double air_wf = solve_shortening_rate_only(ShorteningProblem(sv, n0, l)).air;
      const double air_flat = solve_shortening_rate_only(ShorteningProblem(h2, n0, l)).air;
      if (air_wf < air_flat - 1e-9) ++below_flat;
      r.table.add_row({num(snr), num(l), num(air_wf), num(air_flat), num(wf.capacity)});
    }
  }
  r.summary.emplace_back("points_waterfill_below_flat", num(below_flat));
  return r;
}

Report run_airsim(const ExperimentConfig& cfg, bool figure) {
  auto r = figure ? make_report(cfg, {"snr_db", "air", "stderr", "L", "filter_label"})
                  : make_report(cfg, {"snr_db", "air", "stderr", "L", "filter_label", "air_gaussian",
                                      "truncation_loss"});
  add_channel_summary(r, cfg);
  const FrequencyGrid grid(cfg.grid_size);
  const auto h = config_channel(cfg);
  const auto h2 = dtft_power(h, grid);
  const auto n0s = noise_levels(cfg);
  const bool want_opt = std::find(cfg.filters.begin(), cfg.filters.end(), "optimized") != cfg.filters.end();
  std::vector<std::vector<OptimizedFilter>> sweep;
  if (want_opt) sweep = optimize_sweep(h2, h.is_real(), n0s, cfg.memories, config_optimizer(cfg));
  const auto alphabet = config_alphabet(cfg);
  const auto sim = config_sim(cfg);
  double max_loss = 0.0;
  int warnings = 0;
  for (const auto& label : cfg.filters) {
    for (std::size_t j = 0; j < cfg.memories.size(); ++j) {
      const int l = cfg.memories[j];
      for (std::size_t i = 0; i < n0s.size(); ++i) {
        TimeTaps v{std::vector<Complex>(h.taps().begin(), h.taps().end()), 0};
        double air_gauss = 0.0;
        if (label == "optimized") {
          v = convolve(h, transmit_taps(sweep[i][j].spectrum, cfg.transmit_taps));
          air_gauss = sweep[i][j].air;
        } else {
          air_gauss = solve_shortening_rate_only(ShorteningProblem(h2, n0s[i], l)).air;
        }
        const auto est = simulate_shortened_rate(alphabet, v, n0s[i], l, sim, grid);
        max_loss = std::max(max_loss, est.truncation_loss);
        if (est.truncation_warning) ++warnings;
        Row row{num(cfg.snr_db[i]), num(est.air), num(est.stderr_bits), num(l), label};
        if (!figure) {
          row.push_back(num(air_gauss));
          row.push_back(num(est.truncation_loss));
        }
        r.table.add_row(std::move(row));
      }
    }
  }
  r.summary.emplace_back("alphabet", cfg.alphabet);
  r.summary.emplace_back("total_symbols_per_point", num(sim.num_symbols * sim.num_blocks));
  r.summary.emplace_back("max_frontend_truncation_loss", num(max_loss));
  r.summary.emplace_back("frontend_truncation_warnings", num(warnings));
  return r;
}

Report run_mimo(const ExperimentConfig& cfg, bool figure) {
  auto r = figure ? make_report(cfg, {"eh_n0_db", "L", "air_optimized", "air_flat", "capacity"})
                  : make_report(cfg, {"eh_n0_db", "L", "air_optimized", "air_flat", "capacity", "power_fractions",
                                      "converged", "restarts_used"});
  const FrequencyGrid grid(cfg.grid_size);
  const auto ch = config_mimo_channel(cfg);
  grid.require_alias_free(ch.memory(), *std::max_element(cfg.memories.begin(), cfg.memories.end()));
  const auto sub = svd_spectra(ch, grid);
  const auto opts = config_optimizer(cfg);
  const auto order = ascending(cfg.memories);
  const std::size_t n = ch.dim();
  const bool real = ch.is_real();
  r.summary.emplace_back("mimo_dim", num(static_cast<int>(n)));
  r.summary.emplace_back("channel_memory", num(ch.memory()));
  r.summary.emplace_back("e_h", num(ch.energy()));
  r.summary.emplace_back("grid", std::to_string(cfg.grid_size));

  std::vector<std::vector<MimoResult>> results(cfg.snr_db.size());
  std::vector<std::optional<std::vector<double>>> previous(cfg.memories.size());
  for (std::size_t i = 0; i < cfg.snr_db.size(); ++i) {
    const double n0 = ch.energy() / std::pow(10.0, cfg.snr_db[i] / 10.0);
    results[i].resize(cfg.memories.size());
    std::optional<std::size_t> smaller;
    for (std::size_t j : order) {
      const int l = cfg.memories[j];
      std::vector<std::vector<double>> warm;
      if (previous[j]) warm.push_back(*previous[j]);
      if (smaller) {
        const int ls = cfg.memories[*smaller];
        warm.push_back(pad_mimo_point(results[i][*smaller].search_point, n, real, ls, l - ls));
      }
      results[i][j] = optimize_mimo_subchannels(sub, n0, l, real, opts, warm);
      previous[j] = results[i][j].search_point;
      smaller = j;
    }
    const double capacity = mimo_waterfill_capacity(sub, n0);
    for (std::size_t j = 0; j < cfg.memories.size(); ++j) {
      const auto& m = results[i][j];
      if (figure) {
        r.table.add_row({num(cfg.snr_db[i]), num(cfg.memories[j]), num(m.total_air), num(m.flat_air), num(capacity)});
      } else {
        std::string split;
        for (std::size_t k = 0; k < m.power_fractions.size(); ++k) {
          if (k) split += ';';
          split += num(m.power_fractions[k]);
        }
        r.table.add_row({num(cfg.snr_db[i]), num(cfg.memories[j]), num(m.total_air), num(m.flat_air), num(capacity),
                         split, flag(m.converged), num(m.restarts_used)});
      }
    }
  }
  return r;
}

PulseTaps design_taps(const ExperimentConfig& cfg, const PulseDesign& d) {
  return pulse_time_domain(d, cfg.ftn.window == "rectangular" ? Window::Rectangular : Window::Kaiser,
                           cfg.ftn.num_taps, cfg.ftn.kaiser_beta, cfg.ftn.oversampling);
}

std::vector<std::vector<PulseDesign>> pulse_sweep(const ExperimentConfig& cfg, const FrequencyGrid& grid) {
  const double t = cfg.ftn.symbol_time;
  const double w = cfg.ftn.product / (2.0 * t);
  const auto opts = config_optimizer(cfg);
  const auto order = ascending(cfg.memories);
  std::vector<std::vector<PulseDesign>> out(cfg.snr_db.size());
  std::vector<std::optional<std::vector<double>>> previous(cfg.memories.size());
  for (std::size_t i = 0; i < cfg.snr_db.size(); ++i) {
    const FtnScenario sc(w, t, n0_from_snr_db(cfg.snr_db[i]));
    std::vector<std::optional<PulseDesign>> row(cfg.memories.size());
    std::optional<std::size_t> smaller;
    for (std::size_t j : order) {
      const int l = cfg.memories[j];
      std::vector<std::vector<double>> warm;
      if (previous[j] && previous[j]->size() == static_cast<std::size_t>(l)) warm.push_back(*previous[j]);
      if (smaller && row[*smaller]->filter.search_point.size() == static_cast<std::size_t>(cfg.memories[*smaller])) {
        warm.push_back(pad_search_point(row[*smaller]->filter.search_point, true, l - cfg.memories[*smaller]));
      }
      row[j] = optimize_pulse(sc, l, opts, grid, PulseOptions{}, warm);
      previous[j] = row[j]->filter.search_point;
      smaller = j;
    }
    for (auto& d : row) out[i].push_back(std::move(*d));
  }
  return out;
}

Report run_ftn(const ExperimentConfig& cfg) {
  auto r = make_report(cfg, {"snr_db", "L", "product", "air", "ase", "ebn0_db", "leakage", "stopband_leakage",
                             "flat_shortcut"});
  const FrequencyGrid grid(cfg.grid_size);
  const auto designs = pulse_sweep(cfg, grid);
  Attachment taps{".taps.csv", Table{{"snr_db", "L", "t", "re", "im"}, {}}};
  Attachment spectra{".spectrum.csv", Table{{"snr_db", "L", "omega", "value"}, {}}};
  for (std::size_t i = 0; i < designs.size(); ++i) {
    const double n0 = n0_from_snr_db(cfg.snr_db[i]);
    for (std::size_t j = 0; j < designs[i].size(); ++j) {
      const auto& d = designs[i][j];
      const auto pt = design_taps(cfg, d);
      r.table.add_row({num(cfg.snr_db[i]), num(cfg.memories[j]), num(d.product), num(d.air), num(d.ase),
                       num(ebn0_db(d.air, n0)), num(pt.leakage), num(pt.stopband_leakage), flag(d.flat_shortcut)});
      for (std::size_t k = 0; k < pt.times.size(); ++k) {
        taps.table.add_row({num(cfg.snr_db[i]), num(cfg.memories[j]), num(pt.times[k]), num(pt.amplitudes[k].real()),
                            num(pt.amplitudes[k].imag())});
      }
      if (cfg.spectra) append_spectrum(spectra.table, cfg.snr_db[i], cfg.memories[j], d.discrete_spectrum);
    }
  }
  r.summary.emplace_back("product", num(cfg.ftn.product));
  r.summary.emplace_back("faster_than_nyquist", cfg.ftn.product < 1.0 ? "true" : "false");
  r.summary.emplace_back("window", cfg.ftn.window);
  r.summary.emplace_back("num_taps", num(cfg.ftn.num_taps));
  r.attachments.push_back(std::move(taps));
  if (cfg.spectra) r.attachments.push_back(std::move(spectra));
  return r;
}

std::string label_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

Report run_fig7(const ExperimentConfig& cfg) {
  auto r = make_report(cfg, {"ebn0_db", "ase", "label"});
  const FrequencyGrid grid(cfg.grid_size);
  const double product = cfg.ftn.product;
  const double t = cfg.ftn.symbol_time;
  const double w = product / (2.0 * t);
  const bool bpsk = cfg.ftn.input == "bpsk";
  const auto alphabet = Alphabet::bpsk();
  const auto sim = config_sim(cfg);
  const auto designs = pulse_sweep(cfg, grid);
  int skipped = 0;
  std::vector<double> bound_points;

  auto emit = [&](double air, double n0, const std::string& label) {
    if (!(air > 0.0)) {
      ++skipped;
      return;
    }
    const double eb = ebn0_db(air, n0);
    r.table.add_row({num(eb), num(spectral_efficiency(air, product)), label});
    if (label.rfind("optimized", 0) == 0) bound_points.push_back(eb);
  };
  auto rate_for = [&](const SampledSpectrum& sv, double gaussian_air, double n0, int l) {
    if (!bpsk) return gaussian_air;
    return simulate_shortened_rate(alphabet, transmit_taps(sv, cfg.transmit_taps), n0, l, sim, grid).air;
  };

  for (std::size_t j = 0; j < cfg.memories.size(); ++j) {
    const int l = cfg.memories[j];
    for (std::size_t i = 0; i < cfg.snr_db.size(); ++i) {
      const double n0 = n0_from_snr_db(cfg.snr_db[i]);
      const auto& d = designs[i][j];
      emit(rate_for(d.discrete_spectrum, d.air, n0, l), n0, "optimized_L" + std::to_string(l));
    }
    for (double alpha : cfg.ftn.alphas) {
      for (std::size_t i = 0; i < cfg.snr_db.size(); ++i) {
        const double n0 = n0_from_snr_db(cfg.snr_db[i]);
        const auto sv = rrc_folded_spectrum(alpha, FtnScenario(w, t, n0), grid);
        const double gauss = solve_shortening_rate_only(ShorteningProblem(sv, n0, l)).air;
        emit(rate_for(sv, gauss, n0, l), n0, "rrc" + label_number(alpha) + "_L" + std::to_string(l));
      }
    }
  }
  std::sort(bound_points.begin(), bound_points.end());
  bound_points.erase(std::unique(bound_points.begin(), bound_points.end()), bound_points.end());
  for (double eb : bound_points) r.table.add_row({num(eb), num(awgn_ase_bound(eb)), "awgn_bound"});
  r.summary.emplace_back("product", num(product));
  r.summary.emplace_back("input", cfg.ftn.input);
  r.summary.emplace_back("skipped_nonpositive_rate_points", num(skipped));
  return r;
}

}  // namespace

double n0_from_snr_db(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

ChannelTaps config_channel(const ExperimentConfig& cfg) {
  ChannelTaps h(cfg.taps);
  return cfg.normalize ? h.normalized() : h;
}

MimoChannelTaps config_mimo_channel(const ExperimentConfig& cfg) {
  const auto& spec = cfg.mimo;
  if (spec.taps.empty()) return random_mimo_channel(spec.dim, spec.channel_memory, spec.channel_seed);
  const std::size_t block = spec.dim * spec.dim;
  std::vector<ComplexMatrix> taps;
  for (std::size_t start = 0; start < spec.taps.size(); start += block) {
    taps.emplace_back(spec.dim, std::vector<Complex>(spec.taps.begin() + static_cast<std::ptrdiff_t>(start),
                                                     spec.taps.begin() + static_cast<std::ptrdiff_t>(start + block)));
  }
  return MimoChannelTaps(std::move(taps));
}

OptimizerOptions config_optimizer(const ExperimentConfig& cfg) {
  OptimizerOptions o = cfg.optimizer;
  o.rng_seed = cfg.seed;
  o.threads = cfg.threads;
  return o;
}

std::vector<std::vector<OptimizedFilter>> optimize_sweep(const SampledSpectrum& h2, bool real_coefficients,
                                                         const std::vector<double>& n0s,
                                                         const std::vector<int>& memories,
                                                         const OptimizerOptions& options) {
  const auto order = ascending(memories);
  std::vector<std::vector<OptimizedFilter>> out(n0s.size());
  std::vector<std::optional<std::vector<double>>> previous(memories.size());
  for (std::size_t i = 0; i < n0s.size(); ++i) {
    std::vector<std::optional<OptimizedFilter>> row(memories.size());
    std::optional<std::size_t> smaller;
    for (std::size_t j : order) {
      const int l = memories[j];
      std::vector<std::vector<double>> warm;
      if (previous[j]) warm.push_back(*previous[j]);
      if (smaller) {
        warm.push_back(pad_search_point(row[*smaller]->search_point, real_coefficients, l - memories[*smaller]));
      }
      row[j] = optimize_transmit_spectrum(h2, n0s[i], l, real_coefficients, options, warm);
      previous[j] = row[j]->search_point;
      smaller = j;
    }
    for (auto& f : row) out[i].push_back(std::move(*f));
  }
  return out;
}

Report run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto& c = cfg.command;
  if (c == "shorten") return run_shorten(cfg);
  if (c == "optimize") return run_optimize(cfg, false);
  if (c == "fig2") return run_optimize(cfg, true);
  if (c == "waterfill") return run_waterfill(cfg);
  if (c == "fig3") return run_fig3(cfg);
  if (c == "airsim") return run_airsim(cfg, false);
  if (c == "fig4") return run_airsim(cfg, true);
  if (c == "mimo") return run_mimo(cfg, false);
  if (c == "fig6") return run_mimo(cfg, true);
  if (c == "ftn") return run_ftn(cfg);
  return run_fig7(cfg);
}

}  // namespace csopt
