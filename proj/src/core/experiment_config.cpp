#include "core/experiment_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "core/error.hpp"

namespace csopt {

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

double parse_double(std::string_view s) {
  s = trim(s);
  double value = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, value);
  if (s.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(value)) {
    throw ConfigError("expected a number, got '" + std::string(s) + "'");
  }
  return value;
}

long long parse_integer(std::string_view s) {
  s = trim(s);
  long long value = 0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, value);
  if (s.empty() || res.ec != std::errc() || res.ptr != end) {
    throw ConfigError("expected an integer, got '" + std::string(s) + "'");
  }
  return value;
}

int parse_int(std::string_view s) {
  const long long v = parse_integer(s);
  if (v < -2147483647LL || v > 2147483647LL) throw ConfigError("integer out of range: '" + std::string(s) + "'");
  return static_cast<int>(v);
}

std::uint64_t parse_seed(std::string_view s) {
  const long long v = parse_integer(s);
  if (v < 0) throw ConfigError("seed must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

bool parse_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("expected a boolean, got '" + std::string(s) + "'");
}

std::vector<std::string> parse_words(std::string_view s) {
  std::vector<std::string> out;
  for (auto w : split(s, ',')) {
    if (w.empty()) throw ConfigError("empty list item");
    out.emplace_back(w);
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string complex_list_text(const std::vector<Complex>& taps) {
  std::string out;
  for (std::size_t i = 0; i < taps.size(); ++i) {
    if (i) out += ' ';
    out += fmt(taps[i].real()) + "," + fmt(taps[i].imag());
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_same_v<T, double>) {
      out += fmt(v[i]);
    } else if constexpr (std::is_same_v<T, std::string>) {
      out += v[i];
    } else {
      out += std::to_string(v[i]);
    }
  }
  return out;
}

using Setter = void (*)(ExperimentConfig&, std::string_view);

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"experiment.command", [](ExperimentConfig& c, std::string_view v) { c.command = std::string(trim(v)); }},
      {"experiment.grid",
       [](ExperimentConfig& c, std::string_view v) {
         const long long m = parse_integer(v);
         if (m < 4) throw ConfigError("grid must be >= 4");
         c.grid_size = static_cast<std::size_t>(m);
       }},
      {"experiment.seed", [](ExperimentConfig& c, std::string_view v) { c.seed = parse_seed(v); }},
      {"experiment.threads", [](ExperimentConfig& c, std::string_view v) { c.threads = parse_int(v); }},
      {"experiment.normalize", [](ExperimentConfig& c, std::string_view v) { c.normalize = parse_bool(v); }},
      {"experiment.spectra", [](ExperimentConfig& c, std::string_view v) { c.spectra = parse_bool(v); }},
      {"channel.taps", [](ExperimentConfig& c, std::string_view v) { c.taps = parse_complex_list(v); }},
      {"sweep.snr_db", [](ExperimentConfig& c, std::string_view v) { c.snr_db = parse_number_list(v); }},
      {"sweep.eh_n0_db", [](ExperimentConfig& c, std::string_view v) { c.snr_db = parse_number_list(v); }},
      {"sweep.L",
       [](ExperimentConfig& c, std::string_view v) {
         c.memories.clear();
         for (double x : parse_number_list(v)) {
           if (x != std::floor(x)) throw ConfigError("L values must be integers");
           c.memories.push_back(static_cast<int>(x));
         }
       }},
      {"optimizer.restarts", [](ExperimentConfig& c, std::string_view v) { c.optimizer.restarts = parse_int(v); }},
      {"optimizer.max_iterations",
       [](ExperimentConfig& c, std::string_view v) { c.optimizer.max_iterations = parse_int(v); }},
      {"optimizer.x_tolerance",
       [](ExperimentConfig& c, std::string_view v) { c.optimizer.x_tolerance = parse_double(v); }},
      {"optimizer.f_tolerance",
       [](ExperimentConfig& c, std::string_view v) { c.optimizer.f_tolerance = parse_double(v); }},
      {"optimizer.init_scale",
       [](ExperimentConfig& c, std::string_view v) { c.optimizer.init_scale = parse_double(v); }},
      {"optimizer.initial_step",
       [](ExperimentConfig& c, std::string_view v) { c.optimizer.initial_step = parse_double(v); }},
      {"optimizer.a_max",
       [](ExperimentConfig& c, std::string_view v) { c.optimizer.water_level.a_max = parse_double(v); }},
      {"mimo.n",
       [](ExperimentConfig& c, std::string_view v) {
         const int n = parse_int(v);
         if (n < 1) throw ConfigError("mimo.n must be >= 1");
         c.mimo.dim = static_cast<std::size_t>(n);
       }},
      {"mimo.memory", [](ExperimentConfig& c, std::string_view v) { c.mimo.channel_memory = parse_int(v); }},
      {"mimo.seed", [](ExperimentConfig& c, std::string_view v) { c.mimo.channel_seed = parse_seed(v); }},
      {"mimo.taps", [](ExperimentConfig& c, std::string_view v) { c.mimo.taps = parse_complex_list(v); }},
      {"ftn.product", [](ExperimentConfig& c, std::string_view v) { c.ftn.product = parse_double(v); }},
      {"ftn.symbol_time", [](ExperimentConfig& c, std::string_view v) { c.ftn.symbol_time = parse_double(v); }},
      {"ftn.alphas", [](ExperimentConfig& c, std::string_view v) { c.ftn.alphas = parse_number_list(v); }},
      {"ftn.input", [](ExperimentConfig& c, std::string_view v) { c.ftn.input = std::string(trim(v)); }},
      {"ftn.num_taps", [](ExperimentConfig& c, std::string_view v) { c.ftn.num_taps = parse_int(v); }},
      {"ftn.window", [](ExperimentConfig& c, std::string_view v) { c.ftn.window = std::string(trim(v)); }},
      {"ftn.kaiser_beta", [](ExperimentConfig& c, std::string_view v) { c.ftn.kaiser_beta = parse_double(v); }},
      {"ftn.oversampling", [](ExperimentConfig& c, std::string_view v) { c.ftn.oversampling = parse_int(v); }},
      {"sim.num_symbols", [](ExperimentConfig& c, std::string_view v) { c.sim.num_symbols = parse_int(v); }},
      {"sim.num_blocks", [](ExperimentConfig& c, std::string_view v) { c.sim.num_blocks = parse_int(v); }},
      {"sim.frontend_taps", [](ExperimentConfig& c, std::string_view v) { c.sim.frontend_taps = parse_int(v); }},
      {"sim.guard", [](ExperimentConfig& c, std::string_view v) { c.sim.guard = parse_int(v); }},
      {"sim.transmit_taps", [](ExperimentConfig& c, std::string_view v) { c.transmit_taps = parse_int(v); }},
      {"sim.alphabet", [](ExperimentConfig& c, std::string_view v) { c.alphabet = std::string(trim(v)); }},
      {"sim.filters", [](ExperimentConfig& c, std::string_view v) { c.filters = parse_words(v); }},
      {"waterfill.threshold",
       [](ExperimentConfig& c, std::string_view v) { c.memory_threshold = parse_double(v); }},
  };
  return table;
}

}  // namespace

std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (auto item : split(text, ',')) {
    if (item.empty()) throw ConfigError("empty list item");
    const auto parts = split(item, ':');
    if (parts.size() == 1) {
      out.push_back(parse_double(parts[0]));
    } else if (parts.size() == 3) {
      const double start = parse_double(parts[0]);
      const double step = parse_double(parts[1]);
      const double stop = parse_double(parts[2]);
      if (step == 0.0 || (stop - start) / step < 0.0) {
        throw ConfigError("range '" + std::string(item) + "' has a zero step or points away from its stop");
      }
      const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9)) + 1;
      if (count > 100000) throw ConfigError("range '" + std::string(item) + "' expands to too many values");
      for (long long i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
    } else {
      throw ConfigError("list item '" + std::string(item) + "' is neither a number nor start:step:stop");
    }
  }
  return out;
}

std::vector<Complex> parse_complex_list(std::string_view text) {
  std::vector<Complex> out;
  for (auto token : split_whitespace(text)) {
    const auto parts = split(token, ',');
    if (parts.size() == 1) {
      out.emplace_back(parse_double(parts[0]), 0.0);
    } else if (parts.size() == 2) {
      out.emplace_back(parse_double(parts[0]), parse_double(parts[1]));
    } else {
      throw ConfigError("tap '" + std::string(token) + "' is not a 're,im' pair");
    }
  }
  return out;
}

ExperimentConfig parse_experiment_config(std::string_view text, std::string_view source) {
  ExperimentConfig cfg;
  std::string section;
  std::set<std::string> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto next = text.find('\n', pos);
    auto line = text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
    pos = next == std::string_view::npos ? text.size() + 1 : next + 1;
    ++line_no;
    const auto prefix = std::string(source) + ":" + std::to_string(line_no) + ": ";
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(prefix + "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      static const std::set<std::string> sections{"experiment", "channel", "sweep", "optimizer",
                                                  "mimo",       "ftn",     "sim",   "waterfill"};
      if (!sections.count(section)) throw ConfigError(prefix + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(prefix + "expected 'key = value'");
    if (section.empty()) throw ConfigError(prefix + "key outside of any [section]");
    const auto key = section + "." + std::string(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(prefix + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(prefix + "duplicate key '" + key + "'");
    try {
      it->second(cfg, value);
    } catch (const Error& e) {
      throw ConfigError(prefix + key + ": " + e.what());
    }
  }
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  const auto& cmds = known_commands();
  if (std::find(cmds.begin(), cmds.end(), cfg.command) == cmds.end()) {
    throw ConfigError("unknown command '" + cfg.command + "'");
  }
  if (cfg.grid_size < 4 || cfg.grid_size % 2 != 0) throw ConfigError("grid size M must be even and >= 4");
  if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
  if (cfg.snr_db.empty()) throw ConfigError("sweep.snr_db must list at least one value");
  const bool needs_memory = cfg.command != "waterfill";
  if (needs_memory && cfg.memories.empty()) throw ConfigError("sweep.L must list at least one value");
  for (int l : cfg.memories) {
    if (l < 0) throw ConfigError("L values must be >= 0");
  }
  validate(cfg.optimizer);
  const bool scalar = cfg.command == "shorten" || cfg.command == "optimize" || cfg.command == "waterfill" ||
                      cfg.command == "airsim" || cfg.command == "fig2" || cfg.command == "fig3" ||
                      cfg.command == "fig4";
  if (scalar && cfg.taps.empty()) throw ConfigError("channel.taps is required for command '" + cfg.command + "'");
  if (cfg.command == "mimo" || cfg.command == "fig6") {
    const std::size_t block = cfg.mimo.dim * cfg.mimo.dim;
    if (!cfg.mimo.taps.empty() && cfg.mimo.taps.size() % block != 0) {
      throw ConfigError("mimo.taps must hold a multiple of n*n entries");
    }
    if (cfg.mimo.taps.empty() && cfg.mimo.channel_memory < 0) throw ConfigError("mimo.memory must be >= 0");
  }
  if (cfg.command == "ftn" || cfg.command == "fig7") {
    if (!(cfg.ftn.product > 0.0)) throw ConfigError("ftn.product must be positive");
    if (!(cfg.ftn.symbol_time > 0.0)) throw ConfigError("ftn.symbol_time must be positive");
    if (cfg.ftn.input != "gaussian" && cfg.ftn.input != "bpsk") throw ConfigError("ftn.input must be gaussian or bpsk");
    if (cfg.ftn.window != "kaiser" && cfg.ftn.window != "rectangular") {
      throw ConfigError("ftn.window must be kaiser or rectangular");
    }
    if (cfg.ftn.num_taps < 1 || cfg.ftn.num_taps % 2 == 0) throw ConfigError("ftn.num_taps must be odd and >= 1");
    if (cfg.ftn.oversampling < 1) throw ConfigError("ftn.oversampling must be >= 1");
    for (double a : cfg.ftn.alphas) {
      if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("ftn.alphas must lie in [0, 1]");
    }
  }
  if (cfg.command == "airsim" || cfg.command == "fig4" || (cfg.command == "fig7" && cfg.ftn.input == "bpsk")) {
    for (int l : cfg.memories) validate(cfg.sim, l);
    if (cfg.transmit_taps < 1 || cfg.transmit_taps % 2 == 0) throw ConfigError("sim.transmit_taps must be odd");
    if (cfg.alphabet != "bpsk" && cfg.alphabet != "qpsk") throw ConfigError("sim.alphabet must be bpsk or qpsk");
    for (const auto& f : cfg.filters) {
      if (f != "optimized" && f != "flat") throw ConfigError("sim.filters entries must be optimized or flat");
    }
  }
  if (!(cfg.memory_threshold > 0.0)) throw ConfigError("waterfill.threshold must be positive");
}

std::string canonical_text(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[experiment]\ncommand=" << c.command << "\ngrid=" << c.grid_size << "\nseed=" << c.seed
      << "\nnormalize=" << (c.normalize ? "true" : "false")
      << "\nspectra=" << (c.spectra ? "true" : "false") << "\n[channel]\ntaps=" << complex_list_text(c.taps)
      << "\n[sweep]\nsnr_db=" << join(c.snr_db) << "\nL=" << join(c.memories) << "\n[optimizer]\nrestarts="
      << c.optimizer.restarts << "\nmax_iterations=" << c.optimizer.max_iterations
      << "\nx_tolerance=" << fmt(c.optimizer.x_tolerance) << "\nf_tolerance=" << fmt(c.optimizer.f_tolerance)
      << "\ninit_scale=" << fmt(c.optimizer.init_scale) << "\ninitial_step=" << fmt(c.optimizer.initial_step)
      << "\na_max=" << fmt(c.optimizer.water_level.a_max) << "\n[mimo]\nn=" << c.mimo.dim
      << "\nmemory=" << c.mimo.channel_memory << "\nseed=" << c.mimo.channel_seed
      << "\ntaps=" << complex_list_text(c.mimo.taps) << "\n[ftn]\nproduct=" << fmt(c.ftn.product)
      << "\nsymbol_time=" << fmt(c.ftn.symbol_time) << "\nalphas=" << join(c.ftn.alphas)
      << "\ninput=" << c.ftn.input << "\nnum_taps=" << c.ftn.num_taps << "\nwindow=" << c.ftn.window
      << "\nkaiser_beta=" << fmt(c.ftn.kaiser_beta) << "\noversampling=" << c.ftn.oversampling
      << "\n[sim]\nnum_symbols=" << c.sim.num_symbols << "\nnum_blocks=" << c.sim.num_blocks
      << "\nfrontend_taps=" << c.sim.frontend_taps << "\nguard=" << c.sim.guard
      << "\ntransmit_taps=" << c.transmit_taps << "\nalphabet=" << c.alphabet << "\nfilters=" << join(c.filters)
      << "\n[waterfill]\nthreshold=" << fmt(c.memory_threshold) << "\n";
  return out.str();
}

}  // namespace csopt
