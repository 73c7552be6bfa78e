// csopt command-line front end. Runs one experiment command from a config
// file, writes the CSV (and summary / attachments) and prints the summary.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "csopt/csopt.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int exit_code_for(int status) {
  switch (status) {
    case CSOPT_OK:
      return kExitOk;
    case CSOPT_ERR_INVALID_ARGUMENT:
    case CSOPT_ERR_CONFIG:
    case CSOPT_ERR_DOMAIN:
    case CSOPT_ERR_IO:
      return kExitConfig;
    default:
      return kExitNumerical;
  }
}

int fail(int status, const char* what) {
  std::fprintf(stderr, "csopt: %s: %s: %s\n", what, csopt_status_string(status), csopt_last_error());
  return exit_code_for(status);
}

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> grid;
  std::optional<int> threads;
};

int run(const std::string& command, const Options& opt) {
  csopt_experiment* exp = nullptr;
  int st = csopt_experiment_load(opt.config.c_str(), &exp);
  if (st != CSOPT_OK) return fail(st, "loading config");

  auto cleanup = [&](int code) {
    csopt_experiment_destroy(exp);
    return code;
  };
  if ((st = csopt_experiment_set_command(exp, command.c_str())) != CSOPT_OK) return cleanup(fail(st, "command"));
  if (opt.seed && (st = csopt_experiment_set_seed(exp, *opt.seed)) != CSOPT_OK) return cleanup(fail(st, "--seed"));
  if (opt.grid && (st = csopt_experiment_set_grid(exp, *opt.grid)) != CSOPT_OK) return cleanup(fail(st, "--grid"));
  if (opt.threads && (st = csopt_experiment_set_threads(exp, *opt.threads)) != CSOPT_OK) {
    return cleanup(fail(st, "--threads"));
  }

  csopt_report* report = nullptr;
  if ((st = csopt_experiment_run(exp, &report)) != CSOPT_OK) return cleanup(fail(st, command.c_str()));

  int code = kExitOk;
  if (opt.out.empty()) {
    const char* csv = nullptr;
    csopt_report_csv(report, &csv);
    std::fputs(csv, stdout);
  } else {
    if ((st = csopt_report_write(report, opt.out.c_str())) != CSOPT_OK) {
      code = fail(st, "writing output");
    } else {
      const char* summary = nullptr;
      csopt_report_summary(report, &summary);
      std::fputs(summary, stdout);
    }
  }
  csopt_report_destroy(report);
  return cleanup(code);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transmit-filter and channel-shortening receiver design"};
  app.set_version_flag("--version", csopt_version());
  app.require_subcommand(1);

  const char* commands[][2] = {
      {"shorten", "channel-shortening receiver for the channel at each SNR and L"},
      {"optimize", "optimized transmit filter with diagnostics"},
      {"waterfill", "waterfilling spectrum, capacity and combined memory"},
      {"mimo", "MIMO-ISI subchannel optimization"},
      {"ftn", "bandlimited / faster-than-Nyquist pulse optimization"},
      {"airsim", "Monte-Carlo AIR of the shortening detector"},
      {"fig2", "optimized vs flat AIR sweep"},
      {"fig3", "waterfilling spectrum under constrained L"},
      {"fig4", "BPSK AIR sweep by simulation"},
      {"fig6", "MIMO-ISI sweep over E_H/N0"},
      {"fig7", "FTN spectral efficiency vs Eb/N0"},
  };

  Options opt;
  std::string chosen;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "experiment config file")->required();
    sub->add_option("--out", opt.out, "output CSV path; CSV goes to stdout when omitted");
    sub->add_option("--seed", opt.seed, "override the experiment seed");
    sub->add_option("--grid", opt.grid, "override the frequency grid size M");
    sub->add_option("--threads", opt.threads, "worker threads");
    sub->callback([&chosen, n = std::string(name)] { chosen = n; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  return run(chosen, opt);
}
