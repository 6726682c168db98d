// SPDX-License-Identifier: Apache-2.0
//
// Experiment CLI: reproduces the figure-level sweeps as CSV files and runs
// the invariant verification suite.
//
// Exit codes: 0 success, 1 verification failure, 2 configuration error.
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qmimo/experiments.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_path;
  long long seed = -1;
  int trials = -1;
  bool full = false;
};

void add_common(CLI::App* sub, CommonArgs* args, bool needs_out = true) {
  sub->add_option("--config", args->config_path, "experiment config file (key = value, [section] headers)");
  auto* out = sub->add_option("--out", args->out_path, "output CSV path");
  if (needs_out) out->required();
  sub->add_option("--seed", args->seed, "master RNG seed override");
  sub->add_option("--trials", args->trials, "Monte-Carlo trial count override");
  sub->add_flag("--full", args->full, "publication-scale trial counts");
}

qmimo::Config load_config(const CommonArgs& args) {
  qmimo::Config cfg;
  if (!args.config_path.empty()) cfg = qmimo::Config::from_file(args.config_path);
  if (args.seed >= 0) cfg.set("run.seed", std::to_string(args.seed));
  if (args.trials >= 0) cfg.set("run.trials", std::to_string(args.trials));
  if (args.full) {
    if (!cfg.has("run.trials") || args.trials < 0)
      cfg.set("run.trials", std::to_string(std::max(500, cfg.get_int("run.trials", 0))));
    cfg.set("run.symbols", std::to_string(std::max(100000, cfg.get_int("run.symbols", 0))));
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantized massive-MIMO downlink: asymptotic analysis and simulation"};
  app.require_subcommand(1);

  CommonArgs sweep_rho_args, sweep_beta_args, rate_args, ber_args, table_args, verify_args;

  auto* sweep_rho = app.add_subcommand("sweep-rho", "asymptotic SIQNR over a regularization grid");
  add_common(sweep_rho, &sweep_rho_args);
  auto* sweep_beta = app.add_subcommand("sweep-beta", "sum rate per antenna over user loading");
  add_common(sweep_beta, &sweep_beta_args);
  auto* rate = app.add_subcommand("rate-vs-snr", "per-user rate across SNR");
  add_common(rate, &rate_args);
  auto* ber = app.add_subcommand("ber-vs-snr", "uncoded QPSK bit error rate across SNR");
  add_common(ber, &ber_args);
  auto* table = app.add_subcommand("beta-table", "optimal user loading lookup table");
  add_common(table, &table_args);
  auto* verify = app.add_subcommand("verify", "run the invariant suite");
  add_common(verify, &verify_args, /*needs_out=*/false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep_rho->parsed()) {
      qmimo::run_sweep_rho(load_config(sweep_rho_args), sweep_rho_args.out_path);
    } else if (sweep_beta->parsed()) {
      qmimo::run_sweep_beta(load_config(sweep_beta_args), sweep_beta_args.out_path);
    } else if (rate->parsed()) {
      qmimo::run_rate_vs_snr(load_config(rate_args), rate_args.out_path);
    } else if (ber->parsed()) {
      qmimo::run_ber_vs_snr(load_config(ber_args), ber_args.out_path);
    } else if (table->parsed()) {
      qmimo::run_beta_table(load_config(table_args), table_args.out_path);
    } else if (verify->parsed()) {
      qmimo::VerifyOptions opt;
      if (verify_args.seed >= 0) opt.seed = static_cast<std::uint64_t>(verify_args.seed);
      qmimo::VerifyReport rep = qmimo::verify(opt);
      for (const auto& [name, ok] : rep.checks)
        std::printf("%s %s\n", ok ? "PASS" : "FAIL", name.c_str());
      std::printf("%s: %zu checks\n", rep.all_passed() ? "OK" : "FAILED", rep.checks.size());
      return rep.all_passed() ? 0 : 1;
    }
  } catch (const qmimo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
