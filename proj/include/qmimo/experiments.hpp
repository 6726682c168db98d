// SPDX-License-Identifier: Apache-2.0
//
// Experiment runner: CSV-emitting parameter sweeps, the beta* lookup table
// generator, and the self-contained invariant verification suite.
#ifndef QMIMO_EXPERIMENTS_HPP
#define QMIMO_EXPERIMENTS_HPP

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "qmimo/montecarlo.hpp"

namespace qmimo {

inline constexpr const char* kVersion = "0.1.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Key/value configuration with [section] headers. Keys are flattened to
/// "section.key"; top-level keys keep their bare name. CLI overrides are
/// applied on top via set().
class Config {
 public:
  static Config from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    Config cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string s = trim(line);
      if (s.empty() || s[0] == '#' || s[0] == ';') continue;
      if (s.front() == '[') {
        if (s.back() != ']')
          throw ConfigError(path + ": malformed section at line " + std::to_string(lineno));
        section = trim(s.substr(1, s.size() - 2));
        continue;
      }
      auto eq = s.find('=');
      if (eq == std::string::npos)
        throw ConfigError(path + ": expected key = value at line " + std::to_string(lineno));
      std::string key = trim(s.substr(0, eq));
      std::string val = trim(s.substr(eq + 1));
      if (key.empty()) throw ConfigError(path + ": empty key at line " + std::to_string(lineno));
      cfg.values_[section.empty() ? key : section + "." + key] = val;
    }
    return cfg;
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_str(const std::string& key, const std::string& def = "") const {
    auto it = values_.find(key);
    return it == values_.end() ? def : it->second;
  }

  double get_double(const std::string& key, double def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    return parse_double(key, it->second);
  }

  int get_int(const std::string& key, int def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    try {
      std::size_t pos = 0;
      int v = std::stoi(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw ConfigError("config key '" + key + "': not an integer: " + it->second);
    }
  }

  /// Bit depth; the word "inf" encodes an ideal converter (stored as 0).
  int get_bits(const std::string& key, int def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    if (it->second == "inf") return 0;
    int v = get_int(key, def);
    if (v < 0) throw ConfigError("config key '" + key + "': bits must be >= 0 or 'inf'");
    return v;
  }

  std::vector<double> get_list(const std::string& key, std::vector<double> def = {}) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(parse_double(key, trim(tok)));
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
  }

  std::vector<int> get_bits_list(const std::string& key, std::vector<int> def = {}) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    std::vector<int> out;
    std::stringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = trim(tok);
      if (tok == "inf") {
        out.push_back(0);
      } else {
        try {
          out.push_back(std::stoi(tok));
        } catch (...) {
          throw ConfigError("config key '" + key + "': bad bits value: " + tok);
        }
      }
    }
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
  }

  std::vector<std::string> get_str_list(const std::string& key,
                                        std::vector<std::string> def = {}) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    std::vector<std::string> out;
    std::stringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(trim(tok));
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  static std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  static double parse_double(const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("");
      return d;
    } catch (...) {
      throw ConfigError("config key '" + key + "': not a number: " + v);
    }
  }
  std::map<std::string, std::string> values_;
};

/// Locale-independent, round-trip-safe CSV table. Rows are buffered and
/// written in insertion order.
class CsvTable {
 public:
  using Cell = std::variant<double, long long, std::string>;

  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<Cell> row) {
    if (row.size() != header_.size()) throw std::logic_error("CsvTable: column count mismatch");
    rows_.push_back(std::move(row));
  }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write output file: " + path);
    for (std::size_t i = 0; i < header_.size(); ++i) out << (i ? "," : "") << header_[i];
    out << "\n";
    char buf[64];
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out << ",";
        if (const double* d = std::get_if<double>(&row[i])) {
          std::snprintf(buf, sizeof buf, "%.17g", *d);
          out << buf;
        } else if (const long long* n = std::get_if<long long>(&row[i])) {
          out << *n;
        } else {
          out << std::get<std::string>(row[i]);
        }
      }
      out << "\n";
    }
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

/// Sidecar metadata record: every resolved config key plus run provenance.
inline void write_metadata(const std::string& out_path, const Config& cfg,
                           const std::string& kind, std::uint64_t seed) {
  std::ofstream out(out_path + ".meta", std::ios::binary);
  if (!out) throw ConfigError("cannot write metadata file: " + out_path + ".meta");
  out << "kind = " << kind << "\n";
  out << "seed = " << seed << "\n";
  out << "version = " << kVersion << "\n";
  for (const auto& [k, v] : cfg.values()) out << k << " = " << v << "\n";
}

namespace detail {

inline std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i)
    g[i] = lo * std::pow(hi / lo, n > 1 ? static_cast<double>(i) / (n - 1) : 0.0);
  return g;
}

inline std::vector<double> lin_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i)
    g[i] = lo + (hi - lo) * (n > 1 ? static_cast<double>(i) / (n - 1) : 0.0);
  return g;
}

inline RhoPolicy parse_policy(const std::string& s) {
  if (s == "optimal") return RhoPolicy::Optimal;
  if (s == "conventional") return RhoPolicy::Conventional;
  if (s == "zf") return RhoPolicy::Zf;
  if (s == "mrc") return RhoPolicy::Mrc;
  throw ConfigError("unknown precoder policy: " + s);
}

inline SystemConfig system_config(const Config& cfg) {
  SystemConfig sc;
  sc.n_antennas = cfg.get_int("system.n_antennas", 64);
  sc.n_users = cfg.get_int("system.n_users", 32);
  sc.gamma0_db = cfg.get_double("system.gamma0_db", 15.0);
  sc.b_da = cfg.get_bits("system.b_da", 1);
  sc.b_ad = cfg.get_bits("system.b_ad", 3);
  sc.nu = cfg.get_double("system.nu", 0.5);
  sc.policy = parse_policy(cfg.get_str("system.policy", "optimal"));
  sc.trials = cfg.get_int("run.trials", 0);
  sc.seed = static_cast<std::uint64_t>(cfg.get_int("run.seed", 1));
  return sc;
}

inline void apply_axis(SystemConfig& sc, const std::string& axis, double value) {
  if (axis == "nu") {
    sc.nu = value;
  } else if (axis == "b_ad") {
    sc.b_ad = static_cast<int>(value);
  } else if (axis == "b_da") {
    sc.b_da = static_cast<int>(value);
  } else if (axis == "gamma0_db") {
    sc.gamma0_db = value;
  } else if (axis == "beta") {
    sc.n_users = static_cast<int>(std::lround(value * sc.n_antennas));
  } else {
    throw ConfigError("unknown sweep axis: " + axis);
  }
}

inline double axis_value(const SystemConfig& sc, const std::string& axis) {
  if (axis == "nu") return sc.nu;
  if (axis == "b_ad") return sc.b_ad;
  if (axis == "b_da") return sc.b_da;
  if (axis == "gamma0_db") return sc.gamma0_db;
  if (axis == "beta") return sc.beta();
  throw ConfigError("unknown sweep axis: " + axis);
}

inline std::vector<double> group_values(const Config& cfg, const SystemConfig& base,
                                        const std::string& axis) {
  if (axis == "b_ad" || axis == "b_da") {
    std::vector<double> g;
    for (int b : cfg.get_bits_list("sweep.group_values",
                                   {axis == "b_ad" ? base.b_ad : base.b_da}))
      g.push_back(b);
    return g;
  }
  return cfg.get_list("sweep.group_values", {axis_value(base, axis)});
}

}  // namespace detail

/// Asymptotic SIQNR versus the normalized regularization rho, grouped over a
/// secondary axis (correlation, converter bits, loading, or SNR). Monte-Carlo
/// columns appear when run.trials > 0.
inline void run_sweep_rho(const Config& cfg, const std::string& out_path) {
  SystemConfig base = detail::system_config(cfg);
  const std::string axis = cfg.get_str("sweep.group", "nu");
  const std::vector<double> groups = detail::group_values(cfg, base, axis);
  const double rho_min = cfg.get_double("sweep.rho_min", 0.01);
  const double rho_max = cfg.get_double("sweep.rho_max", 10.0);
  const int rho_points = cfg.get_int("sweep.rho_points", 200);
  const bool with_mc = base.trials > 0;

  std::vector<std::string> header = {"group", "group_value", "rho",  "rho_star",
                                     "gamma0_db", "gamma0", "gamma", "rate"};
  if (with_mc) {
    header.insert(header.end(), {"mc_mean_siqnr", "mc_std_err", "mc_trials"});
  }
  CsvTable table(header);
  for (double gv : groups) {
    SystemConfig sc = base;
    detail::apply_axis(sc, axis, gv);
    const double rho_star = optimal_rho(sc.beta(), sc.gamma0(), sc.rho_da());
    for (double rho : detail::log_grid(rho_min, rho_max, rho_points)) {
      AsymptoticPoint pt = sc.point();
      pt.rho = rho;
      AsymptoticSolution sol = asymptotic_siqnr(pt);
      std::vector<CsvTable::Cell> row = {axis,   gv,          rho,       rho_star,
                                         sc.gamma0_db, sc.gamma0(), sol.gamma, sol.rate};
      if (with_mc) {
        SystemConfig mc = sc;
        mc.rho_override = rho;
        MonteCarloReport rep = simulate_siqnr(mc);
        row.insert(row.end(), {rep.mean_siqnr, rep.siqnr_std_err,
                               static_cast<long long>(mc.trials)});
      }
      table.add_row(std::move(row));
    }
  }
  table.write(out_path);
  write_metadata(out_path, cfg, "sweep-rho", base.seed);
}

/// Per-user achievable rate versus SNR, either comparing precoder policies
/// or comparing ADC resolutions at the optimal regularization.
inline void run_rate_vs_snr(const Config& cfg, const std::string& out_path) {
  SystemConfig base = detail::system_config(cfg);
  const std::vector<double> snrs =
      cfg.get_list("sweep.gamma0_db_values", {-20, -15, -10, -5, 0, 5, 10, 15, 20});
  const std::string compare = cfg.get_str("sweep.compare", "policies");
  const bool with_mc = base.trials > 0;

  std::vector<std::string> header = {"series", "gamma0_db", "rho", "gamma", "rate"};
  if (with_mc) header.insert(header.end(), {"mc_mean_rate", "mc_mean_siqnr", "mc_std_err"});
  CsvTable table(header);

  auto emit = [&](const std::string& series, SystemConfig sc) {
    for (double snr : snrs) {
      sc.gamma0_db = snr;
      AsymptoticSolution sol = asymptotic_siqnr(sc.point());
      std::vector<CsvTable::Cell> row = {series, snr, sc.rho(), sol.gamma, sol.rate};
      if (with_mc) {
        MonteCarloReport rep = simulate_siqnr(sc);
        row.insert(row.end(), {rep.mean_rate, rep.mean_siqnr, rep.siqnr_std_err});
      }
      table.add_row(std::move(row));
    }
  };

  if (compare == "policies") {
    for (const std::string& pol : cfg.get_str_list(
             "sweep.policies", {"optimal", "conventional", "zf", "mrc"})) {
      SystemConfig sc = base;
      sc.policy = detail::parse_policy(pol);
      emit(pol, sc);
    }
  } else if (compare == "b_ad") {
    for (int b : cfg.get_bits_list("sweep.b_ad_values", {1, 2, 3, 4, 5, 0})) {
      SystemConfig sc = base;
      sc.b_ad = b;
      emit(b == 0 ? "inf" : std::to_string(b), sc);
    }
  } else {
    throw ConfigError("rate-vs-snr: sweep.compare must be 'policies' or 'b_ad'");
  }
  table.write(out_path);
  write_metadata(out_path, cfg, "rate-vs-snr", base.seed);
}

/// Uncoded QPSK BER versus SNR for several precoder policies.
inline void run_ber_vs_snr(const Config& cfg, const std::string& out_path) {
  SystemConfig base = detail::system_config(cfg);
  if (base.trials <= 0) base.trials = 50;
  const std::vector<double> snrs =
      cfg.get_list("sweep.gamma0_db_values", {0, 5, 10, 15, 20, 25, 30});
  const std::string backend_name = cfg.get_str("run.backend", "hard");
  const QuantBackend backend =
      backend_name == "hard" ? QuantBackend::Hard
      : backend_name == "surrogate"
          ? QuantBackend::Surrogate
          : throw ConfigError("run.backend must be 'hard' or 'surrogate'");
  const auto n_symbols = static_cast<std::int64_t>(cfg.get_int("run.symbols", 20000));

  CsvTable table({"series", "gamma0_db", "backend", "ber", "ber_std_err", "n_bits"});
  for (const std::string& pol :
       cfg.get_str_list("sweep.policies", {"optimal", "conventional", "zf", "mrc"})) {
    SystemConfig sc = base;
    sc.policy = detail::parse_policy(pol);
    for (double snr : snrs) {
      sc.gamma0_db = snr;
      MonteCarloReport rep = simulate_ber(sc, n_symbols, backend);
      table.add_row({pol, snr, backend_name, rep.ber, rep.ber_std_err,
                     static_cast<long long>(rep.n_bits)});
    }
  }
  table.write(out_path);
  write_metadata(out_path, cfg, "ber-vs-snr", base.seed);
}

/// Overhead-discounted sum rate per antenna versus the user loading ratio,
/// grouped over precoder policies or ADC resolutions, with the maximizing
/// beta reported per series.
inline void run_sweep_beta(const Config& cfg, const std::string& out_path) {
  SystemConfig base = detail::system_config(cfg);
  const double eta = cfg.get_double("system.eta", 1.0);
  const int beta_points = cfg.get_int("sweep.beta_points", 100);
  const std::string compare = cfg.get_str("sweep.compare", "b_ad");
  const double hi = std::min(1.0, 1.0 / eta) - 1e-4;
  const std::vector<double> betas = detail::lin_grid(1e-3, hi, beta_points);

  CsvTable table({"series", "beta", "sum_rate_per_antenna", "beta_star_numeric",
                  "beta_star_closed_form", "r_bar_at_beta_star"});

  auto point_for = [&](const SystemConfig& sc, double beta, RhoPolicy pol) {
    AsymptoticPoint pt{beta, 1.0, sc.gamma0(), sc.rho_da(), sc.rho_ad(), sc.nu, eta};
    switch (pol) {
      case RhoPolicy::Optimal: pt.rho = optimal_rho(beta, pt.gamma0, pt.rho_da); break;
      case RhoPolicy::Conventional: pt.rho = beta / pt.gamma0; break;
      case RhoPolicy::Zf: pt.rho = 1e-8; break;
      case RhoPolicy::Mrc: pt.rho = 1e8; break;
    }
    return pt;
  };

  auto emit = [&](const std::string& series, const SystemConfig& sc, RhoPolicy pol) {
    AsymptoticPoint opt_pt{base.beta(), 1.0, sc.gamma0(), sc.rho_da(), sc.rho_ad(), sc.nu, eta};
    double bs_num = 0.0, rbar_max = 0.0;
    if (pol == RhoPolicy::Optimal) {
      OptimalBeta ob = optimal_beta_numeric(opt_pt);
      bs_num = ob.beta_star;
      rbar_max = ob.r_bar_max;
    } else {
      bs_num = golden_section_max(
          [&](double b) { return asymptotic_siqnr(point_for(sc, b, pol)).sum_rate_per_antenna; },
          1e-4, hi, 1e-6);
      rbar_max = asymptotic_siqnr(point_for(sc, bs_num, pol)).sum_rate_per_antenna;
    }
    const double bs_cf = optimal_beta_closed_form(sc.gamma0(), sc.rho_da(), sc.rho_ad(), eta);
    for (double b : betas) {
      AsymptoticSolution sol = asymptotic_siqnr(point_for(sc, b, pol));
      table.add_row({series, b, sol.sum_rate_per_antenna, bs_num, bs_cf, rbar_max});
    }
  };

  if (compare == "policies") {
    for (const std::string& pol : cfg.get_str_list(
             "sweep.policies", {"optimal", "conventional", "zf", "mrc"}))
      emit(pol, base, detail::parse_policy(pol));
  } else if (compare == "b_ad") {
    for (int b : cfg.get_bits_list("sweep.b_ad_values", {0, 5, 3, 2, 1})) {
      SystemConfig sc = base;
      sc.b_ad = b;
      emit(b == 0 ? "inf" : std::to_string(b), sc, RhoPolicy::Optimal);
    }
  } else if (compare == "nu") {
    for (double nu : cfg.get_list("sweep.nu_values", {0.0, 0.5, 0.8})) {
      SystemConfig sc = base;
      sc.nu = nu;
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", nu);
      emit(buf, sc, RhoPolicy::Optimal);
    }
  } else {
    throw ConfigError("sweep-beta: sweep.compare must be 'policies', 'b_ad', or 'nu'");
  }
  table.write(out_path);
  write_metadata(out_path, cfg, "sweep-beta", base.seed);
}

/// Lookup table of the optimal user loading ratio over a grid of operating
/// conditions: numeric maximization next to the low-SNR closed form.
inline void run_beta_table(const Config& cfg, const std::string& out_path) {
  SystemConfig base = detail::system_config(cfg);
  const std::vector<double> snrs = cfg.get_list("grid.gamma0_db_values", {-15, -10, -5, 0});
  const std::vector<int> bdas = cfg.get_bits_list("grid.b_da_values", {1});
  const std::vector<int> bads = cfg.get_bits_list("grid.b_ad_values", {1, 2, 3, 5, 0});
  const std::vector<double> etas = cfg.get_list("grid.eta_values", {1.0});
  const std::vector<double> nus = cfg.get_list("grid.nu_values", {0.0});

  CsvTable table({"gamma0_db", "b_da", "b_ad", "eta", "nu", "beta_star_numeric",
                  "r_bar_numeric", "beta_star_closed_form", "r_bar_closed_form"});
  for (double snr : snrs)
    for (int bda : bdas)
      for (int bad : bads)
        for (double eta : etas)
          for (double nu : nus) {
            const double g0 = db_to_linear(snr);
            const double rho_da = distortion_factor_or_ideal(bda);
            const double rho_ad = distortion_factor_or_ideal(bad);
            AsymptoticPoint pt{0.5, 1.0, g0, rho_da, rho_ad, nu, eta};
            OptimalBeta ob = optimal_beta_numeric(pt);
            const double bs_cf = optimal_beta_closed_form(g0, rho_da, rho_ad, eta);
            AsymptoticPoint cf_pt = pt;
            cf_pt.beta = std::min(bs_cf, std::min(1.0, 1.0 / eta) - 1e-6);
            const double rbar_cf = sum_rate_per_antenna(cf_pt);
            table.add_row({snr, std::string(bda == 0 ? "inf" : std::to_string(bda)),
                           std::string(bad == 0 ? "inf" : std::to_string(bad)), eta, nu,
                           ob.beta_star, ob.r_bar_max, bs_cf, rbar_cf});
          }
  table.write(out_path);
  write_metadata(out_path, cfg, "beta-table", base.seed);
}

// ---------------------------------------------------------------------------
// Invariant verification suite

struct VerifyOptions {
  std::uint64_t seed = 1;
  /// Test hook: when nonempty, replaces the reference distortion values the
  /// codebook check compares against (used as a corrupted-table fixture).
  std::vector<double> distortion_reference_override;
};

struct VerifyReport {
  std::vector<std::pair<std::string, bool>> checks;
  bool all_passed() const {
    for (const auto& [name, ok] : checks)
      if (!ok) return false;
    return true;
  }
};

inline VerifyReport verify(const VerifyOptions& opt = {}) {
  VerifyReport rep;
  auto check = [&](const std::string& name, bool ok) { rep.checks.emplace_back(name, ok); };

  // quantizer: Lloyd-Max MSE against the reference distortion factors
  {
    bool ok = true;
    for (int b = 1; b <= 5; ++b) {
      double ref = opt.distortion_reference_override.empty()
                       ? distortion_factor(b)
                       : opt.distortion_reference_override.at(b - 1);
      ok = ok && std::abs(lloyd_max_codebook(b).mse() - ref) < 1e-3;
    }
    check("quant.lloyd_mse_matches_table", ok);
  }
  {
    bool ok = true;
    for (int b = 1; b < 10; ++b) ok = ok && distortion_factor(b + 1) < distortion_factor(b);
    check("quant.distortion_monotone", ok);
  }
  {
    QuantizerModel q = lloyd_max_codebook(1);
    check("quant.one_bit_closed_form",
          std::abs(q.levels[1] - std::sqrt(2.0 / M_PI)) < 1e-9 &&
              std::abs(q.mse() - (1.0 - 2.0 / M_PI)) < 1e-6);
  }
  {
    // stationarity: levels are conditional cell means
    bool ok = true;
    for (int b : {2, 4, 6}) {
      QuantizerModel q = lloyd_max_codebook(b);
      const int n = static_cast<int>(q.levels.size());
      for (int i = 0; i < n; ++i) {
        double a = i == 0 ? -1e300 : q.thresholds[i - 1];
        double bb = i == n - 1 ? 1e300 : q.thresholds[i];
        double mean = (normal_pdf(a) - normal_pdf(bb)) / (normal_cdf(bb) - normal_cdf(a));
        ok = ok && std::abs(mean - q.levels[i]) < 1e-8;
      }
    }
    check("quant.lloyd_stationarity", ok);
  }

  // channel: spectral density normalization and positive definiteness
  {
    bool ok = true;
    for (double nu : {0.2, 0.5, 0.8}) {
      double acc = 0.0;
      const int n = 20001;
      for (int i = 0; i < n; ++i) acc += spectral_density(nu, 2.0 * M_PI * i / n);
      ok = ok && std::abs(acc / n - 1.0) < 1e-6;
    }
    CorrelationModel corr = exp_toeplitz(256, 0.95);
    ok = ok && corr.spectrum().minCoeff() > 0.0;
    ok = ok && (corr.sqrt_matrix() * corr.sqrt_matrix() - corr.matrix()).norm() <
                   1e-10 * corr.matrix().norm();
    check("channel.toeplitz_spectrum", ok);
  }

  // asymptotics: randomized fixed-point residual and algebraic identities
  {
    std::mt19937_64 rng = make_stream(opt.seed, 10);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    bool res_ok = true, id_ok = true, deriv_ok = true;
    for (int i = 0; i < 200; ++i) {
      double rho = std::pow(10.0, -3.0 + 4.0 * u01(rng));
      double beta = 0.05 + 0.95 * u01(rng);
      double nu = 0.9 * u01(rng);
      ToeplitzSolution s = solve_xi_toeplitz(rho, beta, nu);
      double rhs = (1.0 - nu * nu) /
                   std::sqrt(std::pow(rho * (1.0 + nu * nu) +
                                          beta * (1.0 - nu * nu) / (1.0 + s.xi), 2) -
                             4.0 * rho * rho * nu * nu);
      if (nu == 0.0) rhs = (1.0 + s.xi) / (rho * (1.0 + s.xi) + beta);
      res_ok = res_ok && std::abs(s.xi - rhs) < 1e-10 * std::max(1.0, s.xi);
      double lhs = s.xi * (1.0 - beta * s.e22);
      double r2 = rho * (1.0 + s.xi) * (1.0 + s.xi) * s.e12 + beta * s.e22;
      id_ok = id_ok && std::abs(lhs - r2) < 1e-8 * std::max(1.0, std::abs(lhs));
      double h = 1e-6 * rho;
      double fd = (solve_xi_toeplitz(rho + h, beta, nu).xi -
                   solve_xi_toeplitz(rho - h, beta, nu).xi) / (2.0 * h);
      double an = dxi_drho(s.xi, s.e12, s.e22, beta);
      deriv_ok = deriv_ok && std::abs(fd - an) < 1e-5 * std::abs(an);
    }
    check("asymptotics.fixed_point_residual", res_ok);
    check("asymptotics.trace_identity", id_ok);
    check("asymptotics.derivative_identity", deriv_ok);
  }

  // optimal rho: grid optimality and scaling
  {
    bool ok = true;
    for (double nu : {0.0, 0.5}) {
      AsymptoticPoint pt{0.5, 0.1, db_to_linear(15.0), distortion_factor(1),
                         distortion_factor(3), nu, 1.0};
      double rs = optimal_rho(pt.beta, pt.gamma0, pt.rho_da);
      auto grid = detail::log_grid(rs / 10, rs * 10, 200);
      double best = -1.0;
      int best_i = 0;
      for (int i = 0; i < 200; ++i) {
        pt.rho = grid[i];
        double g = asymptotic_siqnr(pt).gamma;
        if (g > best) { best = g; best_i = i; }
      }
      ok = ok && std::abs(std::log(grid[best_i] / rs)) < 1.5 * std::log(grid[1] / grid[0]);
    }
    ok = ok && std::abs(optimal_rho(0.8, 2.0, 0.3634) / optimal_rho(0.4, 2.0, 0.3634) - 2.0) <
                   1e-12;
    check("precoding.rho_star_grid_optimal", ok);
  }

  // rate loss constant
  check("asymptotics.rate_loss_constant",
        std::abs(rate_loss_per_energy(0.5, 0.3634, 0.03454) - 0.06345) < 1e-4);

  // Monte-Carlo reproducibility
  {
    SystemConfig sc;
    sc.n_antennas = 32;
    sc.n_users = 16;
    sc.trials = 20;
    sc.seed = opt.seed;
    MonteCarloReport a = simulate_siqnr(sc), b = simulate_siqnr(sc);
    check("montecarlo.reproducible",
          a.mean_siqnr == b.mean_siqnr && a.siqnr_std_err == b.siqnr_std_err);
  }

  // power constraint across precoder kinds
  {
    std::mt19937_64 rng = make_stream(opt.seed, 11);
    CorrelationModel corr = exp_toeplitz(32, 0.5);
    ChannelRealization ch = sample_channel(corr, 16, rng);
    bool ok = true;
    for (auto spec : {PrecoderSpec::rzf(3.2, 7.0), PrecoderSpec::zf(7.0), PrecoderSpec::mrc(7.0)}) {
      PrecodedSystem sys = build_precoder(ch.h, spec);
      ok = ok && std::abs(sys.p.squaredNorm() - spec.power_budget) < 1e-10 * spec.power_budget;
    }
    check("precoding.power_constraint", ok);
  }

  return rep;
}

}  // namespace qmimo

#endif
