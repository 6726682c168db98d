// SPDX-License-Identifier: Apache-2.0
//
// Finite-size simulation engine: empirical SIQNR/rate against the
// deterministic equivalents, large-system convergence diagnostics, and
// uncoded QPSK BER with surrogate or hard quantization.
#ifndef QMIMO_MONTECARLO_HPP
#define QMIMO_MONTECARLO_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qmimo/asymptotics.hpp"
#include "qmimo/channel.hpp"
#include "qmimo/precoding.hpp"
#include "qmimo/quant.hpp"

namespace qmimo {

/// Regularization policy for the simulated precoder.
enum class RhoPolicy { Optimal, Conventional, Zf, Mrc };

inline const char* rho_policy_name(RhoPolicy p) {
  switch (p) {
    case RhoPolicy::Optimal: return "optimal";
    case RhoPolicy::Conventional: return "conventional";
    case RhoPolicy::Zf: return "zf";
    case RhoPolicy::Mrc: return "mrc";
  }
  return "?";
}

/// Full scenario for one simulation run. Bit depths use 0 for an ideal
/// (infinite-resolution) converter. sigma_n^2 is fixed to 1 and P = gamma0.
struct SystemConfig {
  int n_antennas = 64;
  int n_users = 32;
  double gamma0_db = 15.0;
  int b_da = 1;
  int b_ad = 3;
  double nu = 0.5;
  RhoPolicy policy = RhoPolicy::Optimal;
  double rho_override = -1.0;  ///< >= 0 forces an RZF precoder at this rho
  int trials = 500;
  std::uint64_t seed = 1;

  double beta() const { return static_cast<double>(n_users) / n_antennas; }
  double gamma0() const { return db_to_linear(gamma0_db); }
  double rho_da() const { return distortion_factor_or_ideal(b_da); }
  double rho_ad() const { return distortion_factor_or_ideal(b_ad); }

  void validate() const {
    if (n_users < 1 || n_users > n_antennas)
      throw std::invalid_argument("SystemConfig: require 1 <= M <= N");
    if (trials < 1) throw std::invalid_argument("SystemConfig: trials must be >= 1");
    if (nu < 0.0 || nu >= 1.0) throw std::invalid_argument("SystemConfig: nu must be in [0,1)");
  }

  /// Normalized regularization used by the simulated precoder. ZF/MRC are
  /// built directly; their reference rho values are the limit surrogates.
  double rho() const {
    if (rho_override >= 0.0) return rho_override;
    switch (policy) {
      case RhoPolicy::Optimal: return optimal_rho(beta(), gamma0(), rho_da());
      case RhoPolicy::Conventional: return beta() / gamma0();
      case RhoPolicy::Zf: return 1e-8;
      case RhoPolicy::Mrc: return 1e8;
    }
    return 0.0;
  }

  AsymptoticPoint point() const {
    return {beta(), rho(), gamma0(), rho_da(), rho_ad(), nu, 1.0};
  }

  PrecoderSpec precoder_spec() const {
    const double p = gamma0();  // sigma_n^2 = 1
    if (rho_override >= 0.0) return PrecoderSpec::rzf(rho_override * n_antennas, p);
    switch (policy) {
      case RhoPolicy::Zf: return PrecoderSpec::zf(p);
      case RhoPolicy::Mrc: return PrecoderSpec::mrc(p);
      default: return PrecoderSpec::rzf(rho() * n_antennas, p);
    }
  }
};

struct MonteCarloReport {
  double mean_siqnr = 0.0;
  double siqnr_std_err = 0.0;
  double mean_rate = 0.0;
  double rate_std_err = 0.0;
  double ber = -1.0;  ///< negative when no BER was measured
  std::int64_t n_bits = 0;
  double ber_std_err = 0.0;
  AsymptoticSolution reference;
  double relative_gap = 0.0;
};

namespace detail {

// Sample one channel, retrying a bounded number of times on singular draws.
inline PrecodedSystem sample_and_precode(const CorrelationModel& corr, const SystemConfig& cfg,
                                         std::mt19937_64& rng, MatrixXcd* h_out) {
  for (int attempt = 0; attempt < 10; ++attempt) {
    ChannelRealization ch = sample_channel(corr, cfg.n_users, rng);
    try {
      PrecodedSystem sys = build_precoder(ch.h, cfg.precoder_spec());
      if (h_out) *h_out = std::move(ch.h);
      return sys;
    } catch (const SingularChannelError&) {
      continue;
    }
  }
  throw SingularChannelError("sample_and_precode: repeated singular channel draws");
}

}  // namespace detail

/// Empirical per-user SIQNR averaged over channel realizations, with the
/// deterministic equivalent attached as reference. Trials run in parallel on
/// streams split from the master seed, so results are thread-count invariant.
inline MonteCarloReport simulate_siqnr(const SystemConfig& cfg) {
  cfg.validate();
  const CorrelationModel corr = exp_toeplitz(cfg.n_antennas, cfg.nu);
  const double rho_da = cfg.rho_da(), rho_ad = cfg.rho_ad();
  std::vector<double> trial_siqnr(cfg.trials), trial_rate(cfg.trials);
  parallel_for(cfg.trials, [&](std::size_t t) {
    std::mt19937_64 rng = make_stream(cfg.seed, t);
    MatrixXcd h;
    PrecodedSystem sys = detail::sample_and_precode(corr, cfg, rng, &h);
    VectorXd gamma = exact_siqnr(h, sys, rho_da, rho_ad, 1.0);
    trial_siqnr[t] = gamma.mean();
    trial_rate[t] = (gamma.array() + 1.0).log().mean() / std::numbers::ln2;
  });
  MonteCarloReport rep;
  double sum = 0.0, sum_rate = 0.0;
  for (int t = 0; t < cfg.trials; ++t) {
    sum += trial_siqnr[t];
    sum_rate += trial_rate[t];
  }
  rep.mean_siqnr = sum / cfg.trials;
  rep.mean_rate = sum_rate / cfg.trials;
  double var = 0.0, var_rate = 0.0;
  for (int t = 0; t < cfg.trials; ++t) {
    double d = trial_siqnr[t] - rep.mean_siqnr;
    var += d * d;
    double dr = trial_rate[t] - rep.mean_rate;
    var_rate += dr * dr;
  }
  rep.siqnr_std_err = cfg.trials > 1 ? std::sqrt(var / (cfg.trials - 1) / cfg.trials) : 0.0;
  rep.rate_std_err = cfg.trials > 1 ? std::sqrt(var_rate / (cfg.trials - 1) / cfg.trials) : 0.0;
  rep.reference = asymptotic_siqnr(cfg.point());
  rep.relative_gap = std::abs(rep.mean_siqnr - rep.reference.gamma) / rep.reference.gamma;
  return rep;
}

enum class QuantBackend { Surrogate, Hard };

namespace detail {

// Pushes a block of source symbols through DAC -> channel -> AWGN -> ADC.
// Hard DAC quantization scales per transmit vector; hard ADC quantization
// scales per user across the block.
inline MatrixXcd transmit_block(const MatrixXcd& h, const PrecodedSystem& sys,
                                const MatrixXcd& symbols, const SystemConfig& cfg,
                                QuantBackend backend, const QuantizerModel* cb_da,
                                const QuantizerModel* cb_ad, std::mt19937_64& rng) {
  const Eigen::Index m = h.rows();
  const Eigen::Index n_sym = symbols.cols();
  const double rho_da = cfg.rho_da(), rho_ad = cfg.rho_ad();
  const VectorXd p_diag = sys.p.rowwise().squaredNorm();

  MatrixXcd x = sys.p * symbols;  // N x T precoded block
  if (cfg.b_da != 0) {
    if (backend == QuantBackend::Surrogate) {
      for (Eigen::Index t = 0; t < n_sym; ++t)
        x.col(t) = bussgang_dac(x.col(t), rho_da, p_diag, rng);
    } else {
      for (Eigen::Index t = 0; t < n_sym; ++t) x.col(t) = quantize_hard(x.col(t), *cb_da);
    }
  }

  MatrixXcd y = h * x;
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));  // sigma_n^2 = 1
  for (Eigen::Index t = 0; t < n_sym; ++t)
    for (Eigen::Index k = 0; k < m; ++k)
      y(k, t) += std::complex<double>(gauss(rng), gauss(rng));

  if (cfg.b_ad == 0) return y;
  if (backend == QuantBackend::Surrogate) {
    // analytic pre-quantization power per user: signal + DAC noise + AWGN
    const MatrixXcd f = h * sys.p;
    const MatrixXd h_abs2 = h.cwiseAbs2();
    VectorXd y_var(m);
    for (Eigen::Index k = 0; k < m; ++k)
      y_var[k] = (1.0 - rho_da) * f.row(k).squaredNorm() + rho_da * h_abs2.row(k).dot(p_diag) + 1.0;
    for (Eigen::Index t = 0; t < n_sym; ++t)
      y.col(t) = bussgang_adc(y.col(t), rho_ad, y_var, rng);
    return y;
  }
  for (Eigen::Index k = 0; k < m; ++k)
    y.row(k) = quantize_hard(y.row(k).transpose(), *cb_ad).transpose();
  return y;
}

inline MatrixXcd random_qpsk(Eigen::Index m, Eigen::Index n_sym, std::mt19937_64& rng) {
  MatrixXcd s(m, n_sym);
  std::uniform_int_distribution<int> bit(0, 1);
  const double amp = 1.0 / std::sqrt(2.0);
  for (Eigen::Index t = 0; t < n_sym; ++t)
    for (Eigen::Index k = 0; k < m; ++k)
      s(k, t) = std::complex<double>(bit(rng) ? amp : -amp, bit(rng) ? amp : -amp);
  return s;
}

}  // namespace detail

/// Uncoded QPSK bit error rate over n_symbols vector symbols distributed
/// across cfg.trials channel realizations. Per realization a 100-symbol pilot
/// preamble gives each user a least-squares scalar gain for detection.
inline MonteCarloReport simulate_ber(const SystemConfig& cfg, std::int64_t n_symbols,
                                     QuantBackend backend) {
  cfg.validate();
  if (n_symbols < 1) throw std::invalid_argument("simulate_ber: n_symbols must be positive");
  const CorrelationModel corr = exp_toeplitz(cfg.n_antennas, cfg.nu);
  QuantizerModel cb_da, cb_ad;
  if (backend == QuantBackend::Hard) {
    if (cfg.b_da != 0) cb_da = lloyd_max_codebook(cfg.b_da);
    if (cfg.b_ad != 0) cb_ad = lloyd_max_codebook(cfg.b_ad);
  }
  const std::int64_t per_trial = std::max<std::int64_t>(1, n_symbols / cfg.trials);
  const int n_pilot = 100;
  std::vector<std::int64_t> errors(cfg.trials, 0), bits(cfg.trials, 0);

  parallel_for(cfg.trials, [&](std::size_t t) {
    std::mt19937_64 rng = make_stream(cfg.seed, 1'000'000 + t);
    MatrixXcd h;
    PrecodedSystem sys = detail::sample_and_precode(corr, cfg, rng, &h);
    const Eigen::Index m = h.rows();

    MatrixXcd pilots = detail::random_qpsk(m, n_pilot, rng);
    MatrixXcd y_pilot =
        detail::transmit_block(h, sys, pilots, cfg, backend, &cb_da, &cb_ad, rng);
    VectorXcd gain(m);
    for (Eigen::Index k = 0; k < m; ++k)
      gain[k] = pilots.row(k).dot(y_pilot.row(k)) / pilots.row(k).squaredNorm();

    MatrixXcd data = detail::random_qpsk(m, per_trial, rng);
    MatrixXcd y = detail::transmit_block(h, sys, data, cfg, backend, &cb_da, &cb_ad, rng);
    std::int64_t err = 0;
    for (Eigen::Index ts = 0; ts < per_trial; ++ts) {
      for (Eigen::Index k = 0; k < m; ++k) {
        std::complex<double> z = y(k, ts) / gain[k];
        if ((z.real() < 0.0) != (data(k, ts).real() < 0.0)) ++err;
        if ((z.imag() < 0.0) != (data(k, ts).imag() < 0.0)) ++err;
      }
    }
    errors[t] = err;
    bits[t] = 2 * per_trial * m;
  });

  MonteCarloReport rep = simulate_siqnr(cfg);
  std::int64_t total_err = 0, total_bits = 0;
  for (int t = 0; t < cfg.trials; ++t) {
    total_err += errors[t];
    total_bits += bits[t];
  }
  rep.ber = static_cast<double>(total_err) / static_cast<double>(total_bits);
  rep.n_bits = total_bits;
  rep.ber_std_err = std::sqrt(std::max(rep.ber * (1.0 - rep.ber), 0.0) /
                              static_cast<double>(total_bits));
  return rep;
}

/// Large-system convergence diagnostics for an RZF configuration.
struct ConvergenceDiagnostics {
  double xi = 0.0;                  ///< solved deterministic equivalent
  double mean_quadratic_form = 0.0; ///< leave-one-out quadratic form average
  double max_pp_diag_rel_dev = 0.0; ///< max |diag(PP^H) - P/N| / (P/N)
  double mean_c2 = 0.0;             ///< empirical normalization c^2 average
  double c2_ref = 0.0;              ///< -P(1+xi)^2 / (beta * dxi/drho)
};

inline ConvergenceDiagnostics check_appendix_convergence(const SystemConfig& cfg) {
  cfg.validate();
  if (cfg.policy != RhoPolicy::Optimal && cfg.policy != RhoPolicy::Conventional)
    throw std::invalid_argument("check_appendix_convergence: requires an RZF policy");
  const CorrelationModel corr = exp_toeplitz(cfg.n_antennas, cfg.nu);
  const double rho = cfg.rho();
  const double alpha = rho * cfg.n_antennas;
  const double p_budget = cfg.gamma0();
  const ToeplitzSolution sol = solve_xi_toeplitz(rho, cfg.beta(), cfg.nu);

  std::vector<double> qf(cfg.trials), c2(cfg.trials), dev(cfg.trials);
  parallel_for(cfg.trials, [&](std::size_t t) {
    std::mt19937_64 rng = make_stream(cfg.seed, 2'000'000 + t);
    ChannelRealization ch = sample_channel(corr, cfg.n_users, rng);
    const MatrixXcd& h = ch.h;
    const Eigen::Index m = h.rows();
    MatrixXcd gram = h * h.adjoint();
    gram.diagonal().array() += alpha;
    Eigen::LLT<MatrixXcd> llt(gram);
    // Woodbury: h_k^T (H^H H + aI)^{-1} h_k^* = (|h_k|^2 - u^H G^{-1} u)/a
    // with u = (H H^H) e_k; the leave-one-out form is r/(1-r).
    double acc = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      VectorXcd u = gram.col(k);
      u[k] -= alpha;
      double r = (h.row(k).squaredNorm() - u.dot(llt.solve(u)).real()) / alpha;
      acc += r / (1.0 - r);
    }
    qf[t] = acc / static_cast<double>(m);

    PrecodedSystem sys = build_precoder(h, PrecoderSpec::rzf(alpha, p_budget));
    c2[t] = sys.c * sys.c;
    VectorXd p_diag = sys.p.rowwise().squaredNorm();
    double target = p_budget / cfg.n_antennas;
    dev[t] = ((p_diag.array() - target).abs() / target).maxCoeff();
  });

  ConvergenceDiagnostics diag;
  diag.xi = sol.xi;
  for (int t = 0; t < cfg.trials; ++t) {
    diag.mean_quadratic_form += qf[t];
    diag.mean_c2 += c2[t];
    diag.max_pp_diag_rel_dev = std::max(diag.max_pp_diag_rel_dev, dev[t]);
  }
  diag.mean_quadratic_form /= cfg.trials;
  diag.mean_c2 /= cfg.trials;
  diag.c2_ref = -p_budget * (1.0 + sol.xi) * (1.0 + sol.xi) /
                (cfg.beta() * dxi_drho(sol.xi, sol.e12, sol.e22, cfg.beta()));
  return diag;
}

}  // namespace qmimo

#endif
