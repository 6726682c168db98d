// SPDX-License-Identifier: Apache-2.0
//
// Deterministic-equivalent engine: fixed-point solution of the asymptotic
// SINR seed xi, spectral moment functionals E_ij, the asymptotic SIQNR and
// rate formulas, and optimal user loading (numeric and closed form).
#ifndef QMIMO_ASYMPTOTICS_HPP
#define QMIMO_ASYMPTOTICS_HPP

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>

#include "qmimo/math.hpp"
#include "qmimo/precoding.hpp"

namespace qmimo {

/// One operating point of the large-system model. gamma0 is linear (not dB).
struct AsymptoticPoint {
  double beta = 0.5;    ///< user loading ratio M/N
  double rho = 0.1;     ///< normalized regularization alpha/N
  double gamma0 = 1.0;  ///< system SNR P/sigma_n^2
  double rho_da = 0.0;
  double rho_ad = 0.0;
  double nu = 0.0;      ///< transmit correlation coefficient
  double eta = 1.0;     ///< pilot overhead factor N*tau/T
};

struct AsymptoticSolution {
  double xi = 0.0;
  double e12 = 0.0;
  double e22 = 0.0;
  double gamma = 0.0;                 ///< asymptotic per-user SIQNR
  double rate = 0.0;                  ///< per-user rate, bits per channel use
  double sum_rate_per_antenna = 0.0;  ///< beta*(1 - eta*beta)*rate
};

/// Closed-form xi for an uncorrelated channel: the positive root of
/// xi = (1+xi) / (rho*(1+xi) + beta).
inline double xi_uncorrelated(double rho, double beta) {
  if (rho <= 0.0) throw std::invalid_argument("xi_uncorrelated: rho must be positive");
  if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("xi_uncorrelated: beta must be in [0,1]");
  const double q = (1.0 - beta) / rho;
  return 0.5 * (std::sqrt(q * q + 2.0 * (1.0 + beta) / rho + 1.0) + q - 1.0);
}

/// E_ij moment over an explicit eigenvalue spectrum at a given xi.
inline double moment_eij(std::span<const double> spectrum, double rho, double beta, double xi,
                         int i, int j) {
  double acc = 0.0;
  for (double lam : spectrum)
    acc += std::pow(lam, i) / std::pow(rho * (1.0 + xi) + beta * lam, j);
  return acc / static_cast<double>(spectrum.size());
}

/// Solves xi = E_lambda{ lambda*(1+xi) / (rho*(1+xi) + beta*lambda) } over an
/// explicit spectrum by damped fixed-point iteration (d = 0.5, started at
/// 1/rho), falling back to bisection on the monotone residual. The root lies
/// in (0, 1/rho).
inline double solve_xi_spectrum(double rho, double beta, std::span<const double> spectrum) {
  if (rho <= 0.0) throw std::invalid_argument("solve_xi_spectrum: rho must be positive");
  if (spectrum.empty()) throw std::invalid_argument("solve_xi_spectrum: empty spectrum");
  auto rhs = [&](double xi) {
    double acc = 0.0;
    for (double lam : spectrum) acc += lam * (1.0 + xi) / (rho * (1.0 + xi) + beta * lam);
    return acc / static_cast<double>(spectrum.size());
  };
  auto tol = [](double xi) { return 1e-12 * std::max(1.0, xi); };
  double xi = 1.0 / rho;
  for (int it = 0; it < 100000; ++it) {
    double r = rhs(xi);
    if (std::abs(xi - r) < tol(xi)) return xi;
    xi = 0.5 * xi + 0.5 * r;
  }
  // residual xi - rhs(xi) is increasing with a unique zero in (0, 1/rho)
  double lo = 0.0, hi = 1.0 / rho;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid - rhs(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  xi = 0.5 * (lo + hi);
  if (std::abs(xi - rhs(xi)) >= 100.0 * tol(xi))
    throw std::runtime_error("solve_xi_spectrum: fixed point did not converge");
  return xi;
}

struct ToeplitzSolution {
  double xi = 0.0;
  double e12 = 0.0;
  double e22 = 0.0;
};

/// Closed-form xi, E12, E22 for the exponential Toeplitz correlation family.
/// xi solves xi = (1-nu^2)/sqrt(a^2-b^2) with a = rho*(1+nu^2) +
/// beta*(1-nu^2)/(1+xi) and b = -2*rho*nu; the moments follow in closed form.
inline ToeplitzSolution solve_xi_toeplitz(double rho, double beta, double nu) {
  if (rho <= 0.0) throw std::invalid_argument("solve_xi_toeplitz: rho must be positive");
  if (nu < 0.0 || nu >= 1.0) throw std::invalid_argument("solve_xi_toeplitz: nu must be in [0,1)");
  ToeplitzSolution sol;
  if (nu == 0.0) {
    sol.xi = xi_uncorrelated(rho, beta);
    const double den = rho * (1.0 + sol.xi) + beta;
    sol.e12 = sol.e22 = 1.0 / (den * den);
    return sol;
  }
  const double one_m_nu2 = 1.0 - nu * nu;
  const double b = -2.0 * rho * nu;
  auto a_of = [&](double xi) { return rho * (1.0 + nu * nu) + beta * one_m_nu2 / (1.0 + xi); };
  auto rhs = [&](double xi) {
    double a = a_of(xi);
    double disc = a * a - b * b;
    if (disc <= 0.0) throw std::runtime_error("solve_xi_toeplitz: a^2 <= b^2");
    return one_m_nu2 / std::sqrt(disc);
  };
  // residual xi - rhs(xi) increases from negative at 0 to positive at 1/rho
  double lo = 0.0, hi = 1.0 / rho;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid - rhs(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  sol.xi = 0.5 * (lo + hi);
  if (std::abs(sol.xi - rhs(sol.xi)) >= 1e-11 * std::max(1.0, sol.xi))
    throw std::runtime_error("solve_xi_toeplitz: fixed point did not converge");
  const double a = a_of(sol.xi);
  const double disc = a * a - b * b;
  const double big_a = 1.0 + nu * nu;
  const double big_b = -2.0 * nu;
  const double opxi2 = (1.0 + sol.xi) * (1.0 + sol.xi);
  sol.e12 = one_m_nu2 * (a * big_a - b * big_b) / (opxi2 * std::pow(disc, 1.5));
  sol.e22 = a * one_m_nu2 * one_m_nu2 / (opxi2 * std::pow(disc, 1.5));
  return sol;
}

/// Derivative of xi w.r.t. rho from the implicit fixed point:
/// d(xi)/d(rho) = -(1+xi)^2 E12 / (1 - beta E22).
inline double dxi_drho(double xi, double e12, double e22, double beta) {
  return -(1.0 + xi) * (1.0 + xi) * e12 / (1.0 - beta * e22);
}

/// Asymptotic SIQNR at given (xi, E12, E22) and operating point.
inline double siqnr_from_moments(double xi, double e12, double e22, const AsymptoticPoint& pt) {
  const double u = (1.0 + xi) * (1.0 + xi) * e12;
  const double t = xi * (e22 + pt.rho / pt.beta * u);
  const double num = (1.0 - pt.rho_ad) * (1.0 - pt.rho_da) * t * pt.gamma0;
  const double den = pt.rho_ad * (1.0 - pt.rho_da) * t * pt.gamma0 + pt.rho_da * u * pt.gamma0 +
                     (1.0 - pt.rho_da) * e22 * pt.gamma0 + u;
  return num / den;
}

/// SIQNR specialization for an uncorrelated channel (E12 = E22 cancels).
inline double siqnr_uncorrelated(double xi, const AsymptoticPoint& pt) {
  const double opxi2 = (1.0 + xi) * (1.0 + xi);
  const double t = xi * (1.0 + pt.rho / pt.beta * opxi2);
  const double num = (1.0 - pt.rho_ad) * (1.0 - pt.rho_da) * t * pt.gamma0;
  const double den = pt.rho_ad * (1.0 - pt.rho_da) * t * pt.gamma0 +
                     pt.rho_da * opxi2 * pt.gamma0 + (1.0 - pt.rho_da) * pt.gamma0 + opxi2;
  return num / den;
}

/// Full asymptotic solution at one operating point. Uses the Toeplitz closed
/// forms (nu > 0) or the quadratic closed form (nu = 0); at nu = 0 the
/// general and specialized SIQNR expressions are cross-checked.
inline AsymptoticSolution asymptotic_siqnr(const AsymptoticPoint& pt) {
  ToeplitzSolution m = solve_xi_toeplitz(pt.rho, pt.beta, pt.nu);
  AsymptoticSolution sol;
  sol.xi = m.xi;
  sol.e12 = m.e12;
  sol.e22 = m.e22;
  sol.gamma = siqnr_from_moments(m.xi, m.e12, m.e22, pt);
  if (pt.nu == 0.0) {
    double g_uc = siqnr_uncorrelated(m.xi, pt);
    if (std::abs(g_uc - sol.gamma) > 1e-9 * std::max(1.0, sol.gamma))
      throw std::runtime_error("asymptotic_siqnr: uncorrelated cross-check failed");
  }
  sol.rate = std::log2(1.0 + sol.gamma);
  sol.sum_rate_per_antenna = pt.beta * (1.0 - pt.eta * pt.beta) * sol.rate;
  return sol;
}

/// SIQNR and per-user rate with the optimal regularization rho* substituted:
/// gamma* = (1-rho_ad)*xi*/(1+rho_ad*xi*), R = log2((1+xi*)/(1+rho_ad*xi*)).
struct OptimalRate {
  double rho_star = 0.0;
  double xi_star = 0.0;
  double gamma_star = 0.0;
  double rate = 0.0;
};

inline OptimalRate optimal_siqnr_and_rate(const AsymptoticPoint& pt) {
  OptimalRate res;
  res.rho_star = optimal_rho(pt.beta, pt.gamma0, pt.rho_da);
  AsymptoticPoint at = pt;
  at.rho = res.rho_star;
  ToeplitzSolution m = solve_xi_toeplitz(at.rho, at.beta, at.nu);
  res.xi_star = m.xi;
  res.gamma_star = (1.0 - pt.rho_ad) * m.xi / (1.0 + pt.rho_ad * m.xi);
  double g_full = siqnr_from_moments(m.xi, m.e12, m.e22, at);
  if (std::abs(g_full - res.gamma_star) > 1e-9 * std::max(1.0, res.gamma_star))
    throw std::runtime_error("optimal_siqnr_and_rate: closed form disagrees with general SIQNR");
  res.rate = std::log2((1.0 + m.xi) / (1.0 + pt.rho_ad * m.xi));
  return res;
}

/// Sum rate per antenna at the optimal regularization, including the pilot
/// overhead discount: beta*(1 - eta*beta)*R. Nonpositive when eta*beta >= 1.
inline double sum_rate_per_antenna(const AsymptoticPoint& pt) {
  return pt.beta * (1.0 - pt.eta * pt.beta) * optimal_siqnr_and_rate(pt).rate;
}

/// Numeric optimal user loading: golden-section maximization of the
/// overhead-discounted sum rate over beta in (0, min(1, 1/eta)).
struct OptimalBeta {
  double beta_star = 0.0;
  double r_bar_max = 0.0;
};

inline OptimalBeta optimal_beta_numeric(const AsymptoticPoint& pt) {
  const double hi = std::min(1.0, 1.0 / pt.eta) - 1e-4;
  auto objective = [&](double beta) {
    AsymptoticPoint at = pt;
    at.beta = beta;
    return sum_rate_per_antenna(at);
  };
  OptimalBeta res;
  res.beta_star = golden_section_max(objective, 1e-4, hi, 1e-6);
  res.r_bar_max = objective(res.beta_star);
  if (!(res.r_bar_max > 0.0))
    throw std::runtime_error("optimal_beta_numeric: degenerate (nonpositive) objective");
  return res;
}

/// Closed-form optimal user loading for asymptotically low SNR,
/// uncorrelated channels.
inline double optimal_beta_closed_form(double gamma0, double rho_da, double rho_ad, double eta) {
  const double k = gamma0 * (1.0 + rho_ad) * (1.0 - rho_da);
  return -k + std::sqrt(k * k + k / eta);
}

/// Low-SNR per-user rate approximation for uncorrelated channels:
/// log2((beta + (1-rho_da)*gamma0) / (beta + rho_ad*(1-rho_da)*gamma0)).
inline double low_snr_rate(double beta, double gamma0, double rho_da, double rho_ad) {
  return std::log2((beta + (1.0 - rho_da) * gamma0) /
                   (beta + rho_ad * (1.0 - rho_da) * gamma0));
}

/// Low-SNR limit of the normalized per-energy rate loss caused by
/// finite-resolution ADCs: rho_ad*(1-rho_da) / (beta * ln 2).
inline double rate_loss_per_energy(double beta, double rho_da, double rho_ad) {
  if (beta <= 0.0) throw std::invalid_argument("rate_loss_per_energy: beta must be positive");
  return rho_ad * (1.0 - rho_da) / (beta * std::numbers::ln2);
}

}  // namespace qmimo

#endif
