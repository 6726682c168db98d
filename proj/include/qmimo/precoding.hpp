// SPDX-License-Identifier: Apache-2.0
//
// Linear downlink precoders (RZF, ZF, MRC) with trace power normalization,
// the closed-form optimal regularization parameter, and exact per-realization
// SIQNR evaluation with both converters' quantization noise accounted for.
#ifndef QMIMO_PRECODING_HPP
#define QMIMO_PRECODING_HPP

#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

#include "qmimo/channel.hpp"

namespace qmimo {

enum class PrecoderKind { Rzf, Zf, Mrc };

struct PrecoderSpec {
  PrecoderKind kind = PrecoderKind::Rzf;
  double alpha = 1.0;         ///< RZF regularization (ignored for ZF/MRC)
  double power_budget = 1.0;  ///< P, enforced as Tr(P P^H) = P

  static PrecoderSpec rzf(double alpha, double power) { return {PrecoderKind::Rzf, alpha, power}; }
  static PrecoderSpec zf(double power) { return {PrecoderKind::Zf, 0.0, power}; }
  static PrecoderSpec mrc(double power) { return {PrecoderKind::Mrc, 0.0, power}; }
};

struct SingularChannelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PrecodedSystem {
  MatrixXcd p;     ///< N x M precoding matrix, Tr(p p^H) = power_budget
  double c = 0.0;  ///< applied normalization constant
};

/// Builds the requested precoder from an M x N channel. RZF uses the M x M
/// form H^H (H H^H + alpha I)^{-1}, which equals (H^H H + alpha I)^{-1} H^H
/// without ever forming an N x N inverse. ZF is the normalized pseudo-inverse
/// and throws SingularChannelError when H H^H is not positive definite.
inline PrecodedSystem build_precoder(const MatrixXcd& h, const PrecoderSpec& spec) {
  const Eigen::Index m = h.rows();
  MatrixXcd p0;
  switch (spec.kind) {
    case PrecoderKind::Rzf: {
      if (spec.alpha <= 0.0) throw std::invalid_argument("build_precoder: RZF needs alpha > 0");
      MatrixXcd gram = h * h.adjoint();
      gram.diagonal().array() += spec.alpha;
      Eigen::LLT<MatrixXcd> llt(gram);
      if (llt.info() != Eigen::Success)
        throw SingularChannelError("build_precoder: RZF factorization failed");
      p0 = h.adjoint() * llt.solve(MatrixXcd::Identity(m, m));
      break;
    }
    case PrecoderKind::Zf: {
      MatrixXcd gram = h * h.adjoint();
      Eigen::LDLT<MatrixXcd> ldlt(gram);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
          ldlt.vectorD().real().minCoeff() < 1e-12 * ldlt.vectorD().real().maxCoeff())
        throw SingularChannelError("build_precoder: channel is rank deficient under ZF");
      p0 = h.adjoint() * ldlt.solve(MatrixXcd::Identity(m, m));
      break;
    }
    case PrecoderKind::Mrc:
      p0 = h.adjoint();
      break;
  }
  double tr = p0.squaredNorm();
  if (!(tr > 0.0)) throw SingularChannelError("build_precoder: zero-power precoder");
  PrecodedSystem sys;
  sys.c = std::sqrt(spec.power_budget / tr);
  sys.p = sys.c * p0;
  return sys;
}

/// Optimal normalized RZF regularization rho* = (rho_da*gamma0 + 1) * beta /
/// ((1 - rho_da) * gamma0). The matrix-level regularization is alpha = rho*N.
inline double optimal_rho(double beta, double gamma0, double rho_da) {
  if (beta <= 0.0 || beta > 1.0) throw std::invalid_argument("optimal_rho: beta must be in (0,1]");
  if (gamma0 <= 0.0) throw std::invalid_argument("optimal_rho: gamma0 must be positive (linear)");
  if (rho_da < 0.0 || rho_da >= 1.0)
    throw std::invalid_argument("optimal_rho: rho_da must be in [0,1)");
  return (rho_da * gamma0 + 1.0) * beta / ((1.0 - rho_da) * gamma0);
}

/// Per-user SIQNR of one realization. Quantization noise covariances are
/// substituted analytically: the DAC noise has covariance rho_da*diag(PP^H)
/// and the ADC noise power is rho_ad*(1-rho_ad) times the pre-quantization
/// second moment of the user's receive signal.
inline VectorXd exact_siqnr(const MatrixXcd& h, const PrecodedSystem& sys, double rho_da,
                            double rho_ad, double noise_var) {
  const Eigen::Index m = h.rows();
  const MatrixXcd f = h * sys.p;                          // effective M x M channel
  const VectorXd p_diag = sys.p.rowwise().squaredNorm();  // diag(P P^H)
  const MatrixXd h_abs2 = h.cwiseAbs2();
  const double ca = 1.0 - rho_ad;
  const double cd = 1.0 - rho_da;
  VectorXd gamma(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double sig = std::norm(f(k, k));
    const double total = f.row(k).squaredNorm();
    const double interf = total - sig;
    const double dac = rho_da * h_abs2.row(k).dot(p_diag);
    const double adc = rho_ad * ca * (cd * total + dac + noise_var);
    gamma[k] = ca * ca * cd * sig /
               (ca * ca * cd * interf + ca * ca * dac + adc + ca * ca * noise_var);
  }
  return gamma;
}

}  // namespace qmimo

#endif
