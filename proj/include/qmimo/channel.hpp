// SPDX-License-Identifier: Apache-2.0
//
// Spatially correlated downlink channel generation with an exponential
// Toeplitz transmit correlation model, plus its spectral density.
#ifndef QMIMO_CHANNEL_HPP
#define QMIMO_CHANNEL_HPP

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "qmimo/math.hpp"

namespace qmimo {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Spectral density of the exponential correlation sequence nu^|i-j|:
/// f(w) = (1-nu^2) / (1 - 2*nu*cos(w) + nu^2).
inline double spectral_density(double nu, double w) {
  if (nu < 0.0 || nu >= 1.0) throw std::invalid_argument("spectral_density: nu must be in [0,1)");
  return (1.0 - nu * nu) / (1.0 - 2.0 * nu * std::cos(w) + nu * nu);
}

/// Transmit correlation model with entries nu^|i-j|. The matrix, its
/// Hermitian square root, and the eigenvalue spectrum are computed once at
/// construction and shared by all channel draws; instances are immutable.
class CorrelationModel {
 public:
  CorrelationModel(int n_antennas, double nu) : n_(n_antennas), nu_(nu) {
    if (n_antennas < 1) throw std::invalid_argument("CorrelationModel: n_antennas must be positive");
    if (nu < 0.0 || nu >= 1.0) throw std::invalid_argument("CorrelationModel: nu must be in [0,1)");
    matrix_.resize(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) matrix_(i, j) = std::pow(nu_, std::abs(i - j));
    if (nu_ == 0.0) {
      sqrt_matrix_ = MatrixXd::Identity(n_, n_);
      spectrum_ = VectorXd::Ones(n_);
      return;
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(matrix_);
    if (eig.info() != Eigen::Success)
      throw std::runtime_error("CorrelationModel: eigendecomposition failed");
    spectrum_ = eig.eigenvalues();  // ascending
    sqrt_matrix_ = eig.eigenvectors() * spectrum_.array().max(0.0).sqrt().matrix().asDiagonal() *
                   eig.eigenvectors().transpose();
  }

  int n_antennas() const { return n_; }
  double nu() const { return nu_; }
  const MatrixXd& matrix() const { return matrix_; }
  const MatrixXd& sqrt_matrix() const { return sqrt_matrix_; }
  /// Eigenvalues of the correlation matrix, ascending. Mean is 1 (Tr = N).
  const VectorXd& spectrum() const { return spectrum_; }

 private:
  int n_;
  double nu_;
  MatrixXd matrix_;
  MatrixXd sqrt_matrix_;
  VectorXd spectrum_;
};

inline CorrelationModel exp_toeplitz(int n, double nu) { return CorrelationModel(n, nu); }

/// One downlink channel draw: h = h_iid * R^(1/2), h_iid with i.i.d.
/// unit-variance circularly-symmetric complex Gaussian entries.
struct ChannelRealization {
  MatrixXcd h;      ///< M x N correlated channel
  MatrixXcd h_iid;  ///< M x N white factor
};

inline ChannelRealization sample_channel(const CorrelationModel& corr, int m,
                                         std::mt19937_64& rng) {
  if (m < 1) throw std::invalid_argument("sample_channel: m must be positive");
  const int n = corr.n_antennas();
  ChannelRealization real;
  real.h_iid.resize(m, n);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      real.h_iid(i, j) = std::complex<double>(gauss(rng), gauss(rng));
  if (corr.nu() == 0.0)
    real.h = real.h_iid;
  else
    real.h = real.h_iid * corr.sqrt_matrix();
  return real;
}

}  // namespace qmimo

#endif
