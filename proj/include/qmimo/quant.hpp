// SPDX-License-Identifier: Apache-2.0
//
// Quantization distortion factors, Lloyd-Max scalar codebooks, and the
// Bussgang-decomposition surrogates used for the DAC and ADC stages.
#ifndef QMIMO_QUANT_HPP
#define QMIMO_QUANT_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "qmimo/math.hpp"

namespace qmimo {

using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Distortion factor of the optimal non-uniform b-bit scalar quantizer for
/// a Gaussian input. Tabulated for 1..5 bits; for 6 bits and up the
/// high-resolution approximation (pi*sqrt(3)/2) * 2^(-2b) is used.
inline double distortion_factor(int bits) {
  static const double table[5] = {0.3634, 0.1175, 0.03454, 0.009497, 0.002499};
  if (bits < 1) throw std::invalid_argument("distortion_factor: bits must be >= 1");
  if (bits <= 5) return table[bits - 1];
  return 0.5 * M_PI * std::sqrt(3.0) * std::pow(2.0, -2.0 * bits);
}

/// Distortion factor with 0 encoding an ideal (infinite-resolution) converter.
inline double distortion_factor_or_ideal(int bits) {
  return bits == 0 ? 0.0 : distortion_factor(bits);
}

/// Minimum-MSE scalar quantizer for a zero-mean unit-variance real Gaussian.
/// Levels are the reproduction points, thresholds the cell boundaries
/// (midpoints of adjacent levels at the Lloyd fixed point).
struct QuantizerModel {
  int bits = 0;
  double rho = 0.0;                ///< distortion factor (MSE on unit-variance input)
  std::vector<double> levels;      ///< 2^bits entries, strictly increasing
  std::vector<double> thresholds;  ///< 2^bits - 1 entries

  bool has_codebook() const { return !levels.empty(); }

  /// Nearest-level index for a unit-variance sample.
  int cell(double x) const {
    return static_cast<int>(std::upper_bound(thresholds.begin(), thresholds.end(), x) -
                            thresholds.begin());
  }

  /// Exact MSE of the codebook on a standard normal input, from closed-form
  /// partial Gaussian moments per cell.
  double mse() const {
    const int n = static_cast<int>(levels.size());
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double a = (i == 0) ? -std::numeric_limits<double>::infinity() : thresholds[i - 1];
      double b = (i == n - 1) ? std::numeric_limits<double>::infinity() : thresholds[i];
      double pa = std::isinf(a) ? 0.0 : normal_pdf(a);
      double pb = std::isinf(b) ? 0.0 : normal_pdf(b);
      double ca = std::isinf(a) ? 0.0 : normal_cdf(a);
      double cb = std::isinf(b) ? 1.0 : normal_cdf(b);
      double p = cb - ca;                                   // cell probability
      double m1 = pa - pb;                                  // cell first moment
      double m2 = p + (std::isinf(a) ? 0.0 : a * pa) - (std::isinf(b) ? 0.0 : b * pb);
      total += m2 - 2.0 * levels[i] * m1 + levels[i] * levels[i] * p;
    }
    return total;
  }
};

/// Builds the 2^bits-level Lloyd-Max quantizer for a standard normal source.
/// Levels start at Gaussian quantiles; each sweep resets thresholds to level
/// midpoints and levels to closed-form conditional cell means. Stops when the
/// largest level movement drops below 1e-10.
inline QuantizerModel lloyd_max_codebook(int bits) {
  if (bits < 1 || bits > 8) throw std::invalid_argument("lloyd_max_codebook: bits must be in 1..8");
  const int n = 1 << bits;
  QuantizerModel model;
  model.bits = bits;
  model.levels.resize(n);
  model.thresholds.resize(n - 1);
  for (int i = 0; i < n; ++i)
    model.levels[i] = normal_quantile((i + 0.5) / n);

  const int max_iter = 10000;
  double move = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    for (int i = 0; i + 1 < n; ++i)
      model.thresholds[i] = 0.5 * (model.levels[i] + model.levels[i + 1]);
    move = 0.0;
    for (int i = 0; i < n; ++i) {
      double a = (i == 0) ? -std::numeric_limits<double>::infinity() : model.thresholds[i - 1];
      double b = (i == n - 1) ? std::numeric_limits<double>::infinity() : model.thresholds[i];
      double pa = std::isinf(a) ? 0.0 : normal_pdf(a);
      double pb = std::isinf(b) ? 0.0 : normal_pdf(b);
      double ca = std::isinf(a) ? 0.0 : normal_cdf(a);
      double cb = std::isinf(b) ? 1.0 : normal_cdf(b);
      double mean = (pa - pb) / (cb - ca);
      move = std::max(move, std::abs(mean - model.levels[i]));
      model.levels[i] = mean;
    }
    if (move < 1e-10) break;
  }
  if (move >= 1e-10)
    throw std::runtime_error("lloyd_max_codebook: Lloyd iteration did not converge");
  model.rho = model.mse();
  return model;
}

/// Bussgang surrogate for the DAC stage: sqrt(1-rho_da) * precoded plus
/// circularly-symmetric Gaussian noise with per-antenna variance
/// rho_da * p_diag[n], p_diag being the diagonal of P P^H.
inline VectorXcd bussgang_dac(const VectorXcd& precoded, double rho_da,
                              const VectorXd& p_diag, std::mt19937_64& rng) {
  if (rho_da < 0.0 || rho_da >= 1.0)
    throw std::invalid_argument("bussgang_dac: rho_da must be in [0,1)");
  if (p_diag.size() != precoded.size())
    throw std::invalid_argument("bussgang_dac: p_diag size mismatch");
  if ((p_diag.array() < 0.0).any())
    throw std::invalid_argument("bussgang_dac: p_diag entries must be nonnegative");
  VectorXcd out = std::sqrt(1.0 - rho_da) * precoded;
  if (rho_da == 0.0) return out;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    double s = std::sqrt(0.5 * rho_da * p_diag[i]);
    out[i] += std::complex<double>(s * gauss(rng), s * gauss(rng));
  }
  return out;
}

/// Bussgang surrogate for the ADC stage: (1-rho_ad) * received plus noise
/// with per-user variance rho_ad * (1-rho_ad) * y_var[k], where y_var is the
/// pre-quantization second moment E{|y_k|^2}.
inline VectorXcd bussgang_adc(const VectorXcd& received, double rho_ad,
                              const VectorXd& y_var, std::mt19937_64& rng) {
  if (rho_ad < 0.0 || rho_ad >= 1.0)
    throw std::invalid_argument("bussgang_adc: rho_ad must be in [0,1)");
  if (y_var.size() != received.size())
    throw std::invalid_argument("bussgang_adc: y_var size mismatch");
  if ((y_var.array() < 0.0).any())
    throw std::invalid_argument("bussgang_adc: y_var entries must be nonnegative");
  VectorXcd out = (1.0 - rho_ad) * received;
  if (rho_ad == 0.0) return out;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    double s = std::sqrt(0.5 * rho_ad * (1.0 - rho_ad) * y_var[i]);
    out[i] += std::complex<double>(s * gauss(rng), s * gauss(rng));
  }
  return out;
}

/// Hard per-sample quantization: real and imaginary parts are scaled to unit
/// variance by the vector's own empirical rms per real dimension, mapped to
/// the nearest codebook level, and rescaled. All-zero dimensions pass through.
/// The output is boosted by 1/sqrt(1-rho) so the linear (Bussgang) gain is
/// sqrt(1-rho) and signal power is preserved, matching the converter model.
inline VectorXcd quantize_hard(const VectorXcd& signal, const QuantizerModel& model) {
  if (!model.has_codebook()) throw std::invalid_argument("quantize_hard: model has no codebook");
  const Eigen::Index n = signal.size();
  if (n == 0) return signal;
  double p_re = 0.0, p_im = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    p_re += signal[i].real() * signal[i].real();
    p_im += signal[i].imag() * signal[i].imag();
  }
  const double boost = 1.0 / std::sqrt(1.0 - model.rho);
  double s_re = boost * std::sqrt(p_re / static_cast<double>(n));
  double s_im = boost * std::sqrt(p_im / static_cast<double>(n));
  VectorXcd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double re = s_re > 0.0 ? s_re * model.levels[model.cell(signal[i].real() / s_re)] : 0.0;
    double im = s_im > 0.0 ? s_im * model.levels[model.cell(signal[i].imag() / s_im)] : 0.0;
    out[i] = std::complex<double>(re, im);
  }
  return out;
}

}  // namespace qmimo

#endif
