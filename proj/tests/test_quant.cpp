// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <complex>
#include <random>

#include "qmimo/quant.hpp"

using namespace qmimo;

TEST_CASE("distortion factor table and high-resolution tail") {
  CHECK(distortion_factor(1) == doctest::Approx(0.3634));
  CHECK(distortion_factor(2) == doctest::Approx(0.1175));
  CHECK(distortion_factor(3) == doctest::Approx(0.03454));
  CHECK(distortion_factor(4) == doctest::Approx(0.009497));
  CHECK(distortion_factor(5) == doctest::Approx(0.002499));
  CHECK(distortion_factor(6) ==
        doctest::Approx(0.5 * M_PI * std::sqrt(3.0) * std::pow(2.0, -12.0)).epsilon(1e-12));
  CHECK(distortion_factor(6) == doctest::Approx(6.643e-4).epsilon(1e-3));
  CHECK_THROWS_AS(distortion_factor(0), std::invalid_argument);
  CHECK(distortion_factor_or_ideal(0) == 0.0);
  CHECK(distortion_factor_or_ideal(3) == distortion_factor(3));
}

TEST_CASE("distortion factor is strictly decreasing in bits") {
  for (int b = 1; b <= 10; ++b) CHECK(distortion_factor(b + 1) < distortion_factor(b));
  // documented approximation gap at the table boundary, bounded not exact
  double approx5 = 0.5 * M_PI * std::sqrt(3.0) * std::pow(2.0, -10.0);
  CHECK(std::abs(distortion_factor(5) - approx5) / distortion_factor(5) < 0.15);
}

TEST_CASE("one-bit codebook has the sign-quantizer closed form") {
  QuantizerModel q = lloyd_max_codebook(1);
  REQUIRE(q.levels.size() == 2);
  CHECK(q.levels[0] == doctest::Approx(-std::sqrt(2.0 / M_PI)).epsilon(1e-9));
  CHECK(q.levels[1] == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-9));
  CHECK(q.mse() == doctest::Approx(1.0 - 2.0 / M_PI).epsilon(1e-8));
  CHECK(q.rho == doctest::Approx(1.0 - 2.0 / M_PI).epsilon(1e-8));
}

TEST_CASE("codebook MSE reproduces the distortion table") {
  for (int b = 1; b <= 5; ++b) {
    QuantizerModel q = lloyd_max_codebook(b);
    CHECK(std::abs(q.mse() - distortion_factor(b)) < 1e-3);
  }
  // high-resolution approximation is only an upper-bound-ish match
  QuantizerModel q8 = lloyd_max_codebook(8);
  CHECK(q8.mse() < distortion_factor(8) * 1.05);
  CHECK(static_cast<int>(q8.levels.size()) == 256);
}

TEST_CASE("codebook structure: symmetric, increasing, stationary") {
  for (int b : {2, 3, 4, 6}) {
    QuantizerModel q = lloyd_max_codebook(b);
    const int n = static_cast<int>(q.levels.size());
    REQUIRE(n == (1 << b));
    for (int i = 0; i + 1 < n; ++i) CHECK(q.levels[i] < q.levels[i + 1]);
    for (int i = 0; i < n; ++i) CHECK(q.levels[i] == doctest::Approx(-q.levels[n - 1 - i]).epsilon(1e-9));
    for (int i = 0; i + 1 < n; ++i)
      CHECK(q.thresholds[i] == doctest::Approx(0.5 * (q.levels[i] + q.levels[i + 1])).epsilon(1e-12));
    // stationarity: each level is the conditional mean of its cell
    for (int i = 0; i < n; ++i) {
      double a = i == 0 ? -1e300 : q.thresholds[i - 1];
      double bb = i == n - 1 ? 1e300 : q.thresholds[i];
      double mean = (normal_pdf(a) - normal_pdf(bb)) / (normal_cdf(bb) - normal_cdf(a));
      CHECK(std::abs(mean - q.levels[i]) < 1e-8);
    }
  }
  CHECK_THROWS_AS(lloyd_max_codebook(0), std::invalid_argument);
  CHECK_THROWS_AS(lloyd_max_codebook(9), std::invalid_argument);
}

TEST_CASE("codebook MSE agrees with a Monte-Carlo estimate") {
  std::mt19937_64 rng = make_stream(7, 0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int b : {1, 2, 3}) {
    QuantizerModel q = lloyd_max_codebook(b);
    double acc = 0.0;
    const int n = 400000;
    for (int i = 0; i < n; ++i) {
      double x = gauss(rng);
      double e = x - q.levels[q.cell(x)];
      acc += e * e;
    }
    CHECK(std::abs(acc / n - q.rho) < 1e-3);
  }
}

TEST_CASE("DAC surrogate: zero-distortion passthrough and input checks") {
  std::mt19937_64 rng = make_stream(7, 1);
  VectorXcd x(3);
  x << std::complex<double>(1, 2), std::complex<double>(-0.5, 0), std::complex<double>(0, 1);
  VectorXd pd = VectorXd::Constant(3, 0.25);
  CHECK((bussgang_dac(x, 0.0, pd, rng) - x).norm() == 0.0);
  CHECK_THROWS_AS(bussgang_dac(x, -0.1, pd, rng), std::invalid_argument);
  CHECK_THROWS_AS(bussgang_dac(x, 1.0, pd, rng), std::invalid_argument);
  VectorXd bad = pd;
  bad[1] = -1.0;
  CHECK_THROWS_AS(bussgang_dac(x, 0.3, bad, rng), std::invalid_argument);
  CHECK_THROWS_AS(bussgang_dac(x, 0.3, VectorXd::Ones(2), rng), std::invalid_argument);
}

TEST_CASE("DAC surrogate noise covariance matches the model") {
  const int n = 8, trials = 100000;
  const double rho_da = 0.3634, p_over_n = 2.0;
  VectorXd pd = VectorXd::Constant(n, p_over_n);
  VectorXcd x = VectorXcd::Zero(n);
  x[0] = std::complex<double>(1.0, -1.0);  // deterministic input, noise isolated by subtraction
  std::mt19937_64 rng = make_stream(7, 2);
  Eigen::MatrixXcd cov = Eigen::MatrixXcd::Zero(n, n);
  double cross = 0.0;
  for (int t = 0; t < trials; ++t) {
    VectorXcd noise = bussgang_dac(x, rho_da, pd, rng) - std::sqrt(1.0 - rho_da) * x;
    cov += noise * noise.adjoint();
    cross += (x.dot(noise)).real();
  }
  cov /= trials;
  const double target = rho_da * p_over_n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double want = i == j ? target : 0.0;
      CHECK(std::abs(cov(i, j).real() - want) < 0.02 * target);
      CHECK(std::abs(cov(i, j).imag()) < 0.02 * target);
    }
  // surrogate noise uncorrelated with the signal
  CHECK(std::abs(cross / trials) / (x.norm() * std::sqrt(target)) < 3.0 / std::sqrt(trials));
  // output second moment = (1-rho)*|x|^2 + rho*p_diag per antenna
  double second = cov(0, 0).real() + (1.0 - rho_da) * std::norm(x[0]);
  std::mt19937_64 rng2 = make_stream(7, 3);
  double acc = 0.0;
  for (int t = 0; t < trials; ++t) acc += std::norm(bussgang_dac(x, rho_da, pd, rng2)[0]);
  CHECK(acc / trials == doctest::Approx(second).epsilon(0.02));
}

TEST_CASE("ADC surrogate noise variance and total power") {
  const int m = 6, trials = 100000;
  const double rho_ad = 0.1175;
  VectorXcd y(m);
  for (int k = 0; k < m; ++k) y[k] = std::complex<double>(0.3 * k, 1.0 - 0.1 * k);
  VectorXd y_var(m);
  for (int k = 0; k < m; ++k) y_var[k] = std::norm(y[k]) + 0.5;
  std::mt19937_64 rng = make_stream(7, 4);
  CHECK((bussgang_adc(y, 0.0, y_var, rng) - y).norm() == 0.0);
  VectorXd nv = VectorXd::Zero(m);
  for (int t = 0; t < trials; ++t) {
    VectorXcd noise = bussgang_adc(y, rho_ad, y_var, rng) - (1.0 - rho_ad) * y;
    nv += noise.cwiseAbs2();
  }
  nv /= trials;
  for (int k = 0; k < m; ++k) {
    double want = rho_ad * (1.0 - rho_ad) * y_var[k];
    CHECK(nv[k] == doctest::Approx(want).epsilon(0.02));
  }
  CHECK_THROWS_AS(bussgang_adc(y, -0.2, y_var, rng), std::invalid_argument);
}

TEST_CASE("ADC surrogate preserves the stated output-power relation") {
  // E{Tr(yq yq^H)} = (1-rho)E{Tr(y y^H)} when y_var is the true second moment
  const int m = 4, trials = 200000;
  const double rho_ad = 0.3634;
  std::mt19937_64 rng = make_stream(7, 5);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  VectorXd y_var = VectorXd::Constant(m, 1.0);
  double in_pow = 0.0, out_pow = 0.0;
  for (int t = 0; t < trials; ++t) {
    VectorXcd y(m);
    for (int k = 0; k < m; ++k) y[k] = std::complex<double>(gauss(rng), gauss(rng));
    in_pow += y.squaredNorm();
    out_pow += bussgang_adc(y, rho_ad, y_var, rng).squaredNorm();
  }
  CHECK(out_pow / in_pow == doctest::Approx(1.0 - rho_ad).epsilon(0.02));
}

TEST_CASE("hard quantizer: one-bit sign form and scale guard") {
  QuantizerModel q1 = lloyd_max_codebook(1);
  VectorXcd x(4);
  x << std::complex<double>(0.3, -2.0), std::complex<double>(-1.2, 0.4),
      std::complex<double>(2.0, 1.0), std::complex<double>(-0.1, -0.1);
  VectorXcd out = quantize_hard(x, q1);
  double s_re = 0.0, s_im = 0.0;
  for (int i = 0; i < 4; ++i) {
    s_re += x[i].real() * x[i].real();
    s_im += x[i].imag() * x[i].imag();
  }
  const double boost = 1.0 / std::sqrt(1.0 - q1.rho);
  s_re = boost * std::sqrt(s_re / 4);
  s_im = boost * std::sqrt(s_im / 4);
  const double lvl = std::sqrt(2.0 / M_PI);
  for (int i = 0; i < 4; ++i) {
    CHECK(out[i].real() ==
          doctest::Approx((x[i].real() < 0 ? -1 : 1) * s_re * lvl).epsilon(1e-12));
    CHECK(out[i].imag() ==
          doctest::Approx((x[i].imag() < 0 ? -1 : 1) * s_im * lvl).epsilon(1e-12));
  }
  CHECK(quantize_hard(VectorXcd::Zero(5), q1).norm() == 0.0);
  QuantizerModel empty;
  CHECK_THROWS_AS(quantize_hard(x, empty), std::invalid_argument);
}

TEST_CASE("hard quantizer statistics match the converter model") {
  std::mt19937_64 rng = make_stream(7, 6);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  const int n = 4096, blocks = 60;

  QuantizerModel q1 = lloyd_max_codebook(1);
  QuantizerModel q3 = lloyd_max_codebook(3);
  double num = 0.0, den = 0.0, err3 = 0.0, pow3 = 0.0;
  for (int b = 0; b < blocks; ++b) {
    VectorXcd x(n);
    for (int i = 0; i < n; ++i) x[i] = std::complex<double>(gauss(rng), gauss(rng));
    VectorXcd y1 = quantize_hard(x, q1);
    num += x.dot(y1).real();  // Bussgang regression numerator
    den += x.squaredNorm();
    // 3-bit: residual against the sqrt(1-rho)-gain model, relative to power
    VectorXcd y3 = quantize_hard(x, q3);
    err3 += (y3 - x / std::sqrt(1.0 - q3.rho) * (1.0 - q3.rho)).squaredNorm();
    pow3 += x.squaredNorm();
  }
  // linear gain of the power-preserving hard quantizer is sqrt(1-rho)
  CHECK(num / den == doctest::Approx(std::sqrt(1.0 - 0.3634)).epsilon(0.015));
  // Bussgang residual power of 3-bit hard quantization near the table value
  CHECK(std::abs(err3 / pow3 - 0.03454) < 0.003);
}
