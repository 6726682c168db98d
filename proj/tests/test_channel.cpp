// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "qmimo/channel.hpp"

using namespace qmimo;

TEST_CASE("spectral density values and normalization") {
  CHECK(spectral_density(0.0, 1.234) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(spectral_density(0.5, 0.0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK_THROWS_AS(spectral_density(1.0, 0.0), std::invalid_argument);
  // mean over the circle equals the zero-lag correlation, which is 1
  std::mt19937_64 rng = make_stream(11, 0);
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  for (double nu : {0.2, 0.5, 0.8}) {
    double acc = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) acc += spectral_density(nu, u(rng));
    CHECK(std::abs(acc / n - 1.0) < 0.05);
  }
}

TEST_CASE("correlation matrix structure") {
  CorrelationModel id = exp_toeplitz(4, 0.0);
  CHECK((id.matrix() - Eigen::MatrixXd::Identity(4, 4)).norm() == 0.0);
  CHECK((id.sqrt_matrix() - Eigen::MatrixXd::Identity(4, 4)).norm() == 0.0);

  CorrelationModel c2 = exp_toeplitz(2, 0.5);
  CHECK(c2.matrix()(0, 0) == 1.0);
  CHECK(c2.matrix()(0, 1) == 0.5);
  CHECK(c2.matrix()(1, 0) == 0.5);
  CHECK(c2.spectrum()[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(c2.spectrum()[1] == doctest::Approx(1.5).epsilon(1e-12));

  CorrelationModel c = exp_toeplitz(64, 0.7);
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j)
      CHECK(c.matrix()(i, j) == doctest::Approx(std::pow(0.7, std::abs(i - j))).epsilon(1e-14));
  CHECK(c.matrix().trace() == doctest::Approx(64.0).epsilon(1e-14));
  CHECK(c.spectrum().sum() == doctest::Approx(64.0).epsilon(1e-10));
  CHECK((c.sqrt_matrix() * c.sqrt_matrix() - c.matrix()).norm() < 1e-10 * c.matrix().norm());
  CHECK((c.sqrt_matrix() - c.sqrt_matrix().transpose()).norm() < 1e-10);
  CHECK_THROWS_AS(exp_toeplitz(4, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(exp_toeplitz(0, 0.5), std::invalid_argument);
}

TEST_CASE("positive definiteness up to strong correlation") {
  for (double nu : {0.5, 0.9, 0.95}) {
    CorrelationModel c = exp_toeplitz(256, nu);
    CHECK(c.spectrum().minCoeff() > 0.0);
  }
  CHECK(exp_toeplitz(1024, 0.95).spectrum().minCoeff() > 0.0);
}

TEST_CASE("eigenvalue spectrum converges to the spectral density law") {
  // empirical mean of g(lambda) vs (1/2pi) integral g(f(w)) dw at N = 512
  CorrelationModel c = exp_toeplitz(512, 0.5);
  for (auto g : {+[](double x) { return x; }, +[](double x) { return x / (1.0 + x); }}) {
    double emp = 0.0;
    for (int i = 0; i < 512; ++i) emp += g(c.spectrum()[i]);
    emp /= 512.0;
    CHECK(std::abs(emp - oracles::spectral_average(0.5, g)) < 1e-2);
  }
}

TEST_CASE("channel sampling: correlation and energy statistics") {
  const int n = 8, trials = 10000;
  CorrelationModel c = exp_toeplitz(n, 0.5);
  std::mt19937_64 rng = make_stream(11, 1);
  Eigen::MatrixXcd cov = Eigen::MatrixXcd::Zero(n, n);
  double energy = 0.0;
  for (int t = 0; t < trials; ++t) {
    ChannelRealization ch = sample_channel(c, 2, rng);
    CHECK(ch.h.rows() == 2);
    CHECK(ch.h.cols() == n);
    cov += ch.h.row(0).transpose() * ch.h.row(0).conjugate();
    energy += ch.h.row(0).squaredNorm();
  }
  cov /= trials;
  CHECK((cov - c.matrix().cast<std::complex<double>>()).norm() < 0.05 * c.matrix().norm());
  CHECK(energy / trials == doctest::Approx(static_cast<double>(n)).epsilon(0.02));

  // nu = 0: rows are white
  CorrelationModel white = exp_toeplitz(n, 0.0);
  std::mt19937_64 rng2 = make_stream(11, 2);
  Eigen::MatrixXcd wcov = Eigen::MatrixXcd::Zero(n, n);
  for (int t = 0; t < trials; ++t) {
    ChannelRealization ch = sample_channel(white, 1, rng2);
    CHECK((ch.h - ch.h_iid).norm() == 0.0);
    wcov += ch.h.row(0).transpose() * ch.h.row(0).conjugate();
  }
  wcov /= trials;
  CHECK((wcov - Eigen::MatrixXcd::Identity(n, n)).norm() < 5.0 / std::sqrt(trials) * n);
}

TEST_CASE("channel sampling is deterministic per stream") {
  CorrelationModel c = exp_toeplitz(16, 0.3);
  std::mt19937_64 a = make_stream(42, 9), b = make_stream(42, 9);
  CHECK((sample_channel(c, 4, a).h - sample_channel(c, 4, b).h).norm() == 0.0);
  std::mt19937_64 d = make_stream(42, 10);
  CHECK((sample_channel(c, 4, a).h - sample_channel(c, 4, d).h).norm() != 0.0);
}
