// SPDX-License-Identifier: Apache-2.0
//
// Independent numerical oracles used by the test suite. Everything here is
// deliberately dumb and slow: trapezoid quadrature over the correlation
// spectral density, plain fixed-point iteration, and brute-force statistics.
// The library under test must agree with these, not the other way round.
#ifndef QMIMO_TESTS_ORACLES_HPP
#define QMIMO_TESTS_ORACLES_HPP

#include <cmath>
#include <stdexcept>

#include "qmimo/channel.hpp"

namespace oracles {

// (1/2pi) * integral over [0, 2pi) of g(f(w)) dw by an n-node trapezoid rule
// (periodic integrand, so plain averaging of equispaced samples).
template <class G>
double spectral_average(double nu, G&& g, int n = 100000) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += g(qmimo::spectral_density(nu, 2.0 * M_PI * i / n));
  return acc / n;
}

// E_ij moment by quadrature of the spectral density.
inline double quad_eij(double rho, double beta, double nu, double xi, int i, int j,
                       int n = 100000) {
  return spectral_average(
      nu,
      [&](double lam) { return std::pow(lam, i) / std::pow(rho * (1.0 + xi) + beta * lam, j); },
      n);
}

// Solves the xi fixed point by bisection against the quadrature right-hand
// side. Completely independent of the library's solvers.
inline double quad_xi(double rho, double beta, double nu, int n = 100000) {
  auto rhs = [&](double xi) {
    return spectral_average(
        nu, [&](double lam) { return lam * (1.0 + xi) / (rho * (1.0 + xi) + beta * lam); }, n);
  };
  double lo = 0.0, hi = 1.0 / rho;
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid - rhs(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Undamped fixed-point iteration of xi = (1+xi)/(rho(1+xi)+beta) for the
// uncorrelated case, as an oracle for the quadratic closed form.
inline double iterate_xi_uncorrelated(double rho, double beta) {
  double xi = 1.0;
  for (int it = 0; it < 100000; ++it) {
    double next = (1.0 + xi) / (rho * (1.0 + xi) + beta);
    if (std::abs(next - xi) < 1e-14 * std::max(1.0, xi)) return next;
    xi = next;
  }
  throw std::runtime_error("iterate_xi_uncorrelated: no convergence");
}

}  // namespace oracles

#endif
