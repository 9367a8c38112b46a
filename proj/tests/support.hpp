#pragma once

// Shared oracles and helpers for the test suites. Everything here is
// independent of the implementation paths it checks.

#include <cmath>
#include <random>
#include <vector>

#include "degctrl/pde.hpp"

namespace testsupport {

using degctrl::Real;

// Smallest eigenvalue of -A (A the discrete operator) by inverse power
// iteration with tridiagonal solves.
inline Real smallest_eigenvalue_neg_A(const degctrl::DiscreteOperator& op, int iters = 400) {
  degctrl::Tridiag minusA = op.A;
  for (auto& v : minusA.diag) v = -v;
  for (auto& v : minusA.sub) v = -v;
  for (auto& v : minusA.sup) v = -v;
  degctrl::TridiagFactor factor(minusA);
  const std::size_t n = minusA.size();
  std::vector<Real> v(n, 1.0), w(n);
  Real lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    factor.solve(v, w);
    Real norm = 0.0;
    for (Real x : w) norm += x * x;
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
    // Rayleigh quotient on -A
    std::vector<Real> Av(n);
    for (std::size_t j = 0; j < n; ++j) {
      Real s = minusA.diag[j] * v[j];
      if (j > 0) s += minusA.sub[j - 1] * v[j - 1];
      if (j + 1 < n) s += minusA.sup[j] * v[j + 1];
      Av[j] = s;
    }
    lambda = 0.0;
    for (std::size_t j = 0; j < n; ++j) lambda += v[j] * Av[j];
  }
  return lambda;
}

// Truncated eigen-expansion solution of -v_t - v_xx = g (a == 1, Dirichlet,
// v(T) = 0, g constant in time): v(t, x) = sum_n <g, e_n> (1 - e^{-mu_n (T-t)}) / mu_n e_n(x)
// with e_n = sqrt(2) sin(n pi x), mu_n = (n pi)^2.
inline Real adjoint_series_constant_g(Real g_const, Real t, Real x, Real T, int n_terms = 4000) {
  Real v = 0.0;
  for (int n = 1; n <= n_terms; n += 2) { // even modes have zero projection
    const Real mu = n * M_PI * n * M_PI;
    const Real coef = g_const * 2.0 * (1.0 - std::cos(n * M_PI)) / (n * M_PI); // <g, sqrt2 sin> * sqrt2
    v += coef * (1.0 - std::exp(-mu * (T - t))) / mu * std::sin(n * M_PI * x);
  }
  return v;
}

// Deterministic dense random vectors on the interior nodes.
inline std::vector<Real> random_interior(std::mt19937_64& rng, int N, Real amp = 1.0) {
  std::uniform_real_distribution<Real> unif(-amp, amp);
  std::vector<Real> v(static_cast<std::size_t>(N) + 2, 0.0);
  for (int i = 1; i <= N; ++i) v[static_cast<std::size_t>(i)] = unif(rng);
  return v;
}

inline Real rel_diff(Real a, Real b) {
  const Real scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

inline Real max_abs_diff(const std::vector<std::vector<Real>>& A,
                         const std::vector<std::vector<Real>>& B) {
  Real m = 0.0;
  for (std::size_t n = 0; n < A.size(); ++n)
    for (std::size_t i = 0; i < A[n].size(); ++i) m = std::max(m, std::abs(A[n][i] - B[n][i]));
  return m;
}

inline Real traj_rel_diff(const degctrl::Trajectory& a, const degctrl::Trajectory& b) {
  Real num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < a.values.size(); ++n)
    for (std::size_t i = 0; i < a.values[n].size(); ++i) {
      const Real d = a.values[n][i] - b.values[n][i];
      num += d * d;
      den += b.values[n][i] * b.values[n][i];
    }
  return den == 0.0 ? (num == 0.0 ? 0.0 : 1.0) : std::sqrt(num / den);
}

} // namespace testsupport
