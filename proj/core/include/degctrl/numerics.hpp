#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace degctrl {

using Real = double;
using RealFn = std::function<Real(Real)>;

/// exp with the exponent clamped to [lo, hi]; keeps weighted quantities finite.
Real clamped_exp(Real log_value, Real lo = -700.0, Real hi = 700.0);

/// 7-point Gauss-Legendre on [a, b]. Never evaluates the endpoints.
Real gauss7(const RealFn& f, Real a, Real b);

/// Adaptive bisection on gauss7; rel_tol is relative to the running estimate.
Real adaptive_gauss(const RealFn& f, Real a, Real b, Real rel_tol = 1e-12, int max_depth = 24);

/// Integral of f over [lo, hi] where f may blow up (integrably) at one endpoint.
/// Geometric grading (ratio 1/2) toward the singular end, Gauss panels, and a
/// tail bound from the observed panel decay. Throws divergent_integral when the
/// panel contributions do not decay.
Real graded_singular_integral(const RealFn& f, Real lo, Real hi, bool singular_at_lo,
                              Real rel_tol = 1e-10);

/// Piecewise-linear table on sorted abscissae; clamps outside the range.
class LinearTable {
public:
  LinearTable() = default;
  LinearTable(std::vector<Real> xs, std::vector<Real> ys);
  Real operator()(Real x) const;
  const std::vector<Real>& xs() const { return xs_; }
  const std::vector<Real>& ys() const { return ys_; }

private:
  std::vector<Real> xs_, ys_;
};

/// Tridiagonal system; Thomas solve (no pivoting: rows here are diagonally dominant).
struct Tridiag {
  std::vector<Real> sub, diag, sup; // sub/sup have size n-1
  std::size_t size() const { return diag.size(); }
};

void thomas_solve(const Tridiag& T, const std::vector<Real>& rhs, std::vector<Real>& x);

/// Prefactored Thomas solve for repeated right-hand sides with the same matrix.
class TridiagFactor {
public:
  explicit TridiagFactor(const Tridiag& T);
  void solve(const std::vector<Real>& rhs, std::vector<Real>& x) const;

private:
  std::vector<Real> cprime_, dinv_, sub_;
};

/// Deterministic smooth random fields: sums of sine modes with 1/k^2 spectrum.
/// The same generator sampled on two grids agrees as a function, so ratio
/// monitors stay comparable under mesh refinement.
class SmoothFieldGen {
public:
  SmoothFieldGen(std::uint64_t seed, int n_modes = 8);
  /// Random field on [x_lo, x_hi] vanishing at both ends.
  RealFn sample(Real x_lo = 0.0, Real x_hi = 1.0);
  /// Random space-time field vanishing at the spatial ends.
  std::function<Real(Real, Real)> sample_spacetime(Real T, Real x_lo = 0.0, Real x_hi = 1.0);

private:
  std::mt19937_64 rng_;
  int n_modes_;
};

} // namespace degctrl
