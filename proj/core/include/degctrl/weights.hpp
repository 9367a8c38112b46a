#pragma once

#include <string>
#include <utility>
#include <vector>

#include "degctrl/coeffs.hpp"
#include "degctrl/numerics.hpp"

namespace degctrl {

enum class GammaMode { carleman_only, fixed_point };

/// Carleman weight family on the time window [t0, T] and space interval
/// [x_lo, x_hi]. Houses theta, beta, psi, Psi, phi, eta, Phi, sigma and the
/// extremal profiles Phi_hat, Phi_star, sigma_hat.
///
///   psi(x)   = gamma (int_{deg end}^x dist/a - d), tabulated by singular quadrature
///   Psi(x)   = e^{lambda rho(x)} - e^{2L},  L = lambda ||rho||_inf
///   theta(t) = [(t - t0)(T - t)]^{-p},  capped at 1e300 at the window ends
///   beta(t)  = theta(mid) on [t0, mid], theta(t) on [mid, T]
///   phi = theta psi, eta = theta Psi, Phi = beta psi, sigma = beta Psi
class CarlemanWeights {
public:
  Real T = 1.0;
  Real t0 = 0.0;     // window start (two-phase strategy shifts it)
  int p = 4;         // time-weight exponent: 4 per the default, 2 per the variant
  Real gamma = 0.0;
  Real d = 0.0;
  Real d_star_value = 0.0;
  Real lambda = 0.0; // = L since the canonical bump has ||rho||_inf = 1
  Side side = Side::left;
  Real x_lo = 0.0, x_hi = 1.0;

  Real L() const { return lambda; }
  Real horizon() const { return T - t0; }
  Real mid() const { return 0.5 * (t0 + T); }
  Real five_eighths() const { return t0 + 0.625 * (T - t0); }

  Real theta(Real t) const;
  Real dtheta(Real t) const; // theta'
  Real beta(Real t) const;
  Real beta0() const { return beta0_; }

  Real psi(Real x) const { return psi_table_(x); }
  Real rho(Real x) const;
  Real Psi(Real x) const;
  Real Psi_max() const { return Psi_max_; }
  Real Psi_min() const { return Psi_min_; }

  Real phi(Real t, Real x) const { return theta(t) * psi(x); }
  Real eta(Real t, Real x) const { return theta(t) * Psi(x); }
  Real Phi(Real t, Real x) const { return beta(t) * psi(x); }
  Real sigma(Real t, Real x) const { return beta(t) * Psi(x); }

  Real Phi_hat(Real t) const { return gamma * (d_star_value - d) * beta(t); }
  Real Phi_star(Real t) const { return -(gamma * d) * beta(t); }
  Real sigma_hat(Real t) const { return Psi_max_ * beta(t); }
  /// max over Q of sigma = sigma_hat(t0); the synthesis weights are normalized by it.
  Real sigma_ref() const { return Psi_max_ * beta0_; }

  // filled by build_weights
  LinearTable psi_table_;
  Real beta0_ = 0.0;
  Real Psi_max_ = 0.0, Psi_min_ = 0.0;
  Real rho_center_ = 0.5, rho_k_ = 0.0; // quadratic reparameterization of the bump
};

struct WeightReport {
  std::string inequality_id;
  Real max_violation = 0.0; // <= 0 means satisfied
  bool passed = false;
  Real witness_t = 0.0, witness_x = 0.0;
};

/// Builds the weight family for coefficient a on [x_lo, x_hi] x [t0, T].
/// psi is tabulated on x_nodes (cumulative singular quadrature, then linear
/// interpolation). omega_center places the flat point of the bump rho inside
/// the control region. Rejects (gamma, d) outside the admissible window.
CarlemanWeights build_weights(Real T, const DiffusionCoefficient& a, Real gamma, Real d, Real L,
                              int p, const std::vector<Real>& x_nodes, Real omega_center = 0.5,
                              Real t0 = 0.0);

/// Admissible (gamma, d) for the given d* and L:
///   carleman_only: d = 2 d*, gamma from the window above e^{2L}/(d - d*);
///   fixed_point:   d = 10 d*, gamma at the midpoint of
///                  (e^{2L}/(d-d*), 3(e^{2L}-e^L)/(2(d-d*))),
///                  which enforces (3/2) sigma_hat <= Phi_hat. Requires L > ln 3.
std::pair<Real, Real> choose_gamma_d(Real d_star_value, Real L, GammaMode mode);

/// Evaluates every imposed weight inequality on the (t, x) tensor grid and
/// reports the worst violation per inequality. theta_ratio_constant reports
/// the empirical constant sup |theta'| theta^{-3/2} instead of a violation.
std::vector<WeightReport> verify_weight_inequalities(const CarlemanWeights& w,
                                                     const std::vector<Real>& x_nodes,
                                                     const std::vector<Real>& t_nodes);

/// Empirical constant sup over interior time nodes of |theta'| / theta^{3/2}.
Real theta_ratio_constant(const CarlemanWeights& w, const std::vector<Real>& t_nodes);

/// Per-node table (t, x, theta, beta, phi, eta, Phi, sigma) for external plotting.
void write_weight_dump(const std::string& path, const CarlemanWeights& w,
                       const std::vector<Real>& x_nodes, const std::vector<Real>& t_nodes);

} // namespace degctrl
