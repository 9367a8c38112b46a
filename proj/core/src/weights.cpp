#include "degctrl/weights.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "degctrl/errors.hpp"

namespace degctrl {

namespace {
constexpr Real kThetaCap = 1e300;
}

Real CarlemanWeights::theta(Real t) const {
  const Real base = (t - t0) * (T - t);
  if (!(base > 0.0)) return kThetaCap;
  const Real v = std::pow(base, -static_cast<Real>(p));
  return (std::isfinite(v) && v < kThetaCap) ? v : kThetaCap;
}

Real CarlemanWeights::dtheta(Real t) const {
  const Real base = (t - t0) * (T - t);
  if (!(base > 0.0)) return 0.0;
  // theta' = -p base^{-p-1} base' with base' = (T - t) - (t - t0)
  const Real v = -static_cast<Real>(p) * std::pow(base, -static_cast<Real>(p) - 1.0) *
                 ((T - t) - (t - t0));
  return std::isfinite(v) ? v : 0.0;
}

Real CarlemanWeights::beta(Real t) const { return t <= mid() ? beta0_ : theta(t); }

Real CarlemanWeights::rho(Real x) const {
  // sin(pi m(x)) with the monotone quadratic map m putting the flat point at
  // the omega center; the paper constrains only the sign/zero pattern of rho.
  const Real xi = (x - x_lo) / (x_hi - x_lo);
  const Real m = xi + rho_k_ * xi * (1.0 - xi);
  return std::sin(M_PI * m);
}

Real CarlemanWeights::Psi(Real x) const {
  return std::exp(lambda * rho(x)) - std::exp(2.0 * lambda);
}

CarlemanWeights build_weights(Real T, const DiffusionCoefficient& a, Real gamma, Real d, Real L,
                              int p, const std::vector<Real>& x_nodes, Real omega_center,
                              Real t0) {
  if (!(T > t0)) fail(ErrorKind::configuration, "build_weights: need T > t0");
  if (p != 2 && p != 4) fail(ErrorKind::configuration, "build_weights: p must be 2 or 4");
  if (x_nodes.size() < 3) fail(ErrorKind::configuration, "build_weights: need >= 3 x nodes");
  if (a.degeneracy_side == Side::both)
    fail(ErrorKind::configuration,
         "build_weights: double degeneracy composes per-side weights via the gluing pipeline");

  CarlemanWeights w;
  w.T = T;
  w.t0 = t0;
  w.p = p;
  w.lambda = L;
  w.side = a.degeneracy_side == Side::right ? Side::right : Side::left;
  w.x_lo = x_nodes.front();
  w.x_hi = x_nodes.back();

  w.d_star_value = d_star(a, w.x_lo, w.x_hi);
  if (!(d > w.d_star_value))
    fail(ErrorKind::weight_admissibility,
         "build_weights: d = " + std::to_string(d) + " must exceed d* = " +
             std::to_string(w.d_star_value));
  if (!(gamma > std::exp(2.0 * L) / (d - w.d_star_value)))
    fail(ErrorKind::weight_admissibility,
         "build_weights: gamma below the admissible bound e^{2L}/(d - d*)");
  w.gamma = gamma;
  w.d = d;

  // Cumulative singular quadrature for psi on the given nodes. Cells touching
  // the degenerate endpoint are graded; interior cells use adaptive Gauss.
  const bool right = w.side == Side::right;
  const Real lo = w.x_lo, hi = w.x_hi;
  RealFn integrand;
  if (right)
    integrand = [&a, hi](Real y) { return (hi - y) / a(y); };
  else
    integrand = [&a, lo](Real y) { return (y - lo) / a(y); };

  const std::size_t n = x_nodes.size();
  std::vector<Real> cumulative(n, 0.0);
  if (!right) {
    // I(x) = int_lo^x dist/a
    cumulative[0] = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const Real A = x_nodes[i], B = x_nodes[i + 1];
      Real cell;
      if (i == 0 && a.degenerate_left())
        cell = graded_singular_integral(integrand, A, B, /*singular_at_lo=*/true, 1e-11);
      else
        cell = adaptive_gauss(integrand, A, B, 1e-12);
      cumulative[i + 1] = cumulative[i] + cell;
    }
  } else {
    // I(x) = int_x^hi dist/a, accumulated from the right
    cumulative[n - 1] = 0.0;
    for (std::size_t i = n - 1; i-- > 0;) {
      const Real A = x_nodes[i], B = x_nodes[i + 1];
      Real cell;
      if (i + 2 == n && a.degenerate_right())
        cell = graded_singular_integral(integrand, A, B, /*singular_at_lo=*/false, 1e-11);
      else
        cell = adaptive_gauss(integrand, A, B, 1e-12);
      cumulative[i] = cumulative[i + 1] + cell;
    }
  }
  std::vector<Real> psi_vals(n);
  for (std::size_t i = 0; i < n; ++i) psi_vals[i] = gamma * (cumulative[i] - d);
  w.psi_table_ = LinearTable(x_nodes, psi_vals);

  // Bump reparameterization: m(c) = 1/2 so rho_x vanishes only at the omega center.
  const Real c = (omega_center - w.x_lo) / (w.x_hi - w.x_lo);
  if (!(c > 0.0 && c < 1.0))
    fail(ErrorKind::configuration, "build_weights: omega center outside the interval");
  const Real k = (0.5 - c) / (c * (1.0 - c));
  if (std::abs(k) >= 1.0)
    fail(ErrorKind::configuration,
         "build_weights: omega center too close to the boundary for the quadratic bump map");
  w.rho_center_ = c;
  w.rho_k_ = k;

  w.Psi_max_ = std::exp(L) - std::exp(2.0 * L);
  w.Psi_min_ = 1.0 - std::exp(2.0 * L);
  w.beta0_ = w.theta(w.mid());
  return w;
}

std::pair<Real, Real> choose_gamma_d(Real d_star_value, Real L, GammaMode mode) {
  if (!(d_star_value > 0.0)) fail(ErrorKind::configuration, "choose_gamma_d: d* must be positive");
  const Real e2L = std::exp(2.0 * L);
  const Real eL = std::exp(L);
  const Real d = (mode == GammaMode::fixed_point) ? 10.0 * d_star_value : 2.0 * d_star_value;
  const Real span = d - d_star_value;
  const Real lower = e2L / span;                  // admissibility bound
  const Real upper = 1.5 * (e2L - eL) / span;     // enforces (3/2) sigma_hat <= Phi_hat
  if (mode == GammaMode::fixed_point) {
    if (!(e2L > 3.0 * eL))
      fail(ErrorKind::empty_window,
           "choose_gamma_d: gamma window empty; fixed-point mode needs L > ln 3");
    return {0.5 * (lower + upper), d};
  }
  // carleman_only: only the lower bound is imposed; reuse the window midpoint
  // when it exists, otherwise step safely above the bound.
  const Real gamma = (upper > lower) ? 0.5 * (lower + upper) : 1.5 * lower;
  return {gamma, d};
}

Real theta_ratio_constant(const CarlemanWeights& w, const std::vector<Real>& t_nodes) {
  Real sup = 0.0;
  for (Real t : t_nodes) {
    if (t <= w.t0 || t >= w.T) continue;
    const Real th = w.theta(t);
    if (th >= 1e290) continue;
    sup = std::max(sup, std::abs(w.dtheta(t)) / std::pow(th, 1.5));
  }
  return sup;
}

std::vector<WeightReport> verify_weight_inequalities(const CarlemanWeights& w,
                                                     const std::vector<Real>& x_nodes,
                                                     const std::vector<Real>& t_nodes) {
  auto make = [](const std::string& id) {
    WeightReport r;
    r.inequality_id = id;
    r.max_violation = -std::numeric_limits<Real>::infinity();
    return r;
  };
  auto note = [](WeightReport& r, Real violation, Real t, Real x) {
    if (violation > r.max_violation) {
      r.max_violation = violation;
      r.witness_t = t;
      r.witness_x = x;
    }
  };

  WeightReport psi_range = make("psi-range");          // -gamma d <= psi < 0
  WeightReport psi_le_Psi = make("psi-le-Psi");        // psi <= Psi (hence phi <= eta)
  WeightReport Phi_le_sigma = make("Phi-le-sigma");    // Phi <= sigma
  WeightReport Phi_floor = make("Phi-star-5T8-floor"); // Phi*(5T/8) <= Phi on [t0, 5T/8]
  WeightReport sigma_hat_chain = make("sigma-hat-le-Phi-hat"); // (3/2) sigma_hat <= Phi_hat

  const Real gd = w.gamma * w.d;
  const Real t58 = w.five_eighths();
  const Real floor_val = w.Phi_star(t58);

  for (Real x : x_nodes) {
    const Real pv = w.psi(x);
    const Real Pv = w.Psi(x);
    note(psi_range, std::max(-gd - pv, pv), 0.0, x);
    note(psi_le_Psi, pv - Pv, 0.0, x);
  }
  for (Real t : t_nodes) {
    const Real b = w.beta(t);
    note(sigma_hat_chain, 1.5 * w.sigma_hat(t) - w.Phi_hat(t), t, 0.0);
    for (Real x : x_nodes) {
      const Real pv = w.psi(x);
      const Real Pv = w.Psi(x);
      note(Phi_le_sigma, b * pv - b * Pv, t, x);
      if (t <= t58) note(Phi_floor, floor_val - b * pv, t, x);
    }
  }

  const Real tol = 1e-12;
  std::vector<WeightReport> out{psi_range, psi_le_Psi, Phi_le_sigma, Phi_floor, sigma_hat_chain};
  for (auto& r : out) r.passed = r.max_violation <= tol;

  WeightReport theta_c = make("theta-ratio-constant");
  theta_c.max_violation = theta_ratio_constant(w, t_nodes); // reported value, not a violation
  theta_c.passed = std::isfinite(theta_c.max_violation);
  out.push_back(theta_c);
  return out;
}

void write_weight_dump(const std::string& path, const CarlemanWeights& w,
                       const std::vector<Real>& x_nodes, const std::vector<Real>& t_nodes) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  std::fprintf(f, "# carleman weight dump\n");
  std::fprintf(f, "# gamma = %.17g  d = %.17g  d_star = %.17g  L = %.17g  p = %d\n", w.gamma, w.d,
               w.d_star_value, w.lambda, w.p);
  std::fprintf(f, "t x theta beta phi eta Phi sigma\n");
  for (Real t : t_nodes)
    for (Real x : x_nodes)
      std::fprintf(f, "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n", t, x, w.theta(t),
                   w.beta(t), w.phi(t, x), w.eta(t, x), w.Phi(t, x), w.sigma(t, x));
  std::fclose(f);
}

} // namespace degctrl
