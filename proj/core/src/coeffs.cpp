#include "degctrl/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "degctrl/errors.hpp"

namespace degctrl {

Side side_from_string(const std::string& s) {
  if (s == "none") return Side::none;
  if (s == "left") return Side::left;
  if (s == "right") return Side::right;
  if (s == "both") return Side::both;
  fail(ErrorKind::configuration, "unknown degeneracy side '" + s + "'");
}

std::string to_string(Side s) {
  switch (s) {
    case Side::none: return "none";
    case Side::left: return "left";
    case Side::right: return "right";
    case Side::both: return "both";
  }
  return "?";
}

std::string to_string(DegeneracyCase c) { return c == DegeneracyCase::WD ? "WD" : "SD"; }

namespace {

DegeneracyCase case_for(Real alpha) { return alpha < 1.0 ? DegeneracyCase::WD : DegeneracyCase::SD; }

void check_exponent(Real alpha, const char* name) {
  if (!(alpha >= 0.0) || !(alpha < 2.0))
    fail(ErrorKind::invalid_degeneracy,
         std::string(name) + " must lie in [0, 2), got " + std::to_string(alpha));
}

std::optional<Real> default_beta_mono(Real alpha) {
  if (alpha < 1.0) return std::nullopt; // WD: no monotonicity hypothesis
  return alpha > 1.0 ? alpha : 0.5;     // SD: beta in (1, alpha] resp. (0, 1)
}

// One-sided second-order derivative on the grid for tabulated coefficients.
Real fd_derivative(const RealFn& f, Real x, Real h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

} // namespace

DiffusionCoefficient prototype_coefficient(Real alpha_left, Real alpha_right, Side side) {
  check_exponent(alpha_left, "alpha_left");
  check_exponent(alpha_right, "alpha_right");
  const bool left_on = alpha_left > 0.0;
  const bool right_on = alpha_right > 0.0;
  Side expect = Side::none;
  if (left_on && right_on) expect = Side::both;
  else if (left_on) expect = Side::left;
  else if (right_on) expect = Side::right;
  if (side != expect)
    fail(ErrorKind::invalid_degeneracy,
         "side '" + to_string(side) + "' inconsistent with exponents (" +
             std::to_string(alpha_left) + ", " + std::to_string(alpha_right) + ")");

  DiffusionCoefficient a;
  a.degeneracy_side = side;
  a.alpha_left = alpha_left;
  a.alpha_right = alpha_right;
  a.case_left = case_for(alpha_left);
  a.case_right = case_for(alpha_right);
  a.beta_mono_left = left_on ? default_beta_mono(alpha_left) : std::nullopt;
  a.beta_mono_right = right_on ? default_beta_mono(alpha_right) : std::nullopt;
  a.evaluator = [alpha_left, alpha_right](Real x) {
    Real v = 1.0;
    if (alpha_left > 0.0) v *= std::pow(x, alpha_left);
    if (alpha_right > 0.0) v *= std::pow(1.0 - x, alpha_right);
    return v;
  };
  a.derivative = [alpha_left, alpha_right](Real x) {
    // d/dx [x^al (1-x)^ar] with each factor handled only when present
    Real v = 0.0;
    if (alpha_left > 0.0) {
      Real t = alpha_left * std::pow(x, alpha_left - 1.0);
      if (alpha_right > 0.0) t *= std::pow(1.0 - x, alpha_right);
      v += t;
    }
    if (alpha_right > 0.0) {
      Real t = -alpha_right * std::pow(1.0 - x, alpha_right - 1.0);
      if (alpha_left > 0.0) t *= std::pow(x, alpha_left);
      v += t;
    }
    return v;
  };
  return a;
}

DiffusionCoefficient tabulated_coefficient(std::vector<Real> xs, std::vector<Real> as, Side side,
                                           Real alpha_left, Real alpha_right) {
  check_exponent(alpha_left, "alpha_left");
  check_exponent(alpha_right, "alpha_right");
  if (xs.size() != as.size() || xs.size() < 4)
    fail(ErrorKind::configuration, "tabulated coefficient needs >= 4 (x, a) samples");
  for (std::size_t i = 0; i < as.size(); ++i)
    if (!(as[i] >= 0.0) || !std::isfinite(as[i]))
      fail(ErrorKind::configuration, "tabulated coefficient has a negative or non-finite value");
  LinearTable table(std::move(xs), std::move(as));
  DiffusionCoefficient a;
  a.degeneracy_side = side;
  a.alpha_left = alpha_left;
  a.alpha_right = alpha_right;
  a.case_left = case_for(alpha_left);
  a.case_right = case_for(alpha_right);
  a.beta_mono_left = (side == Side::left || side == Side::both) ? default_beta_mono(alpha_left)
                                                                : std::nullopt;
  a.beta_mono_right = (side == Side::right || side == Side::both) ? default_beta_mono(alpha_right)
                                                                  : std::nullopt;
  a.evaluator = [table](Real x) { return table(x); };
  // no analytic derivative; checks fall back to finite differences
  return a;
}

std::vector<HypothesisReport> check_degeneracy_hypotheses(const DiffusionCoefficient& a,
                                                          const std::vector<Real>& grid) {
  std::vector<HypothesisReport> out;
  if (grid.size() < 3) fail(ErrorKind::configuration, "hypothesis check needs >= 3 grid nodes");
  const Real x_lo = grid.front();
  const Real x_hi = grid.back();
  const Real h = (x_hi - x_lo) / static_cast<Real>(grid.size() - 1);

  auto deriv = [&](Real x) {
    if (a.derivative) return a.derivative(x);
    return fd_derivative(a.evaluator, x, 0.5 * h);
  };

  // alpha inequalities, evaluated on interior nodes only (a' may be unbounded
  // at a weakly degenerate endpoint).
  {
    HypothesisReport r{"alpha-left", 0.0, std::numeric_limits<Real>::infinity(), false};
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
      const Real x = grid[i];
      const Real m = a.alpha_left * a(x) - x * deriv(x);
      if (m < r.worst_margin) {
        r.worst_margin = m;
        r.worst_node = x;
      }
    }
    r.passed = r.worst_margin >= -kHypothesisTol;
    out.push_back(r);
  }
  {
    HypothesisReport r{"alpha-right", 0.0, std::numeric_limits<Real>::infinity(), false};
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
      const Real x = grid[i];
      const Real m = a.alpha_right * a(x) - (x - 1.0) * deriv(x);
      if (m < r.worst_margin) {
        r.worst_margin = m;
        r.worst_node = x;
      }
    }
    r.passed = r.worst_margin >= -kHypothesisTol;
    out.push_back(r);
  }

  // beta-monotonicity: a/x^beta nondecreasing on the first 10% of the interval
  // (mirrored and nonincreasing near 1).
  if (a.degenerate_left() && a.case_left == DegeneracyCase::SD && a.beta_mono_left) {
    const Real beta = *a.beta_mono_left;
    HypothesisReport r{"beta-mono-left", 0.0, std::numeric_limits<Real>::infinity(), false};
    Real prev = 0.0;
    bool have_prev = false;
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
      const Real x = grid[i];
      if (x - x_lo > 0.1 * (x_hi - x_lo)) break;
      const Real g = a(x) / std::pow(x - x_lo, beta);
      if (have_prev) {
        const Real m = g - prev;
        if (m < r.worst_margin) {
          r.worst_margin = m;
          r.worst_node = x;
        }
      }
      prev = g;
      have_prev = true;
    }
    if (!std::isfinite(r.worst_margin)) r.worst_margin = 0.0;
    r.passed = r.worst_margin >= -kHypothesisTol;
    out.push_back(r);
  }
  if (a.degenerate_right() && a.case_right == DegeneracyCase::SD && a.beta_mono_right) {
    const Real beta = *a.beta_mono_right;
    HypothesisReport r{"beta-mono-right", 0.0, std::numeric_limits<Real>::infinity(), false};
    Real prev = 0.0;
    bool have_prev = false;
    for (std::size_t i = grid.size() - 2; i >= 1; --i) {
      const Real x = grid[i];
      if (x_hi - x > 0.1 * (x_hi - x_lo)) break;
      const Real g = a(x) / std::pow(x_hi - x, beta);
      if (have_prev) {
        const Real m = g - prev; // walking toward 1: g must not increase... prev is closer to 1
        if (m < r.worst_margin) {
          r.worst_margin = m;
          r.worst_node = x;
        }
      }
      prev = g;
      have_prev = true;
    }
    if (!std::isfinite(r.worst_margin)) r.worst_margin = 0.0;
    r.passed = r.worst_margin >= -kHypothesisTol;
    out.push_back(r);
  }
  return out;
}

Real d_star(const DiffusionCoefficient& a, Real x_lo, Real x_hi) {
  if (!(x_hi > x_lo)) fail(ErrorKind::configuration, "d_star: empty interval");
  const bool right = a.degeneracy_side == Side::right;
  if (a.degeneracy_side == Side::both)
    fail(ErrorKind::configuration,
         "d_star: double degeneracy has no single weight; build per-side sub-problems");
  RealFn f;
  if (right)
    f = [&a, x_hi](Real y) { return (x_hi - y) / a(y); };
  else
    f = [&a, x_lo](Real y) { return (y - x_lo) / a(y); };
  // The integrand is bounded at the non-degenerate end and integrable at the
  // degenerate one; grade toward the degenerate end.
  return graded_singular_integral(f, x_lo, x_hi, /*singular_at_lo=*/!right, 1e-10);
}

Real hardy_poincare_ratio(const std::vector<Real>& y, const std::vector<Real>& x_nodes,
                          const DiffusionCoefficient& a) {
  if (y.size() != x_nodes.size() || y.size() < 3)
    fail(ErrorKind::configuration, "hardy_poincare_ratio: field/grid size mismatch");
  const Real x_lo = x_nodes.front();
  const Real x_hi = x_nodes.back();
  const bool use_right_dist = a.degenerate_right(); // right or both: (1-x)^2 per the mirrored inequality

  // H_a^1 boundary conditions: Dirichlet required except at an SD degenerate end.
  const bool need_left_zero = !(a.degenerate_left() && a.case_left == DegeneracyCase::SD);
  const bool need_right_zero = !(a.degenerate_right() && a.case_right == DegeneracyCase::SD);
  if (need_left_zero && y.front() != 0.0)
    fail(ErrorKind::degenerate_field, "field violates y(x_lo) = 0");
  if (need_right_zero && y.back() != 0.0)
    fail(ErrorKind::degenerate_field, "field violates y(x_hi) = 0");

  // Midpoint rule on cells for both integrals.
  Real num = 0.0, den = 0.0;
  for (std::size_t i = 0; i + 1 < x_nodes.size(); ++i) {
    const Real h = x_nodes[i + 1] - x_nodes[i];
    const Real xm = 0.5 * (x_nodes[i] + x_nodes[i + 1]);
    const Real am = a(xm);
    const Real ym = 0.5 * (y[i] + y[i + 1]);
    const Real dy = (y[i + 1] - y[i]) / h;
    const Real dist = use_right_dist ? (x_hi - xm) : (xm - x_lo);
    num += h * am / (dist * dist) * ym * ym;
    den += h * am * dy * dy;
  }
  if (!(den > 1e-300))
    fail(ErrorKind::degenerate_field, "hardy_poincare_ratio: zero weighted gradient energy");
  return num / den;
}

DiffusionCoefficient coefficient_from_record(const std::map<std::string, std::string>& record,
                                             const std::string& base_dir) {
  auto get = [&](const std::string& key, const std::string& fallback) {
    auto it = record.find(key);
    return it == record.end() ? fallback : it->second;
  };
  const std::string kind = get("kind", "prototype");
  const Real al = std::stod(get("alpha_left", "0"));
  const Real ar = std::stod(get("alpha_right", "0"));
  const Side side = side_from_string(get("side", "none"));
  if (kind == "prototype") return prototype_coefficient(al, ar, side);
  if (kind == "tabulated") {
    auto it = record.find("table");
    if (it == record.end()) fail(ErrorKind::configuration, "tabulated coefficient needs 'table'");
    std::vector<Real> xs, as;
    std::string path = it->second;
    if (!path.empty() && path[0] != '/') path = base_dir + "/" + path;
    read_coefficient_table(path, xs, as);
    return tabulated_coefficient(std::move(xs), std::move(as), side, al, ar);
  }
  fail(ErrorKind::configuration, "coefficient kind must be prototype|tabulated, got '" + kind + "'");
}

void read_coefficient_table(const std::string& path, std::vector<Real>& xs, std::vector<Real>& as) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open coefficient table '" + path + "'");
  xs.clear();
  as.clear();
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    Real x, v;
    if (ss >> x >> v) {
      xs.push_back(x);
      as.push_back(v);
    }
  }
  if (xs.size() < 4) fail(ErrorKind::io, "coefficient table '" + path + "' has < 4 rows");
}

} // namespace degctrl
