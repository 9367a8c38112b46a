#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "degctrl/numerics.hpp"

namespace degctrl {

enum class Side { none, left, right, both };
enum class DegeneracyCase { WD, SD };

Side side_from_string(const std::string& s);
std::string to_string(Side s);
std::string to_string(DegeneracyCase c);

/// Degenerate diffusion coefficient a(x) >= 0 on [0,1] with its structural
/// metadata: where a vanishes and how fast.
struct DiffusionCoefficient {
  RealFn evaluator;
  RealFn derivative;          // optional analytic a'(x); empty -> finite differences
  Side degeneracy_side = Side::none;
  DegeneracyCase case_left = DegeneracyCase::WD;
  DegeneracyCase case_right = DegeneracyCase::WD;
  Real alpha_left = 0.0;      // degeneracy exponent at x = 0
  Real alpha_right = 0.0;     // degeneracy exponent at x = 1
  std::optional<Real> beta_mono_left;   // monotonicity exponent near 0 (SD only)
  std::optional<Real> beta_mono_right;  // monotonicity exponent near 1 (SD only)

  Real operator()(Real x) const { return evaluator(x); }
  bool degenerate_left() const { return degeneracy_side == Side::left || degeneracy_side == Side::both; }
  bool degenerate_right() const { return degeneracy_side == Side::right || degeneracy_side == Side::both; }
};

struct HypothesisReport {
  std::string condition_id;
  Real worst_node = 0.0;
  Real worst_margin = 0.0;
  bool passed = false;
};

/// Margin tolerance for the hypothesis checks: power-law prototypes achieve
/// equality, so exact-zero margins must pass.
inline constexpr Real kHypothesisTol = 1e-10;

/// a(x) = x^alpha_left (1-x)^alpha_right with case tags filled in.
/// Exponents must lie in [0, 2); side must match which exponents are nonzero.
DiffusionCoefficient prototype_coefficient(Real alpha_left, Real alpha_right, Side side);

/// Coefficient from tabulated (x, a) samples with declared metadata.
DiffusionCoefficient tabulated_coefficient(std::vector<Real> xs, std::vector<Real> as, Side side,
                                           Real alpha_left, Real alpha_right);

/// One report per applicable structural condition: the alpha inequality
/// x a' <= alpha a (mirrored at 1), and the beta-monotonicity of a/x^beta on
/// the first 10% of the interval for SD sides.
std::vector<HypothesisReport> check_degeneracy_hypotheses(const DiffusionCoefficient& a,
                                                          const std::vector<Real>& grid);

/// d* = integral of dist(y, degenerate end) / a(y); the admissibility threshold
/// for the weight offset d. Resolves the endpoint singularity by grading.
Real d_star(const DiffusionCoefficient& a, Real x_lo = 0.0, Real x_hi = 1.0);

/// [ integral (a/dist^2) y^2 ] / [ integral a y_x^2 ], both by the midpoint rule
/// on the cells of the given nodes; dist is x for left degeneracy, (1-x) for
/// right or both. y holds nodal values including the boundary nodes.
Real hardy_poincare_ratio(const std::vector<Real>& y, const std::vector<Real>& x_nodes,
                          const DiffusionCoefficient& a);

/// Flat-text record {kind, alpha_left, alpha_right, side, [table]} -> coefficient.
DiffusionCoefficient coefficient_from_record(const std::map<std::string, std::string>& record,
                                             const std::string& base_dir = ".");

/// Two-column (x, a) text loader for tabulated coefficients.
void read_coefficient_table(const std::string& path, std::vector<Real>& xs, std::vector<Real>& as);

} // namespace degctrl
