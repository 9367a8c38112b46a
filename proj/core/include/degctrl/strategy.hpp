#pragma once

#include <string>
#include <vector>

#include "degctrl/memory.hpp"

namespace degctrl {

struct StrategyConfig {
  Real L = 2.0;                  // exponent scale of the bump weight
  int p = 4;
  PenaltyConfig penalty;
  FixedPointConfig fixed_point;
  bool override_kernel_check = false;
};

struct TwoPhasePlan {
  int t_star_index = 0;          // global time node of the handoff
  Real t_star = 0.0;
  Trajectory phase1;             // uncontrolled memory evolution on [0, T/2]
  FixedPointResult phase2;       // controlled run on [t*, T] with shifted weights
  Trajectory composite;          // on the full grid
  std::vector<std::vector<Real>> composite_u;
  Real terminal_norm = 0.0;
};

/// Earliest time node in [T/4, T/2) minimizing the discrete H_a^1 seminorm
/// of the slice (parabolic smoothing makes late slices regular).
int select_tstar(const Trajectory& phase1);

/// Two-phase null control for L^2-class data: free memory evolution on
/// [0, T/2], handoff at t*, then the fixed-point pipeline on [t*, T] with the
/// shifted time weight. The phase-2 memory integral carries the phase-1
/// history, so the composite satisfies the full discrete memory scheme.
/// Requires M to be even.
TwoPhasePlan two_phase_control(const std::vector<Real>& y0, const KernelSpec& b,
                               const DiffusionCoefficient& a, const Grid& grid,
                               Real omega_left, Real omega_right, const StrategyConfig& cfg);

struct GluePlan {
  Real lambda_p = 0.0, beta_p = 0.0;   // split interval bounds, omega inside (lambda', beta')
  Real lambda_pp = 0.0, beta_pp = 0.0; // cutoff transition, (lambda'', beta'') inside omega
  TwoPhasePlan left;                   // problem on (0, beta') degenerate at 0
  TwoPhasePlan right;                  // problem on (lambda', 1) degenerate at 1
  Trajectory composite;
  std::vector<std::vector<Real>> composite_u;
  Real composite_residual = 0.0;       // centered PDE residual of the glued pair
  Real direct_residual = 0.0;          // same functional on a direct solve, same mesh
  Real terminal_norm = 0.0;
};

/// C^2 cutoff used by the gluing: 1 left of lambda'', 0 right of beta'',
/// quintic smoothstep between. chi_x / chi_xx return the derivatives.
Real glue_chi(Real x, Real lambda_pp, Real beta_pp);
Real glue_chi_x(Real x, Real lambda_pp, Real beta_pp);
Real glue_chi_xx(Real x, Real lambda_pp, Real beta_pp);

/// Cutoff gluing for coefficients degenerate at both ends: two one-sided
/// sub-problems on (0, beta') and (lambda', 1) solved by the two-phase
/// pipeline, composed as y = chi w + (1 - chi) z with the control carrying the
/// commutator terms. The kernel is restricted pointwise to the sub-domains.
GluePlan glue_double_degenerate(const std::vector<Real>& y0, const DiffusionCoefficient& a,
                                const Grid& grid, Real omega_left, Real omega_right,
                                const StrategyConfig& cfg, const KernelSpec& b);

} // namespace degctrl
