#include "degctrl/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace degctrl {

namespace {

using Table = std::vector<std::vector<Real>>;

Real h1a_seminorm(const std::vector<Real>& slice, const Grid& g) {
  Real s = 0.0;
  for (int i = 0; i <= g.N; ++i) {
    const Real dy = (slice[static_cast<std::size_t>(i) + 1] - slice[static_cast<std::size_t>(i)]) / g.h;
    s += g.h * g.a_half[static_cast<std::size_t>(i)] * dy * dy;
  }
  return s;
}

Table zero_table(int M, int n_nodes) {
  return Table(static_cast<std::size_t>(M) + 1, std::vector<Real>(static_cast<std::size_t>(n_nodes), 0.0));
}

// Trapezoid weights over nodes 0..n of a uniform grid.
Real trap_w(int j, int n, Real dt) { return (j == 0 || j == n) ? 0.5 * dt : dt; }

} // namespace

int select_tstar(const Trajectory& phase1) {
  const Grid& g = phase1.grid;
  // window [mid, end) of the phase-1 horizon = [T/4, T/2) in global time
  const Real t_lo = g.t0 + 0.5 * (g.T - g.t0);
  int best = -1;
  Real best_val = std::numeric_limits<Real>::infinity();
  for (int n = 0; n < g.M; ++n) { // strictly before the last node
    if (g.t[static_cast<std::size_t>(n)] < t_lo - 1e-14) continue;
    const Real v = h1a_seminorm(phase1.slice(n), g);
    if (v < best_val - 1e-15 * std::max<Real>(1.0, best_val)) { // earliest strict minimizer
      best_val = v;
      best = n;
    }
  }
  if (best < 0) fail(ErrorKind::internal, "select_tstar: empty search window");
  return best;
}

TwoPhasePlan two_phase_control(const std::vector<Real>& y0, const KernelSpec& b,
                               const DiffusionCoefficient& a, const Grid& grid,
                               Real omega_left, Real omega_right, const StrategyConfig& cfg) {
  if (grid.M % 2 != 0)
    fail(ErrorKind::configuration, "two_phase_control: M must be even so T/2 is a node");
  const BoundaryCondition bc = default_bc(a);

  // Phase 1: uncontrolled memory evolution on [t0, mid] sharing the global dt.
  const int M1 = grid.M / 2;
  Grid g1 = make_grid(a, grid.N, M1, grid.t0 + 0.5 * (grid.T - grid.t0), grid.x_lo, grid.x_hi,
                      grid.t0);
  Trajectory phase1 = solve_forward_with_memory(y0, b.evaluator, {}, g1, bc);

  TwoPhasePlan plan;
  plan.t_star_index = select_tstar(phase1);
  plan.t_star = g1.t[static_cast<std::size_t>(plan.t_star_index)];
  plan.phase1 = phase1;

  // Phase 2 grid on [t*, T] with the same dt; weights use the shifted theta.
  const int n_star = plan.t_star_index;
  const int M2 = grid.M - n_star;
  Grid g2 = make_grid(a, grid.N, M2, grid.T, grid.x_lo, grid.x_hi, plan.t_star);

  const Real dstar = d_star(a, grid.x_lo, grid.x_hi);
  const auto [gamma, d] = choose_gamma_d(dstar, cfg.L, GammaMode::fixed_point);
  const Real omega_center = 0.5 * (omega_left + omega_right);
  CarlemanWeights w2 =
      build_weights(grid.T, a, gamma, d, cfg.L, cfg.p, g2.x, omega_center, plan.t_star);

  PenaltyConfig pen = cfg.penalty;
  if (pen.s <= 0.0) pen.s = default_s(w2);

  // Kernel admissibility on the shifted window.
  if (!b.is_zero()) {
    AdmissibilityReport adm = kernel_admissible(b, w2, pen.s, pen.k, g2);
    if (!adm.passed && !cfg.override_kernel_check)
      fail(ErrorKind::kernel_inadmissible,
           "two_phase_control: kernel fails the decay hypothesis on the shifted window "
           "(margin " + std::to_string(adm.margin) + ")");
  }

  // Accumulated phase-1 memory: history[m] integrates b(tau_{m-1}, s, x) over
  // the phase-1 nodes, so the split trapezoid matches the full-range rule.
  Table history = zero_table(M2, grid.N + 2);
  if (!b.is_zero()) {
    for (int m = 1; m <= M2; ++m) {
      const Real t_outer = g2.t[static_cast<std::size_t>(m) - 1];
      auto& row = history[static_cast<std::size_t>(m)];
      for (int j = 0; j <= n_star; ++j) {
        const Real wq = trap_w(j, n_star, g1.dt);
        const Real sj = g1.t[static_cast<std::size_t>(j)];
        const auto& ws = phase1.slice(j);
        for (int i = 1; i <= grid.N; ++i)
          row[static_cast<std::size_t>(i)] +=
              wq * b.evaluator(t_outer, sj, grid.x[static_cast<std::size_t>(i)]) *
              ws[static_cast<std::size_t>(i)];
      }
    }
  }

  plan.phase2 = fixed_point_solve(phase1.slice(n_star), b, g2, bc, w2, pen, cfg.fixed_point,
                                  omega_left, omega_right, b.is_zero() ? nullptr : &history);

  // Composite trajectory and control on the full grid: phase 1 up to t*, then
  // the controlled run; the handoff state is the same array on both sides.
  plan.composite.grid = grid;
  plan.composite.bc = bc;
  plan.composite.values.assign(static_cast<std::size_t>(grid.M) + 1,
                               std::vector<Real>(static_cast<std::size_t>(grid.N) + 2, 0.0));
  plan.composite_u = zero_table(grid.M, grid.N + 2);
  for (int n = 0; n <= n_star; ++n) plan.composite.values[static_cast<std::size_t>(n)] = phase1.slice(n);
  for (int m = 1; m <= M2; ++m) {
    plan.composite.values[static_cast<std::size_t>(n_star + m)] = plan.phase2.control.y.slice(m);
    plan.composite_u[static_cast<std::size_t>(n_star + m)] =
        plan.phase2.control.u[static_cast<std::size_t>(m)];
  }
  plan.terminal_norm = plan.composite.terminal_l2();
  return plan;
}

Real glue_chi(Real x, Real lambda_pp, Real beta_pp) {
  if (x <= lambda_pp) return 1.0;
  if (x >= beta_pp) return 0.0;
  const Real xi = (x - lambda_pp) / (beta_pp - lambda_pp);
  return 1.0 - (10.0 * xi * xi * xi - 15.0 * xi * xi * xi * xi + 6.0 * xi * xi * xi * xi * xi);
}

Real glue_chi_x(Real x, Real lambda_pp, Real beta_pp) {
  if (x <= lambda_pp || x >= beta_pp) return 0.0;
  const Real W = beta_pp - lambda_pp;
  const Real xi = (x - lambda_pp) / W;
  return -30.0 * xi * xi * (1.0 - xi) * (1.0 - xi) / W;
}

Real glue_chi_xx(Real x, Real lambda_pp, Real beta_pp) {
  if (x <= lambda_pp || x >= beta_pp) return 0.0;
  const Real W = beta_pp - lambda_pp;
  const Real xi = (x - lambda_pp) / W;
  return -60.0 * xi * (2.0 * xi - 1.0) * (xi - 1.0) / (W * W);
}

GluePlan glue_double_degenerate(const std::vector<Real>& y0, const DiffusionCoefficient& a,
                                const Grid& grid, Real omega_left, Real omega_right,
                                const StrategyConfig& cfg, const KernelSpec& b) {
  if (a.degeneracy_side != Side::both)
    fail(ErrorKind::configuration, "glue_double_degenerate: coefficient must degenerate at both ends");

  // Nested intervals (lambda', beta') around omega and (lambda'', beta'') inside it,
  // snapped to grid nodes where they bound sub-domains.
  const Real wdt = omega_right - omega_left;
  const Real margin = 0.5 * std::min(omega_left - grid.x_lo, grid.x_hi - omega_right);
  Real lambda_p = omega_left - margin;
  Real beta_p = omega_right + margin;
  const int i_lambda = static_cast<int>(std::floor((lambda_p - grid.x_lo) / grid.h));
  const int i_beta = static_cast<int>(std::ceil((beta_p - grid.x_lo) / grid.h));
  lambda_p = grid.x[static_cast<std::size_t>(i_lambda)];
  beta_p = grid.x[static_cast<std::size_t>(i_beta)];
  const Real lambda_pp = omega_left + 0.2 * wdt;
  const Real beta_pp = omega_right - 0.2 * wdt;
  if (!(grid.x_lo < lambda_p && lambda_p < omega_left && omega_right < beta_p &&
        beta_p < grid.x_hi) ||
      i_lambda < 2 || i_beta > grid.N - 1 || !(lambda_pp < beta_pp))
    fail(ErrorKind::geometry,
         "glue_double_degenerate: no room for nested intervals around omega");

  GluePlan plan;
  plan.lambda_p = lambda_p;
  plan.beta_p = beta_p;
  plan.lambda_pp = lambda_pp;
  plan.beta_pp = beta_pp;

  // Left sub-problem on (0, beta'): degenerate at 0, Dirichlet at beta'.
  DiffusionCoefficient a_left = a;
  a_left.degeneracy_side = Side::left;
  a_left.alpha_right = 0.0;
  a_left.case_right = DegeneracyCase::WD;
  a_left.beta_mono_right.reset();
  Grid g_left = make_grid(a_left, i_beta - 1, grid.M, grid.T, grid.x_lo, beta_p, grid.t0);

  // Right sub-problem on (lambda', 1): degenerate at 1, Dirichlet at lambda'.
  DiffusionCoefficient a_right = a;
  a_right.degeneracy_side = Side::right;
  a_right.alpha_left = 0.0;
  a_right.case_left = DegeneracyCase::WD;
  a_right.beta_mono_left.reset();
  Grid g_right = make_grid(a_right, grid.N - i_lambda, grid.M, grid.T, lambda_p, grid.x_hi,
                           grid.t0);

  std::vector<Real> y0_left(y0.begin(), y0.begin() + i_beta + 1);
  y0_left.back() = 0.0; // Dirichlet cut
  std::vector<Real> y0_right(y0.begin() + i_lambda, y0.end());
  y0_right.front() = 0.0;

  plan.left = two_phase_control(y0_left, b, a_left, g_left, omega_left, omega_right, cfg);
  plan.right = two_phase_control(y0_right, b, a_right, g_right, omega_left, omega_right, cfg);

  // Extend by zero to the global grid.
  const int M = grid.M, NN = grid.N + 2;
  Table w_ext = zero_table(M, NN), z_ext = zero_table(M, NN);
  Table u1_ext = zero_table(M, NN), u2_ext = zero_table(M, NN);
  for (int n = 0; n <= M; ++n) {
    for (int i = 0; i <= i_beta; ++i) {
      w_ext[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] =
          plan.left.composite.slice(n)[static_cast<std::size_t>(i)];
      u1_ext[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] =
          plan.left.composite_u[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)];
    }
    for (int i = i_lambda; i <= grid.N + 1; ++i) {
      z_ext[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] =
          plan.right.composite.slice(n)[static_cast<std::size_t>(i - i_lambda)];
      u2_ext[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] =
          plan.right.composite_u[static_cast<std::size_t>(n)][static_cast<std::size_t>(i - i_lambda)];
    }
  }

  // y = z + chi (w - z): exact where chi is 0 or 1 and preserves y0 exactly.
  const BoundaryCondition bc = default_bc(a);
  plan.composite.grid = grid;
  plan.composite.bc = bc;
  plan.composite.values.assign(static_cast<std::size_t>(M) + 1,
                               std::vector<Real>(static_cast<std::size_t>(NN), 0.0));
  plan.composite_u = zero_table(M, NN);
  const std::vector<char> mask = omega_mask(grid, omega_left, omega_right);

  std::vector<Real> chi(static_cast<std::size_t>(NN)), chix(static_cast<std::size_t>(NN)),
      chixx(static_cast<std::size_t>(NN)), anode(static_cast<std::size_t>(NN));
  for (int i = 0; i < NN; ++i) {
    const Real x = grid.x[static_cast<std::size_t>(i)];
    chi[static_cast<std::size_t>(i)] = glue_chi(x, lambda_pp, beta_pp);
    chix[static_cast<std::size_t>(i)] = glue_chi_x(x, lambda_pp, beta_pp);
    chixx[static_cast<std::size_t>(i)] = glue_chi_xx(x, lambda_pp, beta_pp);
    anode[static_cast<std::size_t>(i)] = a(x);
  }

  for (int n = 0; n <= M; ++n) {
    auto& y_row = plan.composite.values[static_cast<std::size_t>(n)];
    auto& u_row = plan.composite_u[static_cast<std::size_t>(n)];
    const auto& wr = w_ext[static_cast<std::size_t>(n)];
    const auto& zr = z_ext[static_cast<std::size_t>(n)];
    for (int i = 0; i < NN; ++i)
      y_row[static_cast<std::size_t>(i)] =
          zr[static_cast<std::size_t>(i)] +
          chi[static_cast<std::size_t>(i)] * (wr[static_cast<std::size_t>(i)] - zr[static_cast<std::size_t>(i)]);
    if (n == 0) continue; // no control on the initial slice
    for (int i = 1; i <= grid.N; ++i) {
      if (!mask[static_cast<std::size_t>(i)]) continue;
      const std::size_t si = static_cast<std::size_t>(i);
      Real u = chi[si] * u1_ext[static_cast<std::size_t>(n)][si] +
               (1.0 - chi[si]) * u2_ext[static_cast<std::size_t>(n)][si];
      // commutator terms on D = w - z (linear in the pair, so identical
      // sub-solutions cancel exactly): (aD)_x chi_x + a D chi_xx + a D_x chi_x
      if (chix[si] != 0.0 || chixx[si] != 0.0) {
        const Real Dm = wr[si - 1] - zr[si - 1];
        const Real D0 = wr[si] - zr[si];
        const Real Dp = wr[si + 1] - zr[si + 1];
        const Real aD_x = (anode[si + 1] * Dp - anode[si - 1] * Dm) / (2.0 * grid.h);
        const Real D_x = (Dp - Dm) / (2.0 * grid.h);
        u -= aD_x * chix[si] + anode[si] * D0 * chixx[si] + anode[si] * D_x * chix[si];
      }
      u_row[si] = u;
    }
  }
  plan.terminal_norm = plan.composite.terminal_l2();

  // Discrete verification: centered PDE residual of the glued pair against a
  // direct solve with the same control on the same mesh.
  DiscreteOperator op = assemble_operator(a, grid, bc);
  plan.composite_residual = pde_residual_rms(plan.composite, plan.composite_u, b.evaluator, op);
  Trajectory direct = solve_forward_with_memory(y0, b.evaluator, plan.composite_u, grid, bc);
  plan.direct_residual = pde_residual_rms(direct, plan.composite_u, b.evaluator, op);
  return plan;
}

} // namespace degctrl
