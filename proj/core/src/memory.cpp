#include "degctrl/memory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace degctrl {

KernelSpec zero_kernel() {
  KernelSpec k;
  k.description = "zero";
  return k;
}

KernelSpec constant_kernel(Real c) {
  KernelSpec k;
  k.amplitude = c;
  k.description = "constant";
  k.evaluator = [c](Real, Real, Real) { return c; };
  return k;
}

KernelSpec decaying_kernel(Real c, Real M_decay, int p, Real T) {
  KernelSpec k;
  k.amplitude = c;
  k.decay_M = M_decay;
  k.p = p;
  k.description = "decaying";
  k.evaluator = [c, M_decay, p, T](Real t, Real, Real) {
    const Real gap = T - t;
    if (!(gap > 0.0)) return 0.0; // limit value at t = T
    return c * clamped_exp(-M_decay * std::pow(gap, -static_cast<Real>(p)));
  };
  return k;
}

KernelSpec scaled_decaying_kernel(Real c, Real M_decay, int p, Real T) {
  KernelSpec k = decaying_kernel(c, M_decay, p, T);
  k.description = "scaled-decaying";
  const Real at0 = M_decay * std::pow(T, -static_cast<Real>(p));
  k.evaluator = [c, M_decay, p, T, at0](Real t, Real, Real) {
    const Real gap = T - t;
    if (!(gap > 0.0)) return 0.0;
    return c * clamped_exp(at0 - M_decay * std::pow(gap, -static_cast<Real>(p)));
  };
  return k;
}

AdmissibilityReport kernel_admissible(const KernelSpec& b, const CarlemanWeights& w, Real s,
                                      Real k, const Grid& grid) {
  AdmissibilityReport rep;
  if (b.is_zero()) {
    rep.passed = true;
    rep.refinement_ok = true;
    rep.margin = std::numeric_limits<Real>::infinity();
    rep.sup_log_G = -std::numeric_limits<Real>::infinity();
    return rep;
  }
  const Real T = w.T;
  const Real coeff = std::pow(4.0 / w.horizon(), w.p) * s * w.gamma * w.d;

  auto log_G = [&](Real t, Real s_inner, Real x) {
    const Real gap = T - t;
    if (!(gap > 0.0)) return -std::numeric_limits<Real>::infinity(); // b(T) defined as limit 0
    const Real bv = std::abs(b.evaluator(t, s_inner, x));
    if (bv == 0.0) return -std::numeric_limits<Real>::infinity();
    return 2.0 * k * std::log(gap) + coeff * std::pow(gap, -static_cast<Real>(w.p)) +
           std::log(bv);
  };

  // Sup over the (t, s, x) tensor grid; t = T excluded (the decay factor is a
  // limit there) but probed from below.
  Real sup = -std::numeric_limits<Real>::infinity();
  for (int n = 0; n < grid.M; ++n)
    for (int m = 0; m <= n; ++m)
      for (int i = 1; i <= grid.N; ++i)
        sup = std::max(sup, log_G(grid.t[static_cast<std::size_t>(n)],
                                  grid.t[static_cast<std::size_t>(m)],
                                  grid.x[static_cast<std::size_t>(i)]));

  // Refinement probes toward T: t_j = T - dt 2^{-j}; the sup must not grow.
  bool monotone = true;
  Real prev = -std::numeric_limits<Real>::infinity();
  const Real x_probe = 0.5 * (grid.x_lo + grid.x_hi);
  const Real s_probe = grid.t[static_cast<std::size_t>(grid.M / 2)];
  for (int j = 1; j <= 12; ++j) {
    const Real t = T - grid.dt * std::ldexp(1.0, -j);
    const Real v = log_G(t, s_probe, x_probe);
    sup = std::max(sup, v);
    if (j > 1 && v > prev + 1e-9) monotone = false;
    prev = v;
  }

  rep.sup_log_G = sup;
  rep.refinement_ok = monotone;
  rep.margin = 700.0 - sup;
  rep.passed = monotone && rep.margin > 0.0;
  return rep;
}

SmallnessReport smallness_condition(Real s, Real k, Real gamma, Real d_star_value, Real T, int p,
                                    Real C_emp) {
  SmallnessReport rep;
  const Real expo = -k * std::log(s) - s * gamma * std::pow(2.0 / T, 2.0 * p) * d_star_value;
  rep.lhs = C_emp * clamped_exp(expo);
  rep.holds = rep.lhs <= 0.5;
  return rep;
}

Real weighted_norm_Esk(const Trajectory& y, const CarlemanWeights& w, Real s, Real k) {
  return weighted_norms(y, w, s, k).esk;
}

namespace {

using Table = std::vector<std::vector<Real>>;

// Frozen (lagged) memory source of a full trajectory: row m is the source the
// with-memory march would use at the step onto t_m.
Table frozen_source(const KernelFn& b, const Trajectory& traj,
                    const std::vector<std::vector<Real>>* history) {
  const Grid& g = traj.grid;
  Table F(static_cast<std::size_t>(g.M) + 1,
          std::vector<Real>(static_cast<std::size_t>(g.N) + 2, 0.0));
  for (int m = 1; m <= g.M; ++m) F[static_cast<std::size_t>(m)] = lagged_memory_slice(b, traj, m, history);
  return F;
}

Real table_diff_scale(const Table& A, const Table& B) {
  Real num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < A.size(); ++n)
    for (std::size_t i = 0; i < A[n].size(); ++i) {
      const Real d = A[n][i] - B[n][i];
      num += d * d;
      den += B[n][i] * B[n][i];
    }
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<Real>::infinity();
  return std::sqrt(num / den);
}

Trajectory blend(const Trajectory& a, const Trajectory& b, Real theta) {
  Trajectory out = a;
  for (std::size_t n = 0; n < out.values.size(); ++n)
    for (std::size_t i = 0; i < out.values[n].size(); ++i)
      out.values[n][i] = (1.0 - theta) * a.values[n][i] + theta * b.values[n][i];
  return out;
}

Real esk_relative_diff(const Trajectory& a, const Trajectory& b, const CarlemanWeights& w, Real s,
                       Real k) {
  Trajectory diff = a;
  for (std::size_t n = 0; n < diff.values.size(); ++n)
    for (std::size_t i = 0; i < diff.values[n].size(); ++i)
      diff.values[n][i] = a.values[n][i] - b.values[n][i];
  const Real nb = weighted_norm_Esk(b, w, s, k);
  const Real nd = weighted_norm_Esk(diff, w, s, k);
  if (nb == 0.0) return nd == 0.0 ? 0.0 : std::numeric_limits<Real>::infinity();
  return std::sqrt(nd / nb); // norms are squared integrals
}

} // namespace

FixedPointResult fixed_point_solve(const std::vector<Real>& y0, const KernelSpec& b,
                                   const Grid& grid, const BoundaryCondition& bc,
                                   const CarlemanWeights& w, const PenaltyConfig& cfg_pen,
                                   const FixedPointConfig& cfg_fp, Real omega_left,
                                   Real omega_right,
                                   const std::vector<std::vector<Real>>* history_source) {
  const Real s = cfg_pen.s > 0.0 ? cfg_pen.s : default_s(w);
  PenaltyConfig cfg = cfg_pen;
  cfg.s = s;

  // w^0: uncontrolled memory-free evolution (history source still applies).
  SourceSpec free_src;
  if (history_source) free_src.f_table = *history_source;
  Trajectory iterate = solve_forward(y0, free_src, grid, bc, Scheme::implicit_euler);

  const Real R = cfg_fp.R > 0.0
                     ? cfg_fp.R
                     : 10.0 * std::sqrt(weighted_norm_Esk(iterate, w, s, cfg.k)) + 1.0;

  FixedPointResult out;
  Table prev_frozen;
  std::optional<ControlResult> last_control;
  Real theta = cfg_fp.theta_relax;
  Real prev_residual = std::numeric_limits<Real>::infinity();

  for (int iter = 1; iter <= cfg_fp.max_iters; ++iter) {
    Table frozen = frozen_source(b.evaluator, iterate, history_source);

    // The map depends on the iterate only through the frozen source: an
    // unchanged source means a fixed point, no further synthesis needed.
    if (!prev_frozen.empty()) {
      const Real src_diff = table_diff_scale(frozen, prev_frozen);
      if (src_diff == 0.0 || src_diff < 1e-15) {
        out.final_residual = 0.0;
        break;
      }
    }

    SourceSpec f_src;
    f_src.f_table = frozen;
    const Table* warm = last_control ? &last_control->u : nullptr;
    ControlResult r = synthesize_control(y0, f_src, grid, bc, w, cfg, omega_left, omega_right, warm);

    Trajectory next = theta == 1.0 ? r.y : blend(iterate, r.y, theta);
    const Real residual = esk_relative_diff(next, iterate, w, s, cfg.k);
    const Real norm_next = weighted_norm_Esk(next, w, s, cfg.k);

    PicardHistoryRow row;
    row.iter = iter;
    row.esk_residual = residual;
    row.terminal_norm = next.terminal_l2();
    row.cg_iters = r.cg_iterations;
    out.history.push_back(row);

    if (norm_next > R * R) // esk stores the squared norm
      throw PicardError(ErrorKind::radius,
                        "fixed_point_solve: iterate left E_{s,k,R} (norm^2 " +
                            std::to_string(norm_next) + " > R^2); increase R or s",
                        out.history);

    if (residual > prev_residual && theta > 0.51) theta = 0.5; // engage damping once
    prev_residual = residual;

    iterate = std::move(next);
    last_control = std::move(r);
    prev_frozen = std::move(frozen);
    out.iterations = iter;
    out.final_residual = residual;
    if (residual < cfg_fp.picard_tol) break;
    if (iter == cfg_fp.max_iters)
      throw PicardError(ErrorKind::convergence,
                        "fixed_point_solve: no convergence within " +
                            std::to_string(cfg_fp.max_iters) + " iterations (residual " +
                            std::to_string(residual) + ")",
                        out.history);
  }

  if (!last_control) fail(ErrorKind::internal, "fixed_point_solve: no synthesis performed");

  // Final answer: the with-memory trajectory under the final control, which
  // satisfies the discrete memory scheme exactly.
  ControlResult final_result = *last_control;
  final_result.y =
      solve_forward_with_memory(y0, b.evaluator, final_result.u, grid, bc, history_source);
  final_result.terminal_norm = final_result.y.terminal_l2();
  out.control = std::move(final_result);
  return out;
}

void write_picard_history(const std::string& path, const std::vector<PicardHistoryRow>& rows) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  std::fprintf(f, "# picard iteration log\n");
  std::fprintf(f, "iter esk_residual terminal_norm cg_iters\n");
  for (const auto& r : rows)
    std::fprintf(f, "%d %.17g %.17g %d\n", r.iter, r.esk_residual, r.terminal_norm, r.cg_iters);
  std::fclose(f);
}

} // namespace degctrl
