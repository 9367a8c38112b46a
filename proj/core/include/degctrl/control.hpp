#pragma once

#include <string>
#include <vector>

#include "degctrl/errors.hpp"
#include "degctrl/pde.hpp"

namespace degctrl {

/// Parameters of the penalized synthesis. Weights inside the functional are
/// evaluated relative to their maximum point (a constant rescaling of the
/// functional, so the minimizer is untouched) and clamped at +-clamp in log
/// space; the full +-700 clamp stays in force for norms and monitors.
struct PenaltyConfig {
  Real s = 0.0;              // Carleman parameter; <= 0 selects default_s(w)
  Real k = 1.0;              // weight power >= 0
  Real epsilon = 1e-6;       // terminal penalty
  Real cg_tol = 1e-10;       // relative preconditioned residual
  int cg_max_iters = 2000;
  Real clamp = 12.0;         // log-weight clamp for the synthesis functional
  bool include_state_term = true;
};

/// Default Carleman parameter: scales s so the normalized weight exponent
/// spans about 350 at t = t0, comfortably inside the clamp used for norms.
Real default_s(const CarlemanWeights& w);

struct CgHistoryRow {
  int iter = 0;
  Real residual = 0.0;
  Real J = 0.0;
  Real terminal_norm = 0.0;
};

struct ControlResult {
  std::vector<std::vector<Real>> u; // (M+1) x (N+2), zero outside omega and at n = 0
  Trajectory y;
  Real terminal_norm = 0.0;
  Real weighted_cost = 0.0;        // J at the minimizer (normalized weights)
  int cg_iterations = 0;
  Real estimate_ratio = 0.0;       // empirical constant of the control estimate
  bool converged = false;
  std::vector<CgHistoryRow> history;
  Real s_used = 0.0;
};

class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, std::vector<CgHistoryRow> history)
      : Error(ErrorKind::convergence, what), history_(std::move(history)) {}
  const std::vector<CgHistoryRow>& history() const { return history_; }

private:
  std::vector<CgHistoryRow> history_;
};

/// Minimizes
///   J_eps(u) = 1/2 iint_omega W_u u^2 + [state] 1/2 iint W_y y^2
///              + 1/(2 eps) ||y(T)||^2,
///   W_u = (s beta)^{-(k+3)} e^{-2 s sigma},  W_y = (s beta)^{-k} e^{-2 s sigma},
/// subject to the discrete forward dynamics, by preconditioned CG on the
/// control with one forward and one adjoint solve per iteration. f_src carries
/// the fixed source only (its control slot must be empty). u_init warm-starts
/// the iteration. Throws ConvergenceError past cg_max_iters.
ControlResult synthesize_control(const std::vector<Real>& y0, const SourceSpec& f_src,
                                 const Grid& grid, const BoundaryCondition& bc,
                                 const CarlemanWeights& w, const PenaltyConfig& cfg,
                                 Real omega_left, Real omega_right,
                                 const std::vector<std::vector<Real>>* u_init = nullptr);

/// LHS / RHS of the control estimate: weighted state + control cost over the
/// data functional with its exp(2s[Phi_hat(0) - Phi_star(5T/8)]) prefactor.
/// 0/0 reports 0; a zero RHS against a nonzero LHS reports +inf.
Real verify_estimate_thm41(const ControlResult& result, const std::vector<Real>& y0,
                           const SourceSpec& f_src, const Grid& grid, const CarlemanWeights& w,
                           const PenaltyConfig& cfg, Real omega_left, Real omega_right);

struct MonitorRow {
  std::string inequality_id;
  Real k = 0.0;
  Real s = 0.0;
  Real max_ratio = 0.0;
  int samples = 0;
};

/// Empirical Carleman constants: for random adjoint data (v_T, g) solves the
/// adjoint and evaluates LHS/RHS of the two Carleman estimates (at the given
/// k values) and of the modified estimate with its v(0) term. Returns the max
/// ratio per inequality.
std::vector<MonitorRow> carleman_ratio_monitor(const CarlemanWeights& w,
                                               const DiffusionCoefficient& a, const Grid& grid,
                                               const BoundaryCondition& bc, Real omega_left,
                                               Real omega_right, Real s,
                                               const std::vector<Real>& k_values, int n_samples,
                                               std::uint64_t seed);

/// Convergence history as delimited text (iter, residual, J, terminal_norm).
void write_cg_history(const std::string& path, const std::vector<CgHistoryRow>& rows);

} // namespace degctrl
