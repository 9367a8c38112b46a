#pragma once

#include <optional>
#include <string>
#include <vector>

#include "degctrl/control.hpp"

namespace degctrl {

/// Memory kernel b(t, s, x) with optional decay metadata for the built-in
/// family b = c exp(-M_decay / (T - t)^p); the factor is defined as its limit
/// 0 at t = T.
struct KernelSpec {
  KernelFn evaluator;
  std::optional<Real> decay_M; // set for the built-in decaying family
  Real amplitude = 1.0;
  int p = 4;
  std::string description;

  bool is_zero() const { return !evaluator; }
};

KernelSpec zero_kernel();
KernelSpec constant_kernel(Real c);
/// b = c exp(-M_decay / (T - t)^p), the decay shape of the admissibility
/// hypothesis; M_decay = 2 (4/T)^p s gamma d makes it pass with margin.
KernelSpec decaying_kernel(Real c, Real M_decay, int p, Real T);
/// Same decay, renormalized so b(0, ., .) = c; keeps the memory term
/// numerically active at desk scale while remaining admissible.
KernelSpec scaled_decaying_kernel(Real c, Real M_decay, int p, Real T);

struct AdmissibilityReport {
  bool passed = false;
  Real margin = 0.0;      // log(clamp) - sup log G; +inf for b = 0
  Real sup_log_G = 0.0;
  bool refinement_ok = false; // sup log G non-increasing on probes toward t = T
};

/// Decay hypothesis on the kernel: G = (T-t)^{2k} exp((4/T)^p s gamma d /(T-t)^p) |b|
/// must stay bounded, evaluated in log space over the (t, s, x) tensor grid plus
/// probe times refining toward T.
AdmissibilityReport kernel_admissible(const KernelSpec& b, const CarlemanWeights& w, Real s,
                                      Real k, const Grid& grid);

struct SmallnessReport {
  bool holds = false;
  Real lhs = 0.0; // C_emp s^{-k} exp(-s gamma (2/T)^{2p} d*)
};

/// Fixed-point smallness condition with the empirical estimate constant.
SmallnessReport smallness_condition(Real s, Real k, Real gamma, Real d_star_value, Real T, int p,
                                    Real C_emp);

struct FixedPointConfig {
  Real R = 0.0;          // invariant-ball radius; <= 0 picks 10 ||w0||_E + 1
  int max_iters = 20;
  Real picard_tol = 1e-6;
  Real theta_relax = 1.0; // damping; halved automatically after a residual increase
};

struct PicardHistoryRow {
  int iter = 0;
  Real esk_residual = 0.0;
  Real terminal_norm = 0.0;
  int cg_iters = 0;
};

struct FixedPointResult {
  ControlResult control;
  int iterations = 0;
  std::vector<PicardHistoryRow> history;
  Real final_residual = 0.0;
};

/// Picard failure (non-convergence or invariant-ball exit) with the iteration
/// log attached.
class PicardError : public Error {
public:
  PicardError(ErrorKind kind, const std::string& what, std::vector<PicardHistoryRow> history)
      : Error(kind, what), history_(std::move(history)) {}
  const std::vector<PicardHistoryRow>& history() const { return history_; }

private:
  std::vector<PicardHistoryRow> history_;
};

/// Picard realization of the fixed-point map: w^0 is the uncontrolled
/// memory-free solve; each round freezes the (lagged) memory source of the
/// current iterate, synthesizes a control for the resulting nonhomogeneous
/// problem, and relaxes. Converged when the frozen source stops changing or
/// the E_{s,k}-weighted relative state difference drops below picard_tol.
/// The returned trajectory is the with-memory solve under the final control,
/// so it satisfies the discrete memory scheme exactly.
FixedPointResult fixed_point_solve(const std::vector<Real>& y0, const KernelSpec& b,
                                   const Grid& grid, const BoundaryCondition& bc,
                                   const CarlemanWeights& w, const PenaltyConfig& cfg_pen,
                                   const FixedPointConfig& cfg_fp, Real omega_left,
                                   Real omega_right,
                                   const std::vector<std::vector<Real>>* history_source = nullptr);

/// E_{s,k} norm of a trajectory (the iteration contract); delegates to
/// weighted_norms.
Real weighted_norm_Esk(const Trajectory& y, const CarlemanWeights& w, Real s, Real k);

void write_picard_history(const std::string& path, const std::vector<PicardHistoryRow>& rows);

} // namespace degctrl
