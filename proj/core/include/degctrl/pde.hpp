#pragma once

#include <string>
#include <vector>

#include "degctrl/grid.hpp"
#include "degctrl/weights.hpp"

namespace degctrl {

enum class Scheme { implicit_euler, crank_nicolson };

/// Flux-form operator on the N interior nodes:
///   (A y)_i = [a_{i+1/2}(y_{i+1} - y_i) - a_{i-1/2}(y_i - y_{i-1})] / h^2.
/// A Dirichlet end contributes a zero neighbor; a DegenerateFlux end drops the
/// boundary half-point flux, which realizes (a y_x) = 0 discretely. Symmetric
/// and negative semidefinite by construction.
struct DiscreteOperator {
  Tridiag A;       // N x N, interior unknowns
  Grid grid;
  BoundaryCondition bc;

  void apply(const std::vector<Real>& y, std::vector<Real>& out) const;
};

DiscreteOperator assemble_operator(const DiffusionCoefficient& a, const Grid& grid,
                                   const BoundaryCondition& bc);

/// Interior slice -> full slice with boundary values restored from the bc
/// (Dirichlet: 0; DegenerateFlux: copy of the first interior value, which makes
/// the discrete boundary flux vanish exactly).
void attach_boundary(const std::vector<Real>& interior, const BoundaryCondition& bc,
                     std::vector<Real>& full);

/// theta-scheme march of y_t - (a y_x)_x = src:
///   (I - dt q A) y^{n+1} = (I + dt (1-q) A) y^n + dt src^{n+q}
/// with q = 1 (implicit Euler, source at the new level) or q = 1/2
/// (Crank-Nicolson, averaged source).
Trajectory solve_forward(const std::vector<Real>& y0, const SourceSpec& src, const Grid& grid,
                         const BoundaryCondition& bc, Scheme scheme = Scheme::implicit_euler);

/// Backward march of -v_t - (a v_x)_x = g, v(T) = vT, with the step
///   (I - dt A) v^n = v^{n+1} + dt g^n.
/// This is the exact transpose of the implicit Euler forward step, so the
/// discrete transposition identity
///   <y^M, v^M> - <y^0, v^0> = dt sum_n [ <src^{n+1}, v^n> - <y^{n+1}, g^n> ]
/// holds to roundoff.
Trajectory solve_adjoint(const std::vector<Real>& vT, const std::function<Real(Real, Real)>& g,
                         const Grid& grid, const BoundaryCondition& bc);

/// Memory kernel b(t, s, x).
using KernelFn = std::function<Real(Real, Real, Real)>;

/// Composite trapezoid over s in {t_0 .. t_n} of b(t_n, s, x_i) w(s, x_i).
/// Strictly causal: uses slices <= n only. n = 0 gives the zero field.
std::vector<Real> memory_source(const KernelFn& b, const Trajectory& w, int n);

/// Lagged source slice used by the with-memory march at the step onto t_m:
/// memory_source(b, w, m-1) plus the optional frozen history term. Both the
/// direct solver and the Picard iteration go through this one quadrature, so a
/// converged fixed point satisfies the discrete scheme exactly.
std::vector<Real> lagged_memory_slice(const KernelFn& b, const Trajectory& w, int m,
                                      const std::vector<std::vector<Real>>* history);

/// Implicit Euler march of the Volterra system
///   y_t - (a y_x)_x = int_0^t b y ds + 1_omega u,
/// memory term lagged (evaluated from already-computed slices); one pass,
/// O(M^2 N). history, when given, is a precomputed additive source table
/// (used by the two-phase strategy to carry the pre-t* memory integral).
Trajectory solve_forward_with_memory(const std::vector<Real>& y0, const KernelFn& b,
                                     const std::vector<std::vector<Real>>& u, const Grid& grid,
                                     const BoundaryCondition& bc,
                                     const std::vector<std::vector<Real>>* history = nullptr);

struct NormReport {
  Real esk = 0.0;        // integral of (s beta)^{-k} e^{-2 s sigma} y^2, log-clamped
  Real l2Q = 0.0;        // plain L^2(Q)^2
  Real terminal = 0.0;   // || y(T) ||_{L^2}
  bool diverged = false; // clamp-saturated terminal band dominates the E norm
};

/// Weighted norms of a trajectory in the E_{s,k} family. Exponents are
/// combined in log space and clamped at +-700 before exponentiation.
NormReport weighted_norms(const Trajectory& traj, const CarlemanWeights& w, Real s, Real k);

/// Centered-in-time PDE residual of (y, u) against the memory equation,
/// RMS over interior nodes and time levels 1..M-1. Used to compare composite
/// (glued) solutions against direct solves on the same mesh.
Real pde_residual_rms(const Trajectory& y, const std::vector<std::vector<Real>>& u,
                      const KernelFn& b, const DiscreteOperator& op);

/// Trajectory snapshots as delimited text (t, x, y).
void write_trajectory(const std::string& path, const Trajectory& traj);

} // namespace degctrl
