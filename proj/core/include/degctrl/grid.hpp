#pragma once

#include <vector>

#include "degctrl/coeffs.hpp"
#include "degctrl/numerics.hpp"

namespace degctrl {

enum class BcType { Dirichlet, DegenerateFlux };

struct BoundaryCondition {
  BcType left = BcType::Dirichlet;
  BcType right = BcType::Dirichlet;
};

/// Boundary conditions matching the coefficient's degeneracy classes:
/// Dirichlet everywhere except at an SD degenerate end, which gets the
/// weighted-Neumann (zero flux) condition.
BoundaryCondition default_bc(const DiffusionCoefficient& a);

/// Uniform tensor grid on [x_lo, x_hi] x [t0, T] with a sampled at half-points.
/// x has N interior nodes plus the two boundary nodes; t has M+1 nodes.
struct Grid {
  int N = 0;
  int M = 0;
  Real h = 0.0, dt = 0.0;
  Real x_lo = 0.0, x_hi = 1.0;
  Real t0 = 0.0, T = 1.0;
  std::vector<Real> x; // size N+2
  std::vector<Real> t; // size M+1
  std::vector<Real> a_half; // size N+1, a at x_{i+1/2}
  Side degeneracy_side = Side::none; // copied from the coefficient
  DegeneracyCase case_left = DegeneracyCase::WD;
  DegeneracyCase case_right = DegeneracyCase::WD;

  int n_nodes() const { return N + 2; }
  int n_steps() const { return M; }
};

Grid make_grid(const DiffusionCoefficient& a, int N, int M, Real T, Real x_lo = 0.0,
               Real x_hi = 1.0, Real t0 = 0.0);

/// Space-time field on the grid with boundary metadata; values[n][i] is the
/// state at time node n and space node i (boundary nodes included).
struct Trajectory {
  Grid grid;
  BoundaryCondition bc;
  std::vector<std::vector<Real>> values; // (M+1) x (N+2)

  const std::vector<Real>& slice(int n) const { return values[static_cast<std::size_t>(n)]; }
  std::vector<Real>& slice(int n) { return values[static_cast<std::size_t>(n)]; }
  Real terminal_l2() const;
};

/// Node mask of an open control interval; boundary nodes are never in omega.
std::vector<char> omega_mask(const Grid& g, Real omega_left, Real omega_right);

/// Right-hand side data for the forward problem: a distributed source f and a
/// control supported on omega.
struct SourceSpec {
  std::function<Real(Real, Real)> f;         // optional analytic source f(t, x)
  std::vector<std::vector<Real>> f_table;    // or tabulated (M+1) x (N+2); wins if nonempty
  std::vector<std::vector<Real>> u;          // control field, zero outside omega
  std::vector<char> mask;                    // omega node mask (empty: no control)

  Real source_at(int n, int i, const Grid& g) const;
};

} // namespace degctrl
