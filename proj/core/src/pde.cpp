#include "degctrl/pde.hpp"

#include <cmath>
#include <cstdio>

#include "degctrl/errors.hpp"

namespace degctrl {

BoundaryCondition default_bc(const DiffusionCoefficient& a) {
  BoundaryCondition bc;
  if (a.degenerate_left() && a.case_left == DegeneracyCase::SD) bc.left = BcType::DegenerateFlux;
  if (a.degenerate_right() && a.case_right == DegeneracyCase::SD) bc.right = BcType::DegenerateFlux;
  return bc;
}

Grid make_grid(const DiffusionCoefficient& a, int N, int M, Real T, Real x_lo, Real x_hi,
               Real t0) {
  if (N < 2 || M < 2) fail(ErrorKind::configuration, "make_grid: need N >= 2 and M >= 2");
  if (!(x_hi > x_lo) || !(T > t0)) fail(ErrorKind::configuration, "make_grid: empty domain");
  Grid g;
  g.N = N;
  g.M = M;
  g.x_lo = x_lo;
  g.x_hi = x_hi;
  g.t0 = t0;
  g.T = T;
  g.h = (x_hi - x_lo) / (N + 1);
  g.dt = (T - t0) / M;
  g.x.resize(static_cast<std::size_t>(N) + 2);
  for (int i = 0; i <= N + 1; ++i) g.x[static_cast<std::size_t>(i)] = x_lo + i * g.h;
  g.x.back() = x_hi;
  g.t.resize(static_cast<std::size_t>(M) + 1);
  for (int n = 0; n <= M; ++n) g.t[static_cast<std::size_t>(n)] = t0 + n * g.dt;
  g.t.back() = T;
  g.a_half.resize(static_cast<std::size_t>(N) + 1);
  for (int i = 0; i <= N; ++i) {
    const Real xm = 0.5 * (g.x[static_cast<std::size_t>(i)] + g.x[static_cast<std::size_t>(i) + 1]);
    const Real v = a(xm);
    if (!std::isfinite(v) || v < 0.0)
      fail(ErrorKind::configuration, "make_grid: a(x) negative or non-finite at a half-point");
    if (v == 0.0 && i != 0 && i != N)
      fail(ErrorKind::configuration, "make_grid: a vanishes away from a declared endpoint");
    g.a_half[static_cast<std::size_t>(i)] = v;
  }
  g.degeneracy_side = a.degeneracy_side;
  g.case_left = a.case_left;
  g.case_right = a.case_right;
  return g;
}

Real Trajectory::terminal_l2() const {
  const auto& yT = values.back();
  Real s = 0.0;
  for (int i = 1; i <= grid.N; ++i) s += yT[static_cast<std::size_t>(i)] * yT[static_cast<std::size_t>(i)];
  return std::sqrt(grid.h * s);
}

std::vector<char> omega_mask(const Grid& g, Real omega_left, Real omega_right) {
  if (!(g.x_lo <= omega_left && omega_left < omega_right && omega_right <= g.x_hi))
    fail(ErrorKind::configuration, "omega must be an open subinterval of the domain");
  std::vector<char> mask(static_cast<std::size_t>(g.N) + 2, 0);
  for (int i = 1; i <= g.N; ++i) {
    const Real x = g.x[static_cast<std::size_t>(i)];
    if (x > omega_left && x < omega_right) mask[static_cast<std::size_t>(i)] = 1;
  }
  return mask;
}

Real SourceSpec::source_at(int n, int i, const Grid& g) const {
  Real v = 0.0;
  if (!f_table.empty())
    v += f_table[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)];
  else if (f)
    v += f(g.t[static_cast<std::size_t>(n)], g.x[static_cast<std::size_t>(i)]);
  if (!u.empty() && (mask.empty() || mask[static_cast<std::size_t>(i)]))
    v += u[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)];
  return v;
}

namespace {

void validate_bc(const Grid& g, const BoundaryCondition& bc) {
  const bool left_deg = g.degeneracy_side == Side::left || g.degeneracy_side == Side::both;
  const bool right_deg = g.degeneracy_side == Side::right || g.degeneracy_side == Side::both;
  if (bc.left == BcType::DegenerateFlux && !(left_deg && g.case_left == DegeneracyCase::SD))
    fail(ErrorKind::configuration,
         "DegenerateFlux at x_lo requires an SD degeneracy at that endpoint");
  if (bc.right == BcType::DegenerateFlux && !(right_deg && g.case_right == DegeneracyCase::SD))
    fail(ErrorKind::configuration,
         "DegenerateFlux at x_hi requires an SD degeneracy at that endpoint");
}

Tridiag assemble_from_grid(const Grid& g, const BoundaryCondition& bc) {
  validate_bc(g, bc);
  const int N = g.N;
  const Real h2 = g.h * g.h;
  Tridiag A;
  A.diag.resize(static_cast<std::size_t>(N));
  A.sub.resize(static_cast<std::size_t>(N) - 1);
  A.sup.resize(static_cast<std::size_t>(N) - 1);
  for (int j = 0; j < N; ++j) {
    Real aL = g.a_half[static_cast<std::size_t>(j)];
    Real aR = g.a_half[static_cast<std::size_t>(j) + 1];
    if (j == 0 && bc.left == BcType::DegenerateFlux) aL = 0.0;   // zero boundary flux
    if (j == N - 1 && bc.right == BcType::DegenerateFlux) aR = 0.0;
    A.diag[static_cast<std::size_t>(j)] = -(aL + aR) / h2;
    if (j > 0) A.sub[static_cast<std::size_t>(j) - 1] = aL / h2;
    if (j < N - 1) A.sup[static_cast<std::size_t>(j)] = aR / h2;
  }
  return A;
}

// Shared march core. q = 1: implicit Euler; q = 1/2: Crank-Nicolson.
struct Stepper {
  const Grid& g;
  Real q;
  Tridiag A;
  TridiagFactor factor;

  Stepper(const Grid& grid, const BoundaryCondition& bc, Real q_)
      : g(grid), q(q_), A(assemble_from_grid(grid, bc)), factor(make_step_matrix(A, grid.dt, q_)) {}

  static Tridiag make_step_matrix(const Tridiag& A, Real dt, Real q) {
    Tridiag B = A;
    for (auto& v : B.diag) v = 1.0 - dt * q * v;
    for (auto& v : B.sub) v = -dt * q * v;
    for (auto& v : B.sup) v = -dt * q * v;
    return B;
  }

  void apply_A(const std::vector<Real>& y, std::vector<Real>& out) const {
    const std::size_t n = A.size();
    out.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      Real v = A.diag[j] * y[j];
      if (j > 0) v += A.sub[j - 1] * y[j - 1];
      if (j + 1 < n) v += A.sup[j] * y[j + 1];
      out[j] = v;
    }
  }
};

std::vector<Real> interior_of(const std::vector<Real>& full, int N) {
  return std::vector<Real>(full.begin() + 1, full.begin() + 1 + N);
}

} // namespace

void DiscreteOperator::apply(const std::vector<Real>& y, std::vector<Real>& out) const {
  const std::size_t n = A.size();
  out.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    Real v = A.diag[j] * y[j];
    if (j > 0) v += A.sub[j - 1] * y[j - 1];
    if (j + 1 < n) v += A.sup[j] * y[j + 1];
    out[j] = v;
  }
}

DiscreteOperator assemble_operator(const DiffusionCoefficient& a, const Grid& grid,
                                   const BoundaryCondition& bc) {
  (void)a;
  DiscreteOperator op;
  op.A = assemble_from_grid(grid, bc);
  op.grid = grid;
  op.bc = bc;
  return op;
}

void attach_boundary(const std::vector<Real>& interior, const BoundaryCondition& bc,
                     std::vector<Real>& full) {
  const std::size_t N = interior.size();
  full.resize(N + 2);
  for (std::size_t j = 0; j < N; ++j) full[j + 1] = interior[j];
  full[0] = bc.left == BcType::DegenerateFlux ? interior.front() : 0.0;
  full[N + 1] = bc.right == BcType::DegenerateFlux ? interior.back() : 0.0;
}

Trajectory solve_forward(const std::vector<Real>& y0, const SourceSpec& src, const Grid& grid,
                         const BoundaryCondition& bc, Scheme scheme) {
  const Real q = scheme == Scheme::implicit_euler ? 1.0 : 0.5;
  Stepper st(grid, bc, q);
  const int N = grid.N, M = grid.M;

  Trajectory traj;
  traj.grid = grid;
  traj.bc = bc;
  traj.values.assign(static_cast<std::size_t>(M) + 1, std::vector<Real>(static_cast<std::size_t>(N) + 2, 0.0));

  std::vector<Real> y = y0.size() == static_cast<std::size_t>(N) + 2 ? interior_of(y0, N) : y0;
  if (y.size() != static_cast<std::size_t>(N))
    fail(ErrorKind::configuration, "solve_forward: y0 size mismatch");
  attach_boundary(y, bc, traj.slice(0));

  std::vector<Real> rhs(static_cast<std::size_t>(N)), Ay;
  for (int n = 0; n < M; ++n) {
    if (q < 1.0) st.apply_A(y, Ay);
    for (int j = 0; j < N; ++j) {
      Real r = y[static_cast<std::size_t>(j)];
      if (q < 1.0) r += grid.dt * (1.0 - q) * Ay[static_cast<std::size_t>(j)];
      const int i = j + 1;
      Real s;
      if (q == 1.0)
        s = src.source_at(n + 1, i, grid);
      else
        s = 0.5 * (src.source_at(n, i, grid) + src.source_at(n + 1, i, grid));
      rhs[static_cast<std::size_t>(j)] = r + grid.dt * s;
    }
    st.factor.solve(rhs, y);
    attach_boundary(y, bc, traj.slice(n + 1));
  }
  return traj;
}

Trajectory solve_adjoint(const std::vector<Real>& vT, const std::function<Real(Real, Real)>& g,
                         const Grid& grid, const BoundaryCondition& bc) {
  Stepper st(grid, bc, 1.0);
  const int N = grid.N, M = grid.M;

  Trajectory traj;
  traj.grid = grid;
  traj.bc = bc;
  traj.values.assign(static_cast<std::size_t>(M) + 1, std::vector<Real>(static_cast<std::size_t>(N) + 2, 0.0));

  std::vector<Real> v = vT.size() == static_cast<std::size_t>(N) + 2 ? interior_of(vT, N) : vT;
  if (v.size() != static_cast<std::size_t>(N))
    fail(ErrorKind::configuration, "solve_adjoint: vT size mismatch");
  attach_boundary(v, bc, traj.slice(M));

  std::vector<Real> rhs(static_cast<std::size_t>(N));
  for (int n = M - 1; n >= 0; --n) {
    for (int j = 0; j < N; ++j) {
      const int i = j + 1;
      const Real gv = g ? g(grid.t[static_cast<std::size_t>(n)], grid.x[static_cast<std::size_t>(i)]) : 0.0;
      rhs[static_cast<std::size_t>(j)] = v[static_cast<std::size_t>(j)] + grid.dt * gv;
    }
    st.factor.solve(rhs, v);
    attach_boundary(v, bc, traj.slice(n));
  }
  return traj;
}

std::vector<Real> memory_source(const KernelFn& b, const Trajectory& w, int n) {
  const Grid& g = w.grid;
  std::vector<Real> out(static_cast<std::size_t>(g.N) + 2, 0.0);
  if (n <= 0 || !b) return out;
  if (n > g.M) fail(ErrorKind::configuration, "memory_source: time index beyond the grid");
  const Real tn = g.t[static_cast<std::size_t>(n)];
  for (int j = 0; j <= n; ++j) {
    const Real wq = (j == 0 || j == n) ? 0.5 * g.dt : g.dt; // composite trapezoid
    const Real sj = g.t[static_cast<std::size_t>(j)];
    const auto& ws = w.slice(j);
    for (int i = 1; i <= g.N; ++i)
      out[static_cast<std::size_t>(i)] += wq * b(tn, sj, g.x[static_cast<std::size_t>(i)]) * ws[static_cast<std::size_t>(i)];
  }
  return out;
}

std::vector<Real> lagged_memory_slice(const KernelFn& b, const Trajectory& w, int m,
                                      const std::vector<std::vector<Real>>* history) {
  std::vector<Real> out = memory_source(b, w, m - 1);
  if (history) {
    const auto& hrow = (*history)[static_cast<std::size_t>(m)];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += hrow[i];
  }
  return out;
}

Trajectory solve_forward_with_memory(const std::vector<Real>& y0, const KernelFn& b,
                                     const std::vector<std::vector<Real>>& u, const Grid& grid,
                                     const BoundaryCondition& bc,
                                     const std::vector<std::vector<Real>>* history) {
  Stepper st(grid, bc, 1.0);
  const int N = grid.N, M = grid.M;

  Trajectory traj;
  traj.grid = grid;
  traj.bc = bc;
  traj.values.assign(static_cast<std::size_t>(M) + 1, std::vector<Real>(static_cast<std::size_t>(N) + 2, 0.0));

  std::vector<Real> y = y0.size() == static_cast<std::size_t>(N) + 2 ? interior_of(y0, N) : y0;
  if (y.size() != static_cast<std::size_t>(N))
    fail(ErrorKind::configuration, "solve_forward_with_memory: y0 size mismatch");
  attach_boundary(y, bc, traj.slice(0));

  std::vector<Real> rhs(static_cast<std::size_t>(N));
  for (int n = 0; n < M; ++n) {
    const std::vector<Real> mem = lagged_memory_slice(b, traj, n + 1, history);
    for (int j = 0; j < N; ++j) {
      const int i = j + 1;
      Real s = mem[static_cast<std::size_t>(i)];
      if (!u.empty()) s += u[static_cast<std::size_t>(n) + 1][static_cast<std::size_t>(i)];
      rhs[static_cast<std::size_t>(j)] = y[static_cast<std::size_t>(j)] + grid.dt * s;
    }
    st.factor.solve(rhs, y);
    attach_boundary(y, bc, traj.slice(n + 1));
  }
  return traj;
}

NormReport weighted_norms(const Trajectory& traj, const CarlemanWeights& w, Real s, Real k) {
  const Grid& g = traj.grid;
  NormReport rep;
  Real esk = 0.0, l2 = 0.0, saturated = 0.0;
  for (int n = 0; n <= g.M; ++n) {
    const Real tw = (n == 0 || n == g.M) ? 0.5 * g.dt : g.dt;
    const Real t = g.t[static_cast<std::size_t>(n)];
    const Real bt = w.beta(t);
    const Real log_sb = std::log(s * bt);
    const auto& ys = traj.slice(n);
    for (int i = 1; i <= g.N; ++i) {
      const Real y2 = ys[static_cast<std::size_t>(i)] * ys[static_cast<std::size_t>(i)];
      const Real expo = -k * log_sb - 2.0 * s * bt * w.Psi(g.x[static_cast<std::size_t>(i)]);
      const Real cell = tw * g.h * clamped_exp(expo) * y2;
      esk += cell;
      if (expo > 700.0) saturated += cell;
      l2 += tw * g.h * y2;
    }
  }
  rep.esk = esk;
  rep.l2Q = l2;
  rep.terminal = traj.terminal_l2();
  rep.diverged = esk > 0.0 && saturated > 0.5 * esk;
  return rep;
}

Real pde_residual_rms(const Trajectory& y, const std::vector<std::vector<Real>>& u,
                      const KernelFn& b, const DiscreteOperator& op) {
  const Grid& g = y.grid;
  Real sum = 0.0;
  std::size_t count = 0;
  std::vector<Real> interior(static_cast<std::size_t>(g.N)), Ay;
  for (int m = 1; m < g.M; ++m) {
    const auto& ym = y.slice(m);
    const auto& yp = y.slice(m + 1);
    const auto& yq = y.slice(m - 1);
    for (int j = 0; j < g.N; ++j) interior[static_cast<std::size_t>(j)] = ym[static_cast<std::size_t>(j) + 1];
    op.apply(interior, Ay);
    const std::vector<Real> mem = memory_source(b, y, m);
    for (int j = 0; j < g.N; ++j) {
      const int i = j + 1;
      Real r = (yp[static_cast<std::size_t>(i)] - yq[static_cast<std::size_t>(i)]) / (2.0 * g.dt) -
               Ay[static_cast<std::size_t>(j)] - mem[static_cast<std::size_t>(i)];
      if (!u.empty()) r -= u[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)];
      sum += r * r;
      ++count;
    }
  }
  return std::sqrt(sum / static_cast<Real>(count));
}

void write_trajectory(const std::string& path, const Trajectory& traj) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  std::fprintf(f, "# trajectory snapshot\n");
  std::fprintf(f, "t x y\n");
  const Grid& g = traj.grid;
  for (int n = 0; n <= g.M; ++n)
    for (int i = 0; i <= g.N + 1; ++i)
      std::fprintf(f, "%.17g %.17g %.17g\n", g.t[static_cast<std::size_t>(n)],
                   g.x[static_cast<std::size_t>(i)], traj.slice(n)[static_cast<std::size_t>(i)]);
  std::fclose(f);
}

} // namespace degctrl
