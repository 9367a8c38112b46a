#include "degctrl/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "degctrl/errors.hpp"

namespace degctrl {

Real clamped_exp(Real log_value, Real lo, Real hi) {
  if (std::isnan(log_value)) fail(ErrorKind::internal, "clamped_exp: NaN exponent");
  return std::exp(std::min(hi, std::max(lo, log_value)));
}

namespace {

// 7-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr Real kGx[7] = {
    -0.9491079123427585, -0.7415311855993945, -0.4058451513773972,
    0.0,
    0.4058451513773972, 0.7415311855993945, 0.9491079123427585};
constexpr Real kGw[7] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694,
    0.3818300505051189, 0.2797053914892767, 0.1294849661688697};

Real adaptive_gauss_impl(const RealFn& f, Real a, Real b, Real whole, Real abs_tol, int depth) {
  const Real m = 0.5 * (a + b);
  const Real left = gauss7(f, a, m);
  const Real right = gauss7(f, m, b);
  const Real delta = left + right - whole;
  if (std::abs(delta) <= abs_tol || depth <= 0) return left + right;
  return adaptive_gauss_impl(f, a, m, left, 0.5 * abs_tol, depth - 1) +
         adaptive_gauss_impl(f, m, b, right, 0.5 * abs_tol, depth - 1);
}

} // namespace

Real gauss7(const RealFn& f, Real a, Real b) {
  const Real c = 0.5 * (a + b);
  const Real r = 0.5 * (b - a);
  Real s = 0.0;
  for (int i = 0; i < 7; ++i) s += kGw[i] * f(c + r * kGx[i]);
  return s * r;
}

Real adaptive_gauss(const RealFn& f, Real a, Real b, Real rel_tol, int max_depth) {
  const Real whole = gauss7(f, a, b);
  const Real abs_tol = rel_tol * std::max<Real>(std::abs(whole), 1e-300);
  return adaptive_gauss_impl(f, a, b, whole, abs_tol, max_depth);
}

Real graded_singular_integral(const RealFn& f, Real lo, Real hi, bool singular_at_lo,
                              Real rel_tol) {
  if (!(hi > lo)) return 0.0;
  const Real w = hi - lo;
  Real total = 0.0;
  Real prev_term = 0.0, last_term = 0.0, q = 0.0;
  int flat_streak = 0;
  // Panels [lo + w 2^{-j-1}, lo + w 2^{-j}] (mirrored for a right singularity).
  // Panel integrals of a power-law singularity decay geometrically, so the
  // truncated tail is extrapolated from the observed ratio on exit.
  for (int j = 0; j < 1100; ++j) {
    const Real outer = std::ldexp(w, -j);
    const Real inner = std::ldexp(w, -j - 1);
    if (inner <= 0.0 || outer == inner) break; // width underflow: tail is exactly zero
    Real a, b;
    if (singular_at_lo) {
      a = lo + inner;
      b = lo + outer;
    } else {
      a = hi - outer;
      b = hi - inner;
    }
    // Near the singular endpoint the panel bounds collide in floating point;
    // stop a few ulps early and let the tail extrapolation cover the rest.
    if (!(a < b) || (b - a) < 8.0 * 2.3e-16 * std::max({std::abs(a), std::abs(b), Real(1.0)}))
      break;
    const Real term = adaptive_gauss(f, a, b, rel_tol, 18);
    total += term;
    last_term = term;
    if (j >= 1 && std::abs(prev_term) > 0.0) q = std::abs(term) / std::abs(prev_term);
    if (j > 2) {
      if (q > 0.999) {
        if (++flat_streak >= 40)
          fail(ErrorKind::divergent_integral,
               "graded_singular_integral: panel contributions do not decay "
               "(non-integrable singularity?)");
      } else {
        flat_streak = 0;
      }
      if (q < 0.95) {
        const Real tail = std::abs(term) * q / (1.0 - q);
        if (tail <= 0.05 * rel_tol * std::max<Real>(std::abs(total), 1e-300)) break;
      }
    }
    prev_term = term;
  }
  if (q > 0.0 && q < 0.995) total += last_term * q / (1.0 - q); // geometric tail
  return total;
}

LinearTable::LinearTable(std::vector<Real> xs, std::vector<Real> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  if (xs_.size() != ys_.size() || xs_.size() < 2)
    fail(ErrorKind::internal, "LinearTable: need >= 2 matched samples");
}

Real LinearTable::operator()(Real x) const {
  if (x <= xs_.front()) return ys_.front();
  if (x >= xs_.back()) return ys_.back();
  auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
  const Real t = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
  return ys_[i] + t * (ys_[i + 1] - ys_[i]);
}

void thomas_solve(const Tridiag& T, const std::vector<Real>& rhs, std::vector<Real>& x) {
  TridiagFactor(T).solve(rhs, x);
}

TridiagFactor::TridiagFactor(const Tridiag& T) {
  const std::size_t n = T.size();
  cprime_.resize(n > 0 ? n - 1 : 0);
  dinv_.resize(n);
  sub_ = T.sub;
  Real d = T.diag[0];
  dinv_[0] = 1.0 / d;
  for (std::size_t i = 1; i < n; ++i) {
    cprime_[i - 1] = T.sup[i - 1] * dinv_[i - 1];
    d = T.diag[i] - T.sub[i - 1] * cprime_[i - 1];
    dinv_[i] = 1.0 / d;
  }
}

void TridiagFactor::solve(const std::vector<Real>& rhs, std::vector<Real>& x) const {
  const std::size_t n = dinv_.size();
  x.resize(n);
  x[0] = rhs[0] * dinv_[0];
  for (std::size_t i = 1; i < n; ++i) x[i] = (rhs[i] - sub_[i - 1] * x[i - 1]) * dinv_[i];
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= cprime_[i] * x[i + 1];
}

SmoothFieldGen::SmoothFieldGen(std::uint64_t seed, int n_modes) : rng_(seed), n_modes_(n_modes) {}

RealFn SmoothFieldGen::sample(Real x_lo, Real x_hi) {
  std::uniform_real_distribution<Real> unif(-1.0, 1.0);
  std::vector<Real> c(static_cast<std::size_t>(n_modes_));
  for (int k = 0; k < n_modes_; ++k) c[static_cast<std::size_t>(k)] = unif(rng_) / ((k + 1.0) * (k + 1.0));
  const Real len = x_hi - x_lo;
  return [c, x_lo, len](Real x) {
    const Real xi = (x - x_lo) / len;
    Real s = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k)
      s += c[k] * std::sin((static_cast<Real>(k) + 1.0) * M_PI * xi);
    return s;
  };
}

std::function<Real(Real, Real)> SmoothFieldGen::sample_spacetime(Real T, Real x_lo, Real x_hi) {
  std::uniform_real_distribution<Real> unif(-1.0, 1.0);
  const int n = n_modes_;
  std::vector<Real> c(static_cast<std::size_t>(n * n));
  for (auto& v : c) v = unif(rng_);
  const Real len = x_hi - x_lo;
  return [c, n, T, x_lo, len](Real t, Real x) {
    const Real xi = (x - x_lo) / len;
    const Real tau = t / T;
    Real s = 0.0;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        s += c[static_cast<std::size_t>(j * n + k)] / ((j + 1.0) * (k + 1.0)) *
             std::cos(j * M_PI * tau) * std::sin((k + 1.0) * M_PI * xi);
    return s;
  };
}

} // namespace degctrl
