#include "doctest.h"

#include <cmath>

#include "degctrl/errors.hpp"
#include "degctrl/weights.hpp"

using namespace degctrl;

namespace {

std::vector<Real> uniform(int n, Real lo, Real hi) {
  std::vector<Real> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

CarlemanWeights default_weights(Real alpha, int p, Real L = 2.0,
                                GammaMode mode = GammaMode::fixed_point) {
  auto a = alpha > 0.0 ? prototype_coefficient(alpha, 0.0, Side::left)
                       : prototype_coefficient(0.0, 0.0, Side::none);
  const Real ds = d_star(a);
  auto [gamma, d] = choose_gamma_d(ds, L, mode);
  return build_weights(1.0, a, gamma, d, L, p, uniform(202, 0.0, 1.0), 0.45);
}

} // namespace

TEST_CASE("theta and beta basics") {
  auto w = default_weights(0.5, 4);
  CHECK(w.theta(0.5) == doctest::Approx(std::pow(2.0, 8)).epsilon(1e-13));
  CHECK(w.beta(0.0) == doctest::Approx(std::pow(2.0, 8)).epsilon(1e-13));
  // beta constant on [0, T/2]
  CHECK(w.beta(0.1) == w.beta(0.4));
  // beta continuous at T/2: theta is flat there, so one-sided values agree
  CHECK(std::abs(w.beta(0.5 - 1e-8) - w.beta(0.5 + 1e-8)) <= 1e-12 * w.beta(0.5));
  // theta blows up toward the ends
  CHECK(w.theta(1.0 / 400) > 1e3 * w.theta(0.5));
  CHECK(w.theta(1.0 - 1.0 / 400) > 1e3 * w.theta(0.5));
}

TEST_CASE("theta(1) = 1 at horizon T = 2 with p = 4") {
  auto a = prototype_coefficient(0.5, 0.0, Side::left);
  auto [gamma, d] = choose_gamma_d(d_star(a), 2.0, GammaMode::fixed_point);
  auto w = build_weights(2.0, a, gamma, d, 2.0, 4, uniform(101, 0.0, 1.0));
  CHECK(w.theta(1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(w.beta(0.0) == doctest::Approx(1.0).epsilon(1e-14)); // (2/T)^{2p} with T = 2
}

TEST_CASE("psi endpoint values") {
  auto w = default_weights(0.5, 4);
  CHECK(w.psi(0.0) == doctest::Approx(-w.gamma * w.d).epsilon(1e-14));
  CHECK(w.psi(1.0) == doctest::Approx(w.gamma * (w.d_star_value - w.d)).epsilon(1e-10));
  CHECK(w.d_star_value == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("Phi_hat and Phi_star profiles") {
  auto w = default_weights(0.5, 4);
  const Real T = w.T;
  CHECK(w.Phi_hat(0.0) ==
        doctest::Approx(w.gamma * (w.d_star_value - w.d) * std::pow(2.0 / T, 8)).epsilon(1e-13));
  // ratio Phi_star / Phi_hat = d / (d - d*) at any t (beta cancels)
  for (Real t : {0.1, 0.3, 0.7, 0.9})
    CHECK(w.Phi_star(t) / w.Phi_hat(t) ==
          doctest::Approx(w.d / (w.d - w.d_star_value)).epsilon(1e-13));
  // 5T/8 lies past T/2, so beta = theta there
  CHECK(w.Phi_star(0.625 * T) ==
        doctest::Approx(-w.gamma * w.d * w.theta(0.625 * T)).epsilon(1e-13));
}

TEST_CASE("choose_gamma_d windows") {
  // L = ln 3 - 0.01: window empty in fixed-point mode
  CHECK_THROWS_AS(choose_gamma_d(0.5, std::log(3.0) - 0.01, GammaMode::fixed_point), Error);

  // L = 2, d* = 0.5: d = 5 and the window (e^4/4.5, 3(e^4 - e^2)/9) is nonempty
  auto [gamma, d] = choose_gamma_d(0.5, 2.0, GammaMode::fixed_point);
  CHECK(d == doctest::Approx(5.0));
  const Real lo = std::exp(4.0) / 4.5;
  const Real hi = 3.0 * (std::exp(4.0) - std::exp(2.0)) / 9.0;
  CHECK(lo < hi);
  CHECK(gamma > lo);
  CHECK(gamma < hi);

  // carleman_only: any L gives gamma (d - d*) > e^{2L}
  for (Real L : {0.5, 1.0, 2.0, 3.0}) {
    auto [g2, d2] = choose_gamma_d(0.7, L, GammaMode::carleman_only);
    CHECK(g2 * (d2 - 0.7) > std::exp(2.0 * L));
  }
}

TEST_CASE("build_weights rejects an inadmissible pair") {
  auto a = prototype_coefficient(0.5, 0.0, Side::left);
  const Real ds = d_star(a);
  CHECK_THROWS_AS(build_weights(1.0, a, 1.0, 10.0 * ds, 2.0, 4, uniform(101, 0.0, 1.0)), Error);
  CHECK_THROWS_AS(build_weights(1.0, a, 50.0, 0.5 * ds, 2.0, 4, uniform(101, 0.0, 1.0)), Error);
}

TEST_CASE("weight inequalities hold for both degeneracy classes and both p") {
  for (Real alpha : {0.5, 1.5}) {
    for (int p : {2, 4}) {
      auto w = default_weights(alpha, p);
      auto t_nodes = uniform(121, 0.0, 1.0);
      auto x_nodes = uniform(151, 0.0, 1.0);
      auto reports = verify_weight_inequalities(w, x_nodes, t_nodes);
      for (const auto& r : reports) {
        INFO(r.inequality_id << " alpha=" << alpha << " p=" << p
                             << " violation=" << r.max_violation);
        CHECK(r.passed);
      }
    }
  }
}

TEST_CASE("a hand-built gamma violates the comparison chain") {
  // Bypass choose_gamma_d with a gamma above the window and check that the
  // verifier flags the sigma_hat chain.
  auto a = prototype_coefficient(0.5, 0.0, Side::left);
  const Real ds = d_star(a);
  const Real L = 2.0;
  const Real d = 10.0 * ds;
  const Real gamma_big = 3.0 * (std::exp(2.0 * L) - std::exp(L)) / (2.0 * (d - ds)) * 1.5;
  auto w = build_weights(1.0, a, gamma_big, d, L, 4, uniform(101, 0.0, 1.0));
  auto reports = verify_weight_inequalities(w, uniform(51, 0.0, 1.0), uniform(51, 0.0, 1.0));
  bool chain_failed = false;
  for (const auto& r : reports)
    if (r.inequality_id == "sigma-hat-le-Phi-hat" && !r.passed) chain_failed = true;
  CHECK(chain_failed);
}

TEST_CASE("theta ratio constant is stable under time refinement") {
  for (int p : {2, 4}) {
    auto w = default_weights(0.5, p);
    const Real c1 = theta_ratio_constant(w, uniform(401, 0.0, 1.0));
    const Real c2 = theta_ratio_constant(w, uniform(801, 0.0, 1.0));
    CHECK(std::isfinite(c1));
    CHECK(std::abs(c2 - c1) <= 0.01 * c1);
  }
}

TEST_CASE("the fixed-point chain bound of the smallness argument") {
  // 2 Phi_hat(0) - 2 Phi_star(5T/8) + (3/2) sigma_hat(0) < -gamma (2/T)^{2p} d* < 0
  for (int p : {2, 4}) {
    auto w = default_weights(0.5, p);
    const Real chain = 2.0 * w.Phi_hat(0.0) - 2.0 * w.Phi_star(w.five_eighths()) +
                       1.5 * w.sigma_hat(0.0);
    const Real bound = -w.gamma * std::pow(2.0 / w.T, 2.0 * p) * w.d_star_value;
    CHECK(chain < bound);
    CHECK(bound < 0.0);
  }
}

TEST_CASE("right-degenerate weights mirror the construction") {
  auto a = prototype_coefficient(0.0, 0.5, Side::right);
  const Real ds = d_star(a);
  auto [gamma, d] = choose_gamma_d(ds, 2.0, GammaMode::fixed_point);
  auto w = build_weights(1.0, a, gamma, d, 2.0, 4, uniform(201, 0.0, 1.0), 0.5);
  CHECK(w.side == Side::right);
  // mirrored psi: psi(1) = -gamma d, psi(0) = gamma (d* - d)
  CHECK(w.psi(1.0) == doctest::Approx(-gamma * d).epsilon(1e-14));
  CHECK(w.psi(0.0) == doctest::Approx(gamma * (ds - d)).epsilon(1e-9));
  auto reports = verify_weight_inequalities(w, uniform(101, 0.0, 1.0), uniform(101, 0.0, 1.0));
  for (const auto& r : reports) {
    INFO(r.inequality_id);
    CHECK(r.passed);
  }
}

TEST_CASE("double degeneracy is rejected by build_weights") {
  auto a = prototype_coefficient(0.5, 0.5, Side::both);
  CHECK_THROWS_AS(build_weights(1.0, a, 10.0, 10.0, 2.0, 4, uniform(101, 0.0, 1.0)), Error);
}

TEST_CASE("bump rho vanishes at the ends and flattens only at the omega center") {
  auto w = default_weights(0.5, 4);
  CHECK(w.rho(0.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(std::abs(w.rho(1.0)) <= 1e-13);
  for (Real x = 0.05; x < 0.999; x += 0.05) CHECK(w.rho(x) > 0.0);
  // derivative changes sign exactly once, at the configured center 0.45
  const Real eps = 1e-6;
  auto drho = [&](Real x) { return (w.rho(x + eps) - w.rho(x - eps)) / (2 * eps); };
  CHECK(drho(0.44) > 0.0);
  CHECK(drho(0.46) < 0.0);
}
