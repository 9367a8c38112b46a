#include "doctest.h"

#include <cmath>

#include "degctrl/coeffs.hpp"
#include "degctrl/errors.hpp"
#include "degctrl/numerics.hpp"

using namespace degctrl;

namespace {

std::vector<Real> uniform_nodes(int N, Real lo = 0.0, Real hi = 1.0) {
  std::vector<Real> x(static_cast<std::size_t>(N) + 2);
  const Real h = (hi - lo) / (N + 1);
  for (int i = 0; i <= N + 1; ++i) x[static_cast<std::size_t>(i)] = lo + i * h;
  return x;
}

} // namespace

TEST_CASE("prototype coefficients evaluate the power law") {
  auto a0 = prototype_coefficient(0.0, 0.0, Side::none);
  CHECK(a0(0.3) == doctest::Approx(1.0));

  auto a1 = prototype_coefficient(0.5, 0.0, Side::left);
  CHECK(a1(0.25) == doctest::Approx(0.5).epsilon(1e-15)); // 0.25^0.5
  CHECK(a1.case_left == DegeneracyCase::WD);

  auto a2 = prototype_coefficient(1.5, 1.5, Side::both);
  CHECK(a2(0.5) == doctest::Approx(0.125).epsilon(1e-15)); // 0.5^3
  CHECK(a2.case_left == DegeneracyCase::SD);
  CHECK(a2.case_right == DegeneracyCase::SD);
}

TEST_CASE("prototype rejects bad exponents and inconsistent sides") {
  CHECK_THROWS_AS(prototype_coefficient(2.0, 0.0, Side::left), Error);
  CHECK_THROWS_AS(prototype_coefficient(-0.1, 0.0, Side::left), Error);
  CHECK_THROWS_AS(prototype_coefficient(0.5, 0.0, Side::right), Error);
  CHECK_THROWS_AS(prototype_coefficient(0.0, 0.0, Side::left), Error);
}

TEST_CASE("alpha inequality margins vanish for power laws") {
  auto grid = uniform_nodes(200);
  for (Real alpha : {0.25, 0.5, 1.0, 1.5}) {
    auto a = prototype_coefficient(alpha, 0.0, Side::left);
    auto reports = check_degeneracy_hypotheses(a, grid);
    REQUIRE(!reports.empty());
    bool found = false;
    for (const auto& r : reports)
      if (r.condition_id == "alpha-left") {
        found = true;
        CHECK(r.passed);
        CHECK(std::abs(r.worst_margin) <= 1e-12); // equality for the power law
      }
    CHECK(found);
  }
}

TEST_CASE("alpha inequality fails for an understated exponent") {
  auto a = prototype_coefficient(1.5, 0.0, Side::left);
  a.alpha_left = 1.0; // declared alpha below the true growth
  auto reports = check_degeneracy_hypotheses(a, uniform_nodes(100));
  for (const auto& r : reports)
    if (r.condition_id == "alpha-left") CHECK_FALSE(r.passed);
}

TEST_CASE("constant coefficient passes with zero margin") {
  auto a = prototype_coefficient(0.0, 0.0, Side::none);
  auto reports = check_degeneracy_hypotheses(a, uniform_nodes(50));
  for (const auto& r : reports) {
    CHECK(r.passed);
    CHECK(std::abs(r.worst_margin) <= 1e-12);
  }
}

TEST_CASE("beta monotonicity reports appear for SD sides") {
  auto a = prototype_coefficient(1.5, 0.0, Side::left);
  auto reports = check_degeneracy_hypotheses(a, uniform_nodes(100));
  bool found = false;
  for (const auto& r : reports)
    if (r.condition_id == "beta-mono-left") {
      found = true;
      CHECK(r.passed); // x^1.5 / x^1.5 constant: nondecreasing
    }
  CHECK(found);
}

TEST_CASE("d_star matches the analytic antiderivative") {
  // d*(x^alpha) = 1/(2 - alpha)
  CHECK(d_star(prototype_coefficient(0.0, 0.0, Side::none)) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(d_star(prototype_coefficient(0.5, 0.0, Side::left)) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(d_star(prototype_coefficient(1.0, 0.0, Side::left)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(d_star(prototype_coefficient(1.5, 0.0, Side::left)) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("d_star handles the mirrored right-degenerate integral") {
  CHECK(d_star(prototype_coefficient(0.0, 0.5, Side::right)) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("hardy ratio reproduces the symbolic witness") {
  // y = x(1-x), a = x: numerator 1/12, denominator 1/6
  auto a = prototype_coefficient(1.0, 0.0, Side::left);
  auto x = uniform_nodes(400);
  std::vector<Real> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * (1.0 - x[i]);
  y.front() = y.back() = 0.0;
  CHECK(hardy_poincare_ratio(y, x, a) == doctest::Approx(0.5).epsilon(2e-4));
}

TEST_CASE("hardy ratio is invariant under field scaling") {
  auto a = prototype_coefficient(0.5, 0.0, Side::left);
  auto x = uniform_nodes(150);
  std::vector<Real> y(x.size()), y3(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = std::sin(M_PI * x[i]) + 0.2 * std::sin(3 * M_PI * x[i]);
    y3[i] = -7.5 * y[i];
  }
  y.front() = y.back() = y3.front() = y3.back() = 0.0;
  const Real r1 = hardy_poincare_ratio(y, x, a);
  const Real r2 = hardy_poincare_ratio(y3, x, a);
  CHECK(r1 == doctest::Approx(r2).epsilon(1e-12));
}

TEST_CASE("hardy ratio rejects boundary-violating and flat fields") {
  auto a = prototype_coefficient(1.0, 0.0, Side::left);
  auto x = uniform_nodes(50);
  std::vector<Real> bad(x.size(), 0.0);
  bad.back() = 1.0; // violates y(1) = 0
  CHECK_THROWS_AS(hardy_poincare_ratio(bad, x, a), Error);
  std::vector<Real> zero(x.size(), 0.0);
  CHECK_THROWS_AS(hardy_poincare_ratio(zero, x, a), Error);
}

TEST_CASE("hardy ratio stays bounded under mesh refinement") {
  // random admissible fields; the max ratio must not grow under refinement
  for (Real alpha : {0.5, 1.0, 1.5}) {
    auto a = prototype_coefficient(alpha, 0.0, Side::left);
    SmoothFieldGen gen(99);
    std::vector<RealFn> fields;
    for (int i = 0; i < 20; ++i) fields.push_back(gen.sample());
    Real max_coarse = 0.0, max_fine = 0.0;
    for (const auto& f : fields) {
      for (int N : {200, 400}) {
        auto x = uniform_nodes(N);
        std::vector<Real> y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
        y.front() = y.back() = 0.0;
        const Real r = hardy_poincare_ratio(y, x, a);
        (N == 200 ? max_coarse : max_fine) = std::max(N == 200 ? max_coarse : max_fine, r);
      }
    }
    CHECK(max_fine <= max_coarse * 1.10);
    CHECK(std::isfinite(max_fine));
  }
}

TEST_CASE("coefficient records round through the flat format") {
  std::map<std::string, std::string> rec{
      {"kind", "prototype"}, {"alpha_left", "0.5"}, {"alpha_right", "0"}, {"side", "left"}};
  auto a = coefficient_from_record(rec);
  CHECK(a(0.25) == doctest::Approx(0.5));
  CHECK(a.degeneracy_side == Side::left);
}
