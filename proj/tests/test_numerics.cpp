#include "doctest.h"

#include <cmath>

#include "degctrl/errors.hpp"
#include "degctrl/numerics.hpp"

using namespace degctrl;

TEST_CASE("gauss and adaptive quadrature on smooth integrands") {
  CHECK(gauss7([](Real x) { return x * x; }, 0.0, 1.0) == doctest::Approx(1.0 / 3).epsilon(1e-14));
  const Real v = adaptive_gauss([](Real x) { return std::sin(x); }, 0.0, M_PI);
  CHECK(v == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("graded quadrature resolves integrable endpoint singularities") {
  // int_0^1 x^{-1/2} dx = 2, singular at the left end
  const Real left = graded_singular_integral([](Real x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0,
                                             true, 1e-12);
  CHECK(left == doctest::Approx(2.0).epsilon(1e-10));
  // mirrored: int_0^1 (1-x)^{-1/2} dx = 2
  const Real right = graded_singular_integral([](Real x) { return 1.0 / std::sqrt(1.0 - x); }, 0.0,
                                              1.0, false, 1e-12);
  CHECK(right == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("graded quadrature reports non-integrable singularities") {
  CHECK_THROWS_AS(graded_singular_integral([](Real x) { return 1.0 / x; }, 0.0, 1.0, true),
                  Error);
}

TEST_CASE("clamped_exp saturates instead of overflowing") {
  CHECK(clamped_exp(1e9) == doctest::Approx(std::exp(700.0)));
  CHECK(clamped_exp(-1e9) == doctest::Approx(std::exp(-700.0)));
  CHECK(clamped_exp(1.0) == doctest::Approx(std::exp(1.0)));
}

TEST_CASE("thomas solve against a dense check") {
  Tridiag T;
  T.diag = {4.0, 5.0, 6.0, 7.0};
  T.sub = {1.0, 2.0, 3.0};
  T.sup = {0.5, 0.25, 0.125};
  std::vector<Real> x_true = {1.0, -2.0, 3.0, -4.0};
  std::vector<Real> rhs(4);
  rhs[0] = T.diag[0] * x_true[0] + T.sup[0] * x_true[1];
  rhs[1] = T.sub[0] * x_true[0] + T.diag[1] * x_true[1] + T.sup[1] * x_true[2];
  rhs[2] = T.sub[1] * x_true[1] + T.diag[2] * x_true[2] + T.sup[2] * x_true[3];
  rhs[3] = T.sub[2] * x_true[2] + T.diag[3] * x_true[3];
  std::vector<Real> x;
  thomas_solve(T, rhs, x);
  for (std::size_t i = 0; i < 4; ++i) CHECK(x[i] == doctest::Approx(x_true[i]).epsilon(1e-12));
}

TEST_CASE("smooth field generator is mesh-independent and seeded") {
  SmoothFieldGen g1(7), g2(7);
  RealFn f1 = g1.sample();
  RealFn f2 = g2.sample();
  CHECK(f1(0.37) == f2(0.37)); // same seed, same function
  CHECK(f1(0.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(f1(1.0) == doctest::Approx(0.0).epsilon(1e-14));
}
