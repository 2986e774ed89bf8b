#include <cmath>

#include "doctest.h"
#include "odered/functions.hpp"
#include "odered/integrator.hpp"

using namespace odered;

TEST_CASE("dopri5 reproduces the exponential") {
  OdeRhs f = [](double, const double* y, double* dy) { dy[0] = y[0]; };
  const auto grid = uniform_grid(0.0, 1.0, 11);
  const auto ys = integrate_on_grid(f, {1.0}, grid, {});
  REQUIRE(ys.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(ys[i][0] == doctest::Approx(std::exp(grid[i])).epsilon(1e-9));
}

TEST_CASE("dopri5 lands on the target and on the grid exactly") {
  OdeRhs f = [](double x, const double*, double* dy) { dy[0] = std::cos(x); };
  Dopri5 s(f, {0.0}, 0.0);
  s.advance_to(2.5);
  CHECK(s.x() == 2.5);
  CHECK(s.y()[0] == doctest::Approx(std::sin(2.5)).epsilon(1e-10));
}

TEST_CASE("dense output between steps keeps the step accuracy") {
  OdeRhs f = [](double x, const double* y, double* dy) { dy[0] = -2.0 * x * y[0]; };
  OdeOptions opt;
  opt.rtol = opt.atol = 1e-9;
  Dopri5 s(f, {1.0}, 0.0, opt);
  double worst = 0.0;
  while (s.x() < 2.0) {
    s.step(2.0);
    for (int j = 1; j < 8; ++j) {
      const double at = s.x_prev() + (s.x() - s.x_prev()) * j / 8.0;
      worst = std::max(worst, std::abs(s.dense(0, at) - std::exp(-at * at)));
    }
  }
  CHECK(worst < 1e-7);
}

TEST_CASE("second-order system y'' = 0") {
  OdeRhs f = [](double, const double* y, double* dy) {
    dy[0] = y[1];
    dy[1] = 0.0;
  };
  const auto ys = integrate_on_grid(f, {1.0, 3.0}, uniform_grid(0.0, 1.0, 5), {});
  CHECK(ys.back()[0] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(ys.back()[1] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("blow-up is reported near the singularity") {
  // y' = y^2, y(0) = 1: y = 1/(1 - x).
  OdeRhs f = [](double, const double* y, double* dy) { dy[0] = y[0] * y[0]; };
  try {
    (void)integrate_on_grid(f, {1.0}, uniform_grid(0.0, 2.0, 21), {});
    FAIL("expected IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(e.location() == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("a throwing right-hand side becomes a step-size failure") {
  OdeRhs f = [](double x, const double*, double* dy) {
    if (x > 0.5) throw DomainError("outside");
    dy[0] = 1.0;
  };
  Dopri5 s(f, {0.0}, 0.0);
  CHECK_THROWS_AS(s.advance_to(1.0), IntegrationError);
}

TEST_CASE("numeric solution evaluates forward, backward and differentiates") {
  const Expr rhs = Expr::var("K");  // K' = K
  auto k = numeric_solution("K", rhs, "t", "K", 0.0, 1.0);
  CHECK(k->value(1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-10));
  CHECK(k->value(-1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
  CHECK(k->value(0.3) == doctest::Approx(std::exp(0.3)).epsilon(1e-10));
  const Expr d = differentiate(k->at(Expr::var("t")), "t");
  CHECK(eval(d, "t", 0.7) == doctest::Approx(std::exp(0.7)).epsilon(1e-10));
}

TEST_CASE("numeric solution remembers a failure") {
  const Expr K = Expr::var("K");
  auto k = numeric_solution("K", K * K, "t", "K", 0.0, 1.0);
  CHECK(k->value(0.5) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK_THROWS_AS((void)k->value(1.5), DomainError);
  CHECK_THROWS_AS((void)k->value(3.0), DomainError);
  CHECK(k->value(0.9) == doctest::Approx(10.0).epsilon(1e-8));
}

TEST_CASE("jacobi call nodes evaluate and differentiate") {
  const Expr u = Expr::var("u");
  const Expr sn = jacobi_call(JacobiKind::Sn, 0.5, u);
  CHECK(sn.str().find("sn[k=0.5]") != std::string::npos);
  const double h = 1e-6;
  const Expr d = differentiate(sn, "u");
  const double fd = (eval(sn, "u", 0.8 + h) - eval(sn, "u", 0.8 - h)) / (2 * h);
  CHECK(eval(d, "u", 0.8) == doctest::Approx(fd).epsilon(1e-8));
  const Expr dn = jacobi_call(JacobiKind::Dn, 0.5, u);
  const double fd2 = (eval(dn, "u", 0.8 + h) - eval(dn, "u", 0.8 - h)) / (2 * h);
  CHECK(eval(differentiate(dn, "u"), "u", 0.8) == doctest::Approx(fd2).epsilon(1e-7));
}
