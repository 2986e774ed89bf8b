#include <cmath>

#include "doctest.h"
#include "odered/functions.hpp"
#include "odered/generator.hpp"
#include "odered/problem.hpp"
#include "odered/reduction.hpp"
#include "odered/verify.hpp"
#include "support/doctest_expr.hpp"

using namespace odered;

namespace {

ReduceOptions until(double x1) {
  ReduceOptions o;
  o.interval_end = x1;
  return o;
}

Expr pe(const char* s, std::vector<std::string> vars) { return parse(s, vars); }

double ev(const Expr& e, double x, double y) { return eval(e, Env{{"x", x}, {"y", y}}); }

ReducedODE reduce_example(const std::string& key) {
  const Problem p = named_example(key);
  return reduce(p.descriptor(), p.ic, p.options());
}

ClassDescriptor power_class(ClassTag t, int m, const char* a, const char* F2) {
  ClassDescriptor d;
  d.tag = t;
  d.m = m;
  d.a = pe(a, {"x", "y"});
  d.F2 = pe(F2, {"u", "v"});
  return d;
}

/// Classical RK4 for K' = f(t, K); independent of the library integrator.
template <class F>
double rk4(F f, double t0, double k0, double t1, int n) {
  const double h = (t1 - t0) / n;
  double t = t0, k = k0;
  for (int i = 0; i < n; ++i) {
    const double a = f(t, k), b = f(t + h / 2, k + h / 2 * a), c = f(t + h / 2, k + h / 2 * b),
                 d = f(t + h, k + h * c);
    k += h / 6 * (a + 2 * b + 2 * c + d);
    t += h;
  }
  return k;
}

}  // namespace

TEST_CASE("class I: H, K and the constant from the initial condition") {
  ClassDescriptor d;
  d.tag = ClassTag::I;
  d.a = Expr(0.0);
  d.F = Expr(1.0);
  d.G = pe("2*y", {"y"});
  const auto r = reduce(d, {1.0, 2.0, 0.5});
  // y'' = 1 + 2 y y' integrates to y' = (x - 1) + (y^2 - 4) + 1/2.
  for (double x : {1.0, 1.4})
    for (double y : {1.5, 2.0, 2.7}) CHECK(ev(r.rhs, x, y) == doctest::Approx((x - 1) + (y * y - 4) + 0.5));
  CHECK(r.A == 0.5);
}

TEST_CASE("class II: the integrating factor lives in y") {
  ClassDescriptor d;
  d.tag = ClassTag::II;
  d.a = Expr(1.0);
  d.F = Expr(0.0);
  d.G = Expr(0.0);
  const auto r = reduce(d, {0.0, 1.0, 2.0});
  // y'' + y'^2 = 0: y' = 2 e^{-(y - 1)}.
  for (double y : {0.5, 1.0, 2.0}) CHECK(ev(r.rhs, 0.3, y) == doctest::Approx(2 * std::exp(1 - y)));
}

TEST_CASE("trivial K-equation keeps K constant") {
  const auto r = reduce(power_class(ClassTag::III, 0, "1/x", "0"), {1.0, 1.0, 0.7});
  for (double x : {1.0, 2.0}) CHECK(ev(r.rhs, x, 1.3) == doctest::Approx(0.7 / x));
}

TEST_CASE("eqx10 reduces to K(y)/x with K = y^2/(3 - y)") {
  const auto r = reduce_example("eqx10");
  CHECK(r.shape == "K(y)/x");
  CHECK(r.K0 == 0.5);
  CHECK(r.k_form.tag == FormTag::Bernoulli);
  for (double y : {1.0, 1.5, 2.5}) CHECK(eval(r.K, "y", y) == doctest::Approx(y * y / (3 - y)).epsilon(1e-12));
  const auto s = implicit_solution(r);
  CHECK(s.B == doctest::Approx(-3.0));
  CHECK(s.left == pe("-3/y - ln(y)", {"y"}));
}

TEST_CASE("eqxx10 implicit override is accepted and consistent") {
  const auto r = reduce_example("eqxx10");
  CHECK(r.shape == "K(y)*x^-2");
  const auto s = implicit_solution(r, named_example("eqxx10").options());
  const auto t = integrate_first_order(r, 1.2, 1e-12);
  for (std::size_t i = 0; i < t.x.size(); ++i) CHECK(std::abs(s.residual(t.x[i], t.y[i])) < 1e-8);
}

TEST_CASE("wrong overrides are rejected") {
  Problem p = named_example("eqx10");
  p.implicit = std::make_pair("-2/y - ln(y)", "ln(x)");
  const auto r = reduce(p.descriptor(), p.ic, p.options());
  CHECK_THROWS_AS(implicit_solution(r, p.options()), ReductionError);
  p = named_example("eqxxx10");
  p.k_closed = "y + 1";
  CHECK_THROWS_AS(reduce(p.descriptor(), p.ic, p.options()), ReductionError);
}

TEST_CASE("eqx1 reduces to K(x)*y with K = sn(x, 1/2)") {
  const auto r = reduce_example("eqx1");
  CHECK(r.shape == "K(x)*y");
  auto f = [](double, double k) { return std::sqrt((1 - k * k) * (1 - 0.25 * k * k)); };
  for (double x : {0.25, 0.5, 1.0})
    CHECK(eval(r.K, "x", x) == doctest::Approx(rk4(f, 0.0, 0.0, x, 4000)).epsilon(1e-10));
}

TEST_CASE("eqxx1 Riccati route reproduces the closed form") {
  const auto r = reduce_example("eqxx1");
  CHECK(r.k_form.tag == FormTag::Riccati);
  // General solution through K(1) = 1/4 built from the particular 1/x.
  for (double x : {1.0, 1.5, 2.0})
    CHECK(eval(r.K, "x", x) == doctest::Approx(1 / x - x * x / (x * x * x / 3 + 1)).epsilon(1e-12));
  const auto t = integrate_first_order(r, 2.0, 1e-12);
  CHECK(t.y.back() == doctest::Approx(8.0 / 11.0).epsilon(1e-10));
}

TEST_CASE("eqxxx10 numeric K keeps the cubic invariant") {
  Problem p = named_example("eqxxx10");
  p.k_closed.reset();
  const auto r = reduce(p.descriptor(), p.ic, p.options());
  CHECK(r.k_form.tag == FormTag::AbelKind2);
  for (double y : {0.0, 0.2, 0.4, 0.6}) {
    const double K = eval(r.K, "y", y);
    CHECK((K - 2 * y) * (K - 2 * y) * (K + y) == doctest::Approx(1.0).epsilon(1e-9));
  }
  const auto s = implicit_solution(r);
  CHECK(s.B == 0.0);
  const auto t = integrate_first_order(r, 1.3, 1e-11);
  for (std::size_t i = 0; i < t.x.size(); i += 10) CHECK(std::abs(s.residual(t.x[i], t.y[i])) < 1e-8);
}

TEST_CASE("negative slope with m + 1 even takes the negative branch") {
  const auto r = reduce(power_class(ClassTag::III, 1, "1/x", "v^2*u"), {1.0, 1.0, -2.0});
  CHECK(r.branch == -1);
  CHECK(r.K0 == 2.0);
  CHECK(ev(r.rhs, 1.0, 1.0) == doctest::Approx(-2.0));
}

TEST_CASE("zero slope is rejected when the K-equation is singular") {
  // K' = F2(y, K)/K with F2(y0, 0) = y0 != 0.
  CHECK_THROWS_AS(reduce(power_class(ClassTag::III, 0, "1/x", "u"), {1.0, 1.0, 0.0}),
                  ReductionError);
}

TEST_CASE("reduction is anchored for generated descriptors") {
  ProblemGenerator g(11);
  for (ClassTag t : {ClassTag::I, ClassTag::II, ClassTag::III, ClassTag::IV})
    for (int i = 0; i < 10; ++i) {
      const auto p = g.descriptor(t);
      const auto r = reduce(p.d, p.ic, until(p.x1));
      INFO(p.text);
      CHECK(ev(r.rhs, p.ic.x0, p.ic.y0) == doctest::Approx(p.ic.yp0).epsilon(1e-10).scale(1.0));
    }
}
