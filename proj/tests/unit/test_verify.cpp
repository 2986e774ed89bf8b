#include <cmath>

#include "doctest.h"
#include "odered/generator.hpp"
#include "odered/problem.hpp"
#include "odered/verify.hpp"

using namespace odered;

namespace {

ReduceOptions until(double x1) {
  ReduceOptions o;
  o.interval_end = x1;
  return o;
}

ClassDescriptor trivial() {
  ClassDescriptor d;
  d.tag = ClassTag::I;
  d.a = Expr(0.0);
  d.F = Expr(0.0);
  d.G = Expr(0.0);
  return d;
}

}  // namespace

TEST_CASE("y'' = 0 lands on y(1) = 4") {
  const auto t = integrate_second_order(trivial(), {0.0, 1.0, 3.0}, 1.0, 1e-10);
  CHECK(t.x.size() == 101);
  CHECK(t.y.back() == doctest::Approx(4.0).epsilon(1e-13));
  const auto r = reduce(trivial(), {0.0, 1.0, 3.0});
  const auto u = integrate_first_order(r, 1.0, 1e-10);
  CHECK(u.y.back() == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(residual_on_grid(trivial(), r, u) < 1e-14);
}

TEST_CASE("trivial descriptor passes with both metrics at roundoff") {
  const auto c = compare(trivial(), {0.0, 1.0, 3.0}, 1.0);
  CHECK(c.report.pass);
  CHECK(c.report.residual_sup < 1e-13);
  CHECK(c.report.trajectory_dev < 1e-13);
  CHECK(c.report.diagnostics.empty());
}

TEST_CASE("bundled examples pass at 1e-6") {
  for (const auto& key : example_names()) {
    const Problem p = named_example(key);
    const auto c = compare(p.descriptor(), p.ic, p.interval_end, p.tol, p.options());
    INFO(key);
    CHECK(c.report.pass);
  }
}

TEST_CASE("singular interval fails with a located diagnostic") {
  const Problem p = load_problem(ODERED_DATA_DIR "/variants/eqx10_singular.json");
  const auto c = compare(p.descriptor(), p.ic, p.interval_end, p.tol, p.options());
  CHECK_FALSE(c.report.pass);
  REQUIRE_FALSE(c.report.diagnostics.empty());
  bool located = false;
  for (const auto& d : c.report.diagnostics) located = located || d.find("x = 1.35") != std::string::npos;
  CHECK(located);
}

TEST_CASE("class I with F = G = 0 conserves y' e^{int a}") {
  for (double c1 : {-1.5, 0.3, 1.2}) {
    ClassDescriptor d = trivial();
    d.a = parse("0.7 + " + std::to_string(c1) + "*x", {"x"});
    const auto t = integrate_second_order(d, {1.0, 1.0, 0.8}, 2.0, 1e-12);
    for (std::size_t i = 0; i < t.x.size(); ++i) {
      const double x = t.x[i];
      const double I = 0.7 * (x - 1) + c1 * (x * x - 1) / 2;
      CHECK(t.yp[i] * std::exp(I) == doctest::Approx(0.8).epsilon(1e-9));
    }
  }
}

TEST_CASE("halving the integrator tolerance does not inflate the residual") {
  // Residuals at roundoff level fluctuate freely; 1e-12 is the floor below
  // which the ratio carries no information.
  ProblemGenerator g(5);
  for (ClassTag t : {ClassTag::I, ClassTag::II, ClassTag::III, ClassTag::IV})
    for (int i = 0; i < 3; ++i) {
      const auto p = g.descriptor(t);
      const auto r = reduce(p.d, p.ic, until(p.x1));
      const double a = residual_on_grid(p.d, r, integrate_first_order(r, p.x1, 1e-8));
      const double b = residual_on_grid(p.d, r, integrate_first_order(r, p.x1, 5e-9));
      INFO(p.text);
      CHECK(b <= 2 * std::max(a, 1e-12));
    }
}

TEST_CASE("equivalent pairs integrate to the same trajectory") {
  ProblemGenerator g(3);
  for (ClassTag t : {ClassTag::I, ClassTag::II}) {
    const auto rp = g.equivalent_pair(t);
    CHECK(rp.second.d.tag == (t == ClassTag::I ? ClassTag::III : ClassTag::IV));
    CHECK(direct_deviation(rp.first.d, rp.second.d, rp.first.ic, rp.first.x1) < 1e-8);
  }
}

TEST_CASE("generated Abel instances round trip through the chain") {
  ProblemGenerator g(9);
  for (bool cubic : {true, false}) {
    const auto a = g.abel(cubic);
    const auto c = cubic ? abel2_cubic_to_canonical(a.f3, a.f2, a.f1, a.f0, a.g1, a.g0, a.t0, a.t0, a.t1)
                         : abel2_quadratic_to_canonical(a.f2, a.f1, a.f0, a.g1, a.g0, a.t0, a.t0, a.t1);
    const Expr y = Expr::var("y");
    const Expr num = a.f3 * pow(y, 3.0) + a.f2 * pow(y, 2.0) + a.f1 * y + a.f0;
    const Expr den = a.g1 * y + a.g0;
    OdeRhs f = [&](double x, const double* s, double* ds) {
      const Env e{{"x", x}, {"y", s[0]}};
      ds[0] = eval(num, e) / eval(den, e);
    };
    INFO(a.text);
    CHECK(chain_round_trip(c, f, a.y0) < 1e-6);
  }
}

TEST_CASE("generator is deterministic per seed") {
  ProblemGenerator a(42), b(42);
  for (int i = 0; i < 5; ++i) CHECK(a.descriptor(ClassTag::III).text == b.descriptor(ClassTag::III).text);
}
