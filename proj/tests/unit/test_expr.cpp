#include <cmath>
#include <random>

#include "doctest.h"
#include "odered/antiderivative.hpp"
#include "odered/expr.hpp"
#include "odered/special.hpp"
#include "support/doctest_expr.hpp"
#include "support/random_expr.hpp"

using namespace odered;

namespace {

const std::vector<std::string> kX{"x"};
const std::vector<std::string> kY{"y"};

Expr px(const char* s) { return parse(s, kX); }

double central_difference(const Expr& e, double x, double h) {
  return (eval(e, "x", x + h) - eval(e, "x", x - h)) / (2.0 * h);
}

}  // namespace

TEST_CASE("parse builds the expected trees") {
  const Expr x = Expr::var("x");
  CHECK(px("x^2 + 1") == pow(x, 2.0) + Expr(1.0));
  CHECK(parse("1/y", kY) == Expr(1.0) / Expr::var("y"));
  CHECK(eval(px("exp(-2*x)*sin(x)"), "x", 0.0) == 0.0);
  CHECK(px("-x^2") == -pow(x, 2.0));
  CHECK(px("2^3^2") == pow(Expr(2.0), pow(Expr(3.0), Expr(2.0))));
  CHECK(px("x - 1 - 2") == (x - Expr(1.0)) - Expr(2.0));
  CHECK(px("x^-1") == pow(x, Expr(-1.0)));
  CHECK(eval(px("pi"), Env{}) == doctest::Approx(M_PI));
  CHECK(eval(px("1.5e-3 * 2E2"), Env{}) == doctest::Approx(0.3));
}

TEST_CASE("parse errors carry positions") {
  try {
    (void)px("x + * 2");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position() == 4);
  }
  CHECK_THROWS_AS((void)px("x + y"), ParseError);
  CHECK_THROWS_AS((void)px("foo(x)"), ParseError);
  CHECK_THROWS_AS((void)px("sin(x, x)"), ParseError);
  CHECK_THROWS_AS((void)px("(x + 1"), ParseError);
  CHECK_THROWS_AS((void)px(""), ParseError);
  try {
    (void)px("2*y");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position() == 2);
    CHECK(std::string(e.what()).find("'y'") != std::string::npos);
  }
}

TEST_CASE("eval examples and domain errors") {
  CHECK(eval(px("x^2+1"), "x", 2.0) == 5.0);
  CHECK(eval(px("exp(0)"), Env{}) == 1.0);
  CHECK_THROWS_AS((void)eval(px("ln(x)"), "x", -1.0), DomainError);
  CHECK_THROWS_AS((void)eval(px("1/x"), "x", 0.0), DomainError);
  CHECK_THROWS_AS((void)eval(px("sqrt(x)"), "x", -0.5), DomainError);
  CHECK_THROWS_AS((void)eval(px("x^0.5"), "x", -2.0), DomainError);
  CHECK(eval(px("x^3"), "x", -2.0) == -8.0);
  CHECK_THROWS_AS((void)eval(px("x + 1"), Env{}), DomainError);
  try {
    (void)eval(px("1 + ln(x - 3)"), "x", 1.0);
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("ln(x - 3)") != std::string::npos);
  }
}

TEST_CASE("differentiate examples") {
  CHECK(differentiate(parse("y^3", kY), "y") == parse("3*y^2", kY));
  CHECK(differentiate(px("exp(-2*x)"), "x") == px("-2*exp(-2*x)"));
  CHECK(differentiate(px("5"), "x").is_const(0.0));
  CHECK(differentiate(px("x"), "y").is_const(0.0));

  // Quotient-rule tree checked against central differences at 10 random points.
  const Expr g = parse("(0.3 - 1.2*y + 0.7*y^2 + 2*y^3)/(1 + 0.5*y)", kY);
  const Expr dg = differentiate(g, "y");
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> pt(-1.5, 1.5);
  for (int i = 0; i < 10; ++i) {
    const double y = pt(rng);
    const double h = 1e-6;
    const double fd = (eval(g, "y", y + h) - eval(g, "y", y - h)) / (2 * h);
    CHECK(eval(dg, "y", y) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("simplify examples") {
  const std::vector<std::string> xy{"x", "y"};
  CHECK(simplify(parse("0*x + 1*y", xy)) == Expr::var("y"));
  CHECK(simplify(px("x - x")).is_const(0.0));
  CHECK(simplify(px("2*3")).is_const(6.0));
  CHECK(simplify(px("exp(ln(x))")) == Expr::var("x"));
  CHECK(simplify(px("x^1 + 0")) == Expr::var("x"));
  CHECK(simplify(px("-(-x)")) == Expr::var("x"));
  // ln(-1) must not fold away
  CHECK(simplify(px("ln(-1) + x")).op() == Op::Add);
}

TEST_CASE("print then parse is structurally stable") {
  testing::ExprGen gen(2024);
  for (int i = 0; i < 500; ++i) {
    const Expr t0 = px(gen.any(4).str().c_str());
    const std::string text = t0.str();
    CAPTURE(text);
    CHECK(px(text.c_str()) == t0);
  }
}

TEST_CASE("simplify preserves value and is idempotent") {
  testing::ExprGen gen(99);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pt(0.5, 2.0);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    const Expr e = gen.any(4);
    const Expr s = simplify(e);
    CHECK(simplify(s) == s);
    for (int k = 0; k < 100; ++k) {
      const double x = pt(rng);
      double v = 0.0;
      try {
        v = eval(e, "x", x);
      } catch (const DomainError&) {
        continue;
      }
      const double w = eval(s, "x", x);
      CHECK(std::abs(v - w) <= 1e-12 * (1.0 + std::abs(v)));
      ++checked;
    }
  }
  CHECK(checked > 10000);
}

TEST_CASE("symbolic derivatives match central differences on random trees") {
  testing::ExprGen gen(7);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pt(0.5, 2.0);
  int pairs = 0;
  while (pairs < 300) {
    const Expr e = gen.any(3);
    const Expr d = differentiate(e, "x");
    const double x = pt(rng);
    const double h = 1e-6 * std::max(1.0, std::abs(x));
    double fd = 0.0, sym = 0.0, fx = 0.0;
    try {
      fx = eval(e, "x", x);
      fd = central_difference(e, x, h);
      sym = eval(d, "x", x);
    } catch (const DomainError&) {
      continue;
    }
    if (std::abs(fx) > 1e6) continue;
    ++pairs;
    CAPTURE(e.str());
    CHECK(std::abs(sym - fd) / std::max(1.0, std::abs(sym)) <= 1e-5);
  }
}

TEST_CASE("antiderive examples") {
  auto a = antiderive(px("1/x"), "x", 1.0);
  REQUIRE(a->closed_form().has_value());
  CHECK(*a->closed_form() == px("ln(x)"));
  CHECK(a->value(std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(a->value(1.0) == 0.0);

  auto b = antiderive(px("2/x"), "x", 1.0);
  CHECK(b->value(2.0) == doctest::Approx(1.3862943611198906).epsilon(1e-14));

  // exp(-t^2) has no rule; numeric mode. Frozen value from the composite
  // Gauss oracle below.
  auto g = antiderive(px("exp(-x^2)"), "x", 0.0);
  CHECK_FALSE(g->closed_form().has_value());
  CHECK(g->numeric());
  CHECK(std::abs(g->value(1.0) - 0.7468241328124270) <= 1e-12);
  CHECK(g->value(0.0) == 0.0);

  // Negative-side reciprocal uses ln(-x).
  auto r = antiderive(px("1/x"), "x", -1.0);
  REQUIRE(r->closed_form().has_value());
  CHECK(r->value(-2.0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("composite Gauss oracle for the exp(-t^2) integral") {
  // 5-point Gauss-Legendre on 200 panels, independent of the Simpson path.
  const double nodes[] = {0.0, 0.5384693101056831, -0.5384693101056831, 0.9061798459386640,
                          -0.9061798459386640};
  const double weights[] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                            0.2369268850561891, 0.2369268850561891};
  double sum = 0.0;
  const int panels = 200;
  for (int p = 0; p < panels; ++p) {
    const double a = static_cast<double>(p) / panels;
    const double b = static_cast<double>(p + 1) / panels;
    for (int i = 0; i < 5; ++i) {
      const double t = 0.5 * (a + b) + 0.5 * (b - a) * nodes[i];
      sum += 0.5 * (b - a) * weights[i] * std::exp(-t * t);
    }
  }
  CHECK(std::abs(sum - 0.7468241328124270) <= 1e-13);
}

TEST_CASE("numeric antiderivative caches and evaluates in either direction") {
  auto g = antiderive(px("exp(-x^2)"), "x", 0.0);
  const double forward = g->value(0.8);
  CHECK(g->value(0.8) == forward);
  CHECK(g->value(-0.8) == doctest::Approx(-forward).epsilon(1e-12));
  double prev = g->value(0.0);
  for (double t = 0.01; t <= 2.0; t += 0.01) {
    const double v = g->value(t);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("antiderivative of a singular integrand fails at value() time") {
  auto s = antiderive(px("1/(x^2 - 1)^2"), "x", 0.0);
  CHECK(s->numeric());
  CHECK_NOTHROW((void)s->value(0.5));
  CHECK_THROWS((void)s->value(1.5));
}

TEST_CASE("closed forms agree with quadrature and differentiate back") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  std::uniform_real_distribution<double> slope(0.2, 1.0);
  for (int i = 0; i < 60; ++i) {
    const Expr x = Expr::var("x");
    const Expr lin = Expr(slope(rng)) * x + Expr(c(rng));
    const Expr integrand = Expr(c(rng)) * pow(x, Expr(static_cast<double>(i % 4))) +
                           Expr(c(rng)) / (Expr(1.0) + Expr(0.3) * x) + exp(lin) * Expr(c(rng)) -
                           sin(lin) + Expr(c(rng)) * cos(lin) +
                           Expr(c(rng)) * pow(Expr(2.0) + lin, 2.5) + Expr(c(rng)) / x;
    CAPTURE(integrand);
    auto a = antiderive(integrand, "x", 1.0);
    REQUIRE(a->closed_form().has_value());
    const Expr back = differentiate(*a->closed_form(), "x");
    for (double t : {0.6, 1.3, 1.9, 2.7}) {
      const double exact = special::quad_adaptive(
          [&](double s) { return eval(integrand, "x", s); }, 1.0, t, 1e-13);
      CHECK(std::abs(a->value(t) - exact) <= 1e-10 * std::max(1.0, std::abs(exact)));
      const double f = eval(integrand, "x", t);
      CHECK(std::abs(eval(back, "x", t) - f) <= 1e-10 * std::max(1.0, std::abs(f)));
    }
  }
}
