#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "odered/integrator.hpp"
#include "odered/solvers.hpp"
#include "odered/special.hpp"
#include "support/doctest_expr.hpp"

using namespace odered;

namespace {

Expr pe(const char* s, std::vector<std::string> vars = {"x", "y"}) { return parse(s, vars); }

bool has(const FirstOrderForm& f, FormTag t) {
  return std::find(f.matches.begin(), f.matches.end(), t) != f.matches.end();
}

// Oracle: classical fixed-step RK4 with Richardson-checked step count.
double rk4(const std::function<double(double, double)>& f, double t0, double y0, double t1,
           int n) {
  const double h = (t1 - t0) / n;
  double t = t0, y = y0;
  for (int i = 0; i < n; ++i) {
    const double k1 = f(t, y), k2 = f(t + h / 2, y + h / 2 * k1), k3 = f(t + h / 2, y + h / 2 * k2),
                 k4 = f(t + h, y + h * k3);
    y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    t += h;
  }
  return y;
}

/// sup over 20 probes of |d/dt sol - rhs(t, sol)|, relative to the magnitudes.
double ode_residual(const Expr& sol, const Expr& rhs, const std::string& t, const std::string& y,
                    double a, double b) {
  const Expr d = differentiate(sol, t);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double at = a + (b - a) * i / 19.0;
    const double v = eval(sol, t, at);
    Env env;
    env.set(t, at);
    env.set(y, v);
    const double lhs = eval(d, t, at), r = eval(rhs, env);
    worst = std::max(worst, std::abs(lhs - r) / (1.0 + std::abs(lhs)));
  }
  return worst;
}

}  // namespace

TEST_CASE("classification of the worked forms") {
  const auto abel = classify_first_order(pe("(1 + 0.5*y - y^2 + 2*y^3)*exp(-x)"));
  CHECK(abel.tag == FormTag::Separable);
  CHECK(has(abel, FormTag::AbelKind1));

  const auto bern = classify_first_order(pe("x*y + sin(x)*y^3"));
  CHECK(bern.tag == FormTag::Bernoulli);
  CHECK(bern.bernoulli_n == 3);

  const auto ric = classify_first_order(pe("-2/x^2 + y^2"));
  CHECK(ric.tag == FormTag::Riccati);
  REQUIRE(ric.coeffs.size() == 3);
  CHECK(eval(ric.coeffs[0], "x", 2.0) == doctest::Approx(-0.5));

  const auto lin = classify_first_order(pe("x*y + 1"));
  CHECK(lin.tag == FormTag::Linear);

  const auto gen = classify_first_order(pe("sin(x*y)"));
  CHECK(gen.tag == FormTag::General);
}

TEST_CASE("classification of the reduced K-equations") {
  const std::vector<std::string> yk{"y", "K"};
  const auto kx10 = classify_first_order(parse("K^2/y^2 + 2*K/y", yk), "y", "K");
  CHECK(kx10.tag == FormTag::Bernoulli);
  CHECK(kx10.bernoulli_n == 2);
  CHECK(has(kx10, FormTag::Homogeneous));

  const auto abel2 = classify_first_order(parse("(K + 2*y)/K", yk), "y", "K");
  CHECK(abel2.tag == FormTag::AbelKind2);
  CHECK(has(abel2, FormTag::Homogeneous));
  REQUIRE(abel2.num.size() == 2);
  CHECK(eval(abel2.num[0], "y", 1.5) == doctest::Approx(3.0));
  CHECK(eval(abel2.g1, "y", 1.5) == doctest::Approx(1.0));
  CHECK(eval(abel2.g0, "y", 1.5) == doctest::Approx(0.0).scale(1.0));

  const auto sep = classify_first_order(parse("K + K^3", yk), "y", "K");
  CHECK(sep.tag == FormTag::Separable);
  CHECK(has(sep, FormTag::Bernoulli));

  const std::vector<std::string> xk{"x", "K"};
  const auto ell = classify_first_order(parse("sqrt((1 - K^2)*(1 - 0.25*K^2))", xk), "x", "K",
                                        {0.5, 1.5, -0.5, 0.5, 1});
  CHECK(has(ell, FormTag::EllipticIntegral));
}

TEST_CASE("payload reassembles to the rhs") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> U(0.5, 1.5);
  for (const char* s : {"(1 + y^3)*exp(-x)", "x*y + sin(x)*y^3", "-2/x^2 + y^2",
                        "x + y^2*x - y^3", "(x*y^2 + y + 1)/(x*y + 2)", "(y/x)^2 + 1"}) {
    const Expr rhs = pe(s);
    const auto f = classify_first_order(rhs);
    CAPTURE(s);
    const Expr back = f.reassemble();
    for (int i = 0; i < 10; ++i) {
      const double x = U(rng), y = U(rng);
      Env env{{"x", x}, {"y", y}};
      CHECK(eval(back, env) == doctest::Approx(eval(rhs, env)).epsilon(1e-12));
    }
  }
}

TEST_CASE("classification is stable under coefficient scaling") {
  for (const char* s : {"(1 + y^3)*exp(-x)", "x*y + sin(x)*y^3", "-2/x^2 + y^2", "x*y + 1",
                        "x + y^2*x - y^3", "(x*y^2 + y + 1)/(x*y + 2)", "(y/x)^2 + 1",
                        "sin(x*y)"}) {
    const Expr rhs = pe(s);
    const FormTag base = classify_first_order(rhs).tag;
    for (double c : {-3.0, 0.01, 250.0}) {
      CAPTURE(s);
      CAPTURE(c);
      CHECK(classify_first_order(Expr(c) * rhs).tag == base);
    }
  }
}

TEST_CASE("separable solutions") {
  auto s = solve_separable(Expr(1.0), Expr(1.0), {0.0, 2.0});
  CHECK(s.solve(3.0, -100.0, 100.0) == doctest::Approx(5.0));

  s = solve_separable(Expr(1.0), Expr::var("y"), {0.0, 1.0});
  CHECK(s.B == 0.0);
  CHECK(s.residual(0.7, std::exp(0.7)) == doctest::Approx(0.0).scale(1.0));
  CHECK(s.solve(0.5, 0.1, 10.0) == doctest::Approx(std::exp(0.5)).epsilon(1e-12));

  // Separable Abel form: y' = (A + b0 + b1 y + b2 y^2 + b3 y^3) e^{-int a}, a = 1.
  const Expr Y = pe("2 + y + y^3"), X = pe("exp(-(x - 1))");
  s = solve_separable(X, Y, {1.0, 0.5});
  const double y12 = s.solve(1.2, 0.5, 5.0);
  const double oracle = rk4(
      [](double x, double y) { return (2 + y + y * y * y) * std::exp(-(x - 1)); }, 1.0, 0.5, 1.2,
      4000);
  CHECK(y12 == doctest::Approx(oracle).epsilon(1e-10));

  CHECK_THROWS_AS(solve_separable(Expr(1.0), Expr::var("y"), {0.0, 0.0}), SolverError);
}

TEST_CASE("linear solutions") {
  const Expr y1 = solve_linear(Expr(0.0), Expr(1.0), {2.0, 5.0});
  CHECK(eval(y1, "x", 4.0) == doctest::Approx(7.0));
  const Expr y2 = solve_linear(Expr(1.0), Expr(0.0), {0.0, 1.0});
  CHECK(eval(y2, "x", 1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-13));

  // w' = -n (H + A) w - beta with H = x, A = 1, n = 2, beta = 3.
  const Expr p = pe("-2*(x + 1)"), q = Expr(-3.0);
  const Expr w = solve_linear(p, q, {0.0, 1.0});
  CHECK(ode_residual(w, p * Expr::var("y") + q, "x", "y", 0.0, 1.0) < 1e-9);
  const double oracle = rk4([](double x, double y) { return -2 * (x + 1) * y - 3; }, 0.0, 1.0, 1.0,
                            4000);
  CHECK(eval(w, "x", 1.0) == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("bernoulli K' = K + K^3") {
  const Expr K = solve_bernoulli(Expr(1.0), Expr(1.0), 3, {0.0, 1.0}, "y");
  const double frozen = 1.2524863968713549;  // RK4 oracle below, 1e-12
  const double oracle =
      rk4([](double, double k) { return k + k * k * k; }, 0.0, 1.0, 0.1, 20000);
  CHECK(oracle == doctest::Approx(frozen).epsilon(1e-11));
  CHECK(eval(K, "y", 0.1) == doctest::Approx(frozen).epsilon(1e-12));
  CHECK(eval(K, "y", 0.2) ==
        doctest::Approx(1.0 / std::sqrt(2 * std::exp(-0.4) - 1)).epsilon(1e-13));
  CHECK(ode_residual(K, pe("K + K^3", {"y", "K"}), "y", "K", 0.0, 0.3) < 1e-9);
  try {
    (void)solve_bernoulli(Expr(1.0), Expr(1.0), 3, {0.0, 1.0}, "y", 0.5);
    FAIL("expected blow-up");
  } catch (const SolverError& e) {
    REQUIRE(e.location());
    CHECK(*e.location() == doctest::Approx(std::log(2.0) / 2).epsilon(1e-10));
  }
  CHECK_NOTHROW((void)solve_bernoulli(Expr(1.0), Expr(1.0), 3, {0.0, 1.0}, "y", 0.3));
}

TEST_CASE("bernoulli degenerate cases") {
  const Expr y = solve_bernoulli(Expr(1.0), Expr(0.0), 2, {0.0, 2.0});
  CHECK(eval(y, "x", 1.0) == doctest::Approx(2 * std::exp(1.0)).epsilon(1e-13));
  CHECK_THROWS_AS((void)solve_bernoulli(Expr(1.0), Expr(1.0), 2, {0.0, 0.0}), SolverError);
  // Negative initial value stays on its branch.
  const Expr n = solve_bernoulli(Expr(1.0), Expr(1.0), 3, {0.0, -1.0}, "y");
  CHECK(eval(n, "y", 0.1) == doctest::Approx(-1.2524863968713549).epsilon(1e-12));
  // K' = K^2/y^2 + 2K/y from K(1) = 1/2 gives y^2/(3 - y).
  const Expr kx = solve_bernoulli(pe("2/y", {"y"}), pe("1/y^2", {"y"}), 2, {1.0, 0.5}, "y");
  for (double yv : {1.0, 1.5, 2.5}) CHECK(eval(kx, "y", yv) == doctest::Approx(yv * yv / (3 - yv)));
}

TEST_CASE("riccati with a particular solution") {
  // K' = -2/x^2 + K^2, particular lambda/x with lambda^2 + lambda - 2 = 0.
  const Expr f(1.0), g(0.0), h = pe("-2/x^2");
  for (double lam : {1.0, -2.0}) {
    const Expr yp = Expr(lam) / Expr::var("x");
    CHECK_NOTHROW((void)solve_riccati_with_particular(f, g, h, yp, {1.0, lam}, 2.0));
  }
  const Expr K = solve_riccati_with_particular(f, g, h, pe("1/x"), {1.0, 0.25}, 2.0);
  for (double x : {1.0, 1.3, 2.0})
    CHECK(eval(K, "x", x) == doctest::Approx(1 / x - x * x / (x * x * x / 3 + 1)).epsilon(1e-12));
  CHECK(ode_residual(K, pe("-2/x^2 + y^2"), "x", "y", 1.0, 2.0) < 1e-9);

  const Expr on = solve_riccati_with_particular(f, g, h, pe("1/x"), {1.0, 1.0}, 2.0);
  CHECK(on == pe("1/x"));
  CHECK_THROWS_AS((void)solve_riccati_with_particular(f, g, h, pe("2/x"), {1.0, 0.0}, 2.0),
                  SolverError);
}

TEST_CASE("cubic chain: first map, shift and round trip") {
  const Expr one(1.0), zero(0.0);
  const auto c = abel2_cubic_to_canonical(one, zero, zero, one, one, zero, 1.0, 1.0, 1.2);
  REQUIRE(c.steps.size() == 4);
  CHECK(eval(c.sigma, "x", 1.1) == 0.0);
  // g0 = 0, g1 = 1 and no shift: w = u = 1/y.
  CHECK(c.forward(1.0, 2.0).second == doctest::Approx(0.5));
  for (double t : {1.0, 1.05, 1.17})
    for (double y : {0.7, 1.4}) {
      const auto [s, w] = c.forward(t, y);
      const auto [t2, y2] = c.inverse(s, w);
      CHECK(t2 == doctest::Approx(t).epsilon(1e-12));
      CHECK(y2 == doctest::Approx(y).epsilon(1e-12));
    }
  CHECK_THROWS_AS(abel2_cubic_to_canonical(one, zero, zero, zero, one, zero, 1.0, 1.0, 1.2),
                  SolverError);
}

namespace {

void round_trip(const CanonicalChain& c, const std::function<double(double, double)>& orig,
                double y0) {
  const double t0 = c.t0, t1 = c.t_hi;
  const auto [s0, w0] = c.forward(t0, y0);
  CHECK(s0 == doctest::Approx(0.0).scale(1.0));
  const double s1 = c.forward(t1, 1.0).first;
  OdeOptions opt;
  opt.rtol = opt.atol = 1e-11;
  const auto sg = uniform_grid(s0, s1, 21);
  OdeRhs canon = [&](double s, const double* w, double* dw) { dw[0] = c.canonical_rhs(s, w[0]); };
  const auto ws = integrate_on_grid(canon, {w0}, sg, opt);
  std::vector<double> tg, yb;
  for (std::size_t j = 0; j < sg.size(); ++j) {
    const auto [t, y] = c.inverse(sg[j], ws[j][0]);
    tg.push_back(t);
    yb.push_back(y);
  }
  OdeRhs f = [&](double t, const double* y, double* dy) { dy[0] = orig(t, y[0]); };
  const auto ys = integrate_on_grid(f, {y0}, tg, opt);
  double dev = 0.0;
  for (std::size_t j = 0; j < tg.size(); ++j) dev = std::max(dev, std::abs(ys[j][0] - yb[j]));
  CHECK(dev <= 1e-6);
  CHECK(tg.back() == doctest::Approx(t1).epsilon(1e-10));
}

}  // namespace

TEST_CASE("cubic chain round trip, constant coefficients") {
  const Expr one(1.0), zero(0.0);
  const auto c = abel2_cubic_to_canonical(one, zero, zero, one, one, zero, 1.0, 1.0, 1.2);
  round_trip(c, [](double, double y) { return (y * y * y + 1) / y; }, 1.0);
}

TEST_CASE("cubic chain round trip, variable coefficients") {
  const Expr one(1.0), zero(0.0), x = Expr::var("x");
  const auto c = abel2_cubic_to_canonical(one, x, zero, one, one, x, 0.0, 0.0, 0.3);
  CHECK(eval(c.sigma, "x", 0.1) != 0.0);
  round_trip(c, [](double t, double y) { return (y * y * y + t * y * y + 1) / (y + t); }, 1.0);
}

TEST_CASE("quadratic chain on the canonical K K' = K + 2y") {
  const Expr one(1.0), zero(0.0), y = Expr::var("y");
  const auto c = abel2_quadratic_to_canonical(zero, one, Expr(2.0) * y, one, zero, 0.0, 0.0, 1.0,
                                              "y");
  CHECK(eval(c.E, "y", 0.4) == doctest::Approx(1.0));
  CHECK(eval(c.S, "y", 0.4) == doctest::Approx(0.4));
  CHECK(c.k(0.5) == doctest::Approx(1.0));
  const auto [s, w] = c.forward(0.3, 1.7);
  CHECK(s == doctest::Approx(0.3));
  CHECK(w == doctest::Approx(1.7));
  round_trip(c, [](double t, double k) { return (k + 2 * t) / k; }, 1.0);
  // Particular solutions K = 2y and K = -y.
  for (double t : {0.2, 0.9}) {
    CHECK(c.canonical_rhs(t, 2 * t) == doctest::Approx(2.0));
    CHECK(c.canonical_rhs(t, -t) == doctest::Approx(-1.0));
  }
}

TEST_CASE("quadratic chain with variable coefficients round trips") {
  const Expr x = Expr::var("x");
  const auto c = abel2_quadratic_to_canonical(Expr(0.5), x + Expr(1.0), Expr(1.0), Expr(2.0),
                                              x, 0.0, 0.0, 0.5);
  round_trip(c,
             [](double t, double y) { return (0.5 * y * y + (t + 1) * y + 1) / (2 * y + t); },
             1.0);
}

TEST_CASE("invariant of K K' = K + 2y is conserved") {
  OdeRhs f = [](double t, const double* k, double* dk) { dk[0] = (k[0] + 2 * t) / k[0]; };
  OdeOptions opt;
  opt.rtol = opt.atol = 1e-12;
  const auto grid = uniform_grid(0.0, 1.0, 51);
  const auto ks = integrate_on_grid(f, {1.0}, grid, opt);
  auto inv = [](double t, double k) { return (k - 2 * t) * (k - 2 * t) * (k + t); };
  const double i0 = inv(0.0, 1.0);
  double drift = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    drift = std::max(drift, std::abs(inv(grid[i], ks[i][0]) - i0) / std::abs(i0));
  CHECK(drift <= 1e-8);
}

TEST_CASE("homogeneous case 1 recovers y w' = w^2 + w") {
  const Expr r = Expr::var("r");
  const auto h = homogeneous_reduce(r * r + Expr(2.0) * r, 1, 0, 0, 0, 1, 0);
  CHECK(h.case_id == 1);
  CHECK(h.y_shift == 0.0);
  CHECK(h.k_shift == 0.0);
  Env env{{"u", 2.0}, {"w", 3.0}};
  CHECK(eval(h.separable_rhs, env) == doctest::Approx(6.0));
  // K = y^2/(A - y) solves K' = (K/y)^2 + 2 K/y.
  const Expr K = pe("y^2/(3 - y)", {"y"});
  const Expr rhs = pe("(K/y)^2 + 2*K/y", {"y", "K"});
  CHECK(ode_residual(K, rhs, "y", "K", 1.0, 2.0) < 1e-12);
  const auto [u, w] = h.forward(1.5, 0.4);
  const auto [y, k] = h.inverse(u, w);
  CHECK(y == doctest::Approx(1.5));
  CHECK(k == doctest::Approx(0.4));
}

TEST_CASE("homogeneous case 1 with shifts") {
  const Expr r = Expr::var("r");
  const auto h = homogeneous_reduce(r, 1, 2, 3, 2, -1, 1);
  CHECK(h.case_id == 1);
  // The shift is where both linear forms vanish.
  CHECK(2 * h.y_shift - h.k_shift + 1 == doctest::Approx(0.0).scale(1.0));
  CHECK(h.y_shift + 2 * h.k_shift + 3 == doctest::Approx(0.0).scale(1.0));
}

namespace {

void homogeneous_round_trip(const HomogeneousReduction& h,
                            const std::function<double(double, double)>& orig) {
  OdeOptions opt;
  opt.rtol = opt.atol = 1e-11;
  const auto grid = uniform_grid(0.0, 1.0, 21);
  OdeRhs f = [&](double y, const double* k, double* dk) { dk[0] = orig(y, k[0]); };
  const auto ks = integrate_on_grid(f, {1.0}, grid, opt);
  OdeRhs g = [&](double y, const double* v, double* dv) {
    Env env;
    env.set(h.indep, y);
    env.set(h.dep, v[0]);
    dv[0] = eval(h.separable_rhs, env);
  };
  const auto vs = integrate_on_grid(g, {h.forward(0.0, 1.0).second}, grid, opt);
  double dev = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    dev = std::max(dev, std::abs(h.inverse(grid[i], vs[i][0]).second - ks[i][0]));
  CHECK(dev <= 1e-6);
}

}  // namespace

TEST_CASE("homogeneous case 2 round trip") {
  const auto h = homogeneous_reduce(Expr::var("r"), 2, 2, 3, 1, 1, 1);
  CHECK(h.case_id == 2);
  homogeneous_round_trip(h, [](double y, double k) { return (y + k + 1) / (2 * y + 2 * k + 3); });
}

TEST_CASE("homogeneous case 3 round trip") {
  const auto h = homogeneous_reduce(Expr::var("r"), 1, 1, 2, 0, 0, 1);
  CHECK(h.case_id == 3);
  homogeneous_round_trip(h, [](double y, double k) { return 1.0 / (y + k + 2); });
}

TEST_CASE("homogeneous without K is rejected") {
  CHECK_THROWS_AS(homogeneous_reduce(Expr::var("r"), 1, 0, 0, 2, 0, 1), SolverError);
}

TEST_CASE("elliptic recognition and Jacobi inversion") {
  const std::vector<std::string> uv{"u", "v"};
  const auto e = elliptic_recognize(parse("sqrt((1 - v^2)*(1 - 0.25*v^2))", uv));
  REQUIRE(e);
  REQUIRE(e->modulus);
  CHECK(*e->modulus == doctest::Approx(0.5));
  CHECK(e->P.size() == 5);

  double A = -1.0;
  const Expr K = elliptic_solve(*e, {0.0, 0.3}, "x", &A);
  CHECK(A == doctest::Approx(special::elliptic_f(std::asin(0.3), 0.5)));
  CHECK(eval(K, "x", 0.0) == doctest::Approx(0.3).epsilon(1e-14));
  for (double x : {0.2, 0.8}) {
    const double k = eval(K, "x", x), dk = eval(differentiate(K, "x"), "x", x);
    CHECK(dk == doctest::Approx(std::sqrt((1 - k * k) * (1 - 0.25 * k * k))).epsilon(1e-12));
  }
  const Expr K0 = elliptic_solve(*e, {0.0, 0.0}, "x");
  CHECK(eval(K0, "x", 1.0) == doctest::Approx(special::jacobi(1.0, 0.5).sn));

  CHECK_FALSE(elliptic_recognize(parse("sqrt(1 - v^2)", uv)));
  const auto cubic = elliptic_recognize(parse("u*sqrt(1 - v^3)", uv));
  REQUIRE(cubic);
  CHECK(cubic->P.size() == 4);
  CHECK_THROWS_AS((void)elliptic_solve(*cubic, {0.0, 0.1}, "x"), SolverError);
}

TEST_CASE("evaluable range stops at the domain edge") {
  const auto [lo, hi] = evaluable_range(pe("sqrt(1 - x)"), "x", 0.0, -1.0, 2.0);
  CHECK(lo == -1.0);
  CHECK(hi == doctest::Approx(1.0).epsilon(1e-9));
}
