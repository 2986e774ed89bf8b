#include "odered/generator.hpp"

#include <cmath>
#include <sstream>

#include "odered/antiderivative.hpp"
#include "odered/integrator.hpp"
#include "odered/solvers.hpp"
#include "odered/verify.hpp"

namespace odered {

namespace {

std::string lit(double v) {
  const std::string s = format_number(v);
  return v < 0 ? "(" + s + ")" : s;
}

constexpr int kMaxDraws = 500;

}  // namespace

double ProblemGenerator::uniform(double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng_);
}

double ProblemGenerator::coefficient() { return std::round(uniform(-2.0, 2.0) * 100.0) / 100.0; }

std::string ProblemGenerator::polynomial(const std::string& var, int max_degree) {
  const int deg = std::uniform_int_distribution<int>(0, max_degree)(rng_);
  std::string s = lit(coefficient());
  for (int k = 1; k <= deg; ++k) {
    s += " + " + lit(coefficient()) + "*" + var;
    if (k > 1) s += "^" + std::to_string(k);
  }
  return s;
}

std::string ProblemGenerator::component(const std::string& var) {
  const int kind = std::uniform_int_distribution<int>(0, 2)(rng_);
  if (kind == 0) return polynomial(var, 3);
  const double c = std::round(uniform(-1.0, 1.0) * 100.0) / 100.0;
  if (kind == 1) return lit(c) + "/" + var;
  const double e = std::round(uniform(-1.0, 1.0) * 100.0) / 100.0;
  return lit(c) + "*exp(" + lit(e) + "*" + var + ")";
}

bool ProblemGenerator::admissible(const GeneratedProblem& p) {
  try {
    validate(p.d, p.ic);
    const bool power = p.d.tag == ClassTag::III || p.d.tag == ClassTag::IV;
    const auto t = integrate_second_order(p.d, p.ic, p.x1, 1e-8, 21);
    for (std::size_t i = 0; i < t.x.size(); ++i) {
      if (!(t.y[i] >= 0.5 && t.y[i] <= 10.0)) return false;
      if (!(std::abs(t.yp[i]) <= 50.0)) return false;
      if (power && !(std::abs(t.yp[i]) >= 0.1)) return false;
    }
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

GeneratedProblem ProblemGenerator::descriptor(ClassTag tag) {
  const std::vector<std::string> xs{"x"}, ys{"y"}, uv{"u", "v"};
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    GeneratedProblem p;
    p.d.tag = tag;
    const bool a_in_x = tag == ClassTag::I || tag == ClassTag::III;
    const std::string a = component(a_in_x ? "x" : "y");
    p.d.a = parse(a, a_in_x ? xs : ys);
    std::ostringstream text;
    text << "class " << to_string(tag) << " a = " << a;
    if (tag == ClassTag::I || tag == ClassTag::II) {
      const std::string F = component("x"), G = component("y");
      p.d.F = parse(F, xs);
      p.d.G = parse(G, ys);
      text << ", F = " << F << ", G = " << G;
    } else {
      p.d.m = std::uniform_int_distribution<int>(0, 2)(rng_);
      const std::string phi = component("u"), psi = polynomial("u", 1);
      std::string F2 = "v^" + std::to_string(p.d.m + 1) + "*(" + phi + " + (" + psi + ")*v";
      if (std::uniform_int_distribution<int>(0, 1)(rng_) == 1)
        F2 += " + " + lit(std::round(uniform(-1.0, 1.0) * 100.0) / 100.0) + "*v^2";
      F2 += ")";
      p.d.F2 = parse(F2, uv);
      text << ", m = " << p.d.m << ", F2 = " << F2;
    }
    p.ic.x0 = 1.0;
    p.ic.y0 = std::round(uniform(1.0, 2.0) * 100.0) / 100.0;
    double yp = std::round(uniform(-1.0, 1.0) * 100.0) / 100.0;
    if (tag != ClassTag::I && tag != ClassTag::II && std::abs(yp) < 0.2) yp = yp < 0 ? -0.5 : 0.5;
    p.ic.yp0 = yp;
    p.x1 = 2.0;
    text << ", ic = (" << p.ic.x0 << ", " << p.ic.y0 << ", " << p.ic.yp0 << ")";
    p.text = text.str();
    if (admissible(p)) return p;
  }
  throw std::runtime_error("generator could not find an admissible descriptor");
}

EquivalentPair ProblemGenerator::equivalent_pair(ClassTag first) {
  const std::vector<std::string> xs{"x"}, ys{"y"}, uv{"u", "v"};
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    EquivalentPair rp;
    InitialCondition ic{1.0, std::round(uniform(1.0, 2.0) * 100.0) / 100.0,
                        std::round(uniform(-1.0, 1.0) * 100.0) / 100.0};
    if (first == ClassTag::I) {
      // y'' + a y' = C e^{-2 int a} + y' G(y) e^{-int a}  ==  class III, F2 = C + v G(u).
      const std::string a = polynomial("x", 2), G = polynomial("y", 2);
      const double C = coefficient();
      rp.first.d.tag = ClassTag::I;
      rp.first.d.a = parse(a, xs);
      const Expr I = antiderive(rp.first.d.a, "x", ic.x0)->at(Expr::var("x"));
      rp.first.d.F = simplify(Expr(C) * exp(Expr(-2.0) * I));
      rp.first.d.G = parse(G, ys);
      rp.second.d.tag = ClassTag::III;
      rp.second.d.a = rp.first.d.a;
      rp.second.d.F2 = parse(lit(C) + " + v*(" + substitute(parse(G, ys), "y", Expr::var("u")).str() + ")", uv);
      rp.first.text = "class I a = " + a + ", F = " + rp.first.d.F.str() + ", G = " + G;
    } else {
      // y'' + a(y) y'^2 = F(x) e^{-int a dy} + g y'  ==  class IV, F2 = F(u) + g v.
      const std::string a = polynomial("y", 1), F = component("x");
      const double g = coefficient();
      rp.first.d.tag = ClassTag::II;
      rp.first.d.a = parse(a, ys);
      rp.first.d.F = parse(F, xs);
      rp.first.d.G = Expr(g);
      rp.second.d.tag = ClassTag::IV;
      rp.second.d.a = rp.first.d.a;
      rp.second.d.F2 = parse(substitute(parse(F, xs), "x", Expr::var("u")).str() + " + " + lit(g) + "*v", uv);
      rp.first.text = "class II a = " + a + ", F = " + F + ", G = " + format_number(g);
    }
    rp.second.text = "class " + to_string(rp.second.d.tag) + " a = " + rp.second.d.a.str() +
                     ", F2 = " + rp.second.d.F2.str();
    rp.first.ic = rp.second.ic = ic;
    rp.first.x1 = rp.second.x1 = 2.0;
    // The class III/IV partner is reduced in the second route, so it also needs
    // y' bounded away from zero.
    if (admissible(rp.first) && admissible(rp.second)) return rp;
  }
  throw std::runtime_error("generator could not find an admissible equivalent pair");
}

AbelInstance ProblemGenerator::abel(bool cubic) {
  const std::vector<std::string> xs{"x"};
  auto lin = [&](double lo, double hi) {
    const double c = std::round(uniform(lo, hi) * 100.0) / 100.0;
    const double d = std::round(uniform(-0.5, 0.5) * 100.0) / 100.0;
    return lit(c) + " + " + lit(d) + "*x";
  };
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    AbelInstance a;
    a.cubic = cubic;
    a.t0 = 0.0;
    a.t1 = 0.5;
    a.y0 = std::round(uniform(0.8, 1.5) * 100.0) / 100.0;
    const std::string f3 = cubic ? lin(0.5, 1.5) : "0", f2 = lin(-1.0, 1.0), f1 = lin(-1.0, 1.0),
                      f0 = lin(-1.0, 1.0), g1 = lin(0.8, 1.5), g0 = lin(-0.3, 0.3);
    a.f3 = parse(f3, xs);
    a.f2 = parse(f2, xs);
    a.f1 = parse(f1, xs);
    a.f0 = parse(f0, xs);
    a.g1 = parse(g1, xs);
    a.g0 = parse(g0, xs);
    std::ostringstream text;
    text << "y' = ((" << f3 << ")y^3 + (" << f2 << ")y^2 + (" << f1 << ")y + " << f0 << ")/(("
         << g1 << ")y + " << g0 << "), y(0) = " << a.y0;
    a.text = text.str();
    try {
      if (cubic)
        (void)abel2_cubic_to_canonical(a.f3, a.f2, a.f1, a.f0, a.g1, a.g0, a.t0, a.t0, a.t1);
      else
        (void)abel2_quadratic_to_canonical(a.f2, a.f1, a.f0, a.g1, a.g0, a.t0, a.t0, a.t1);
      const Expr num = a.f3 * pow(Expr::var("y"), 3.0) + a.f2 * pow(Expr::var("y"), 2.0) +
                       a.f1 * Expr::var("y") + a.f0;
      const Expr den = a.g1 * Expr::var("y") + a.g0;
      OdeRhs f = [num, den](double x, const double* y, double* dy) {
        Env env{{"x", x}, {"y", y[0]}};
        const double g = eval(den, env);
        if (std::abs(g) < 0.2) throw DomainError("denominator too small");
        dy[0] = eval(num, env) / g;
      };
      OdeOptions opt;
      opt.max_abs = 10.0;
      (void)integrate_on_grid(f, {a.y0}, uniform_grid(a.t0, a.t1, 11), opt);
      return a;
    } catch (const std::exception&) {
    }
  }
  throw std::runtime_error("generator could not find an admissible Abel instance");
}

}  // namespace odered
