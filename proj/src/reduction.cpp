#include "odered/reduction.hpp"

#include <cmath>
#include <sstream>

#include "odered/antiderivative.hpp"
#include "odered/functions.hpp"

namespace odered {

namespace {

/// Opaque named symbol used only to print reduced equations, e.g. K(y).
class Symbol : public Function {
 public:
  explicit Symbol(std::string name) : name_(std::move(name)) {}
  [[nodiscard]] std::string name() const override { return name_; }
  [[nodiscard]] double value(double) const override {
    throw DomainError(name_ + " is a display symbol");
  }
  [[nodiscard]] Expr derivative(const Expr&) const override {
    throw DomainError(name_ + " is a display symbol");
  }

 private:
  std::string name_;
};

Expr symbol(const std::string& name, const std::string& var) {
  return Expr::call(std::make_shared<Symbol>(name), Expr::var(var));
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(12);
  s << v;
  return s.str();
}

std::optional<double> try_eval(const Expr& e, const Env& env) {
  try {
    const double v = eval(e, env);
    if (std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

std::optional<double> try_eval(const Expr& e, const std::string& var, double at) {
  Env env;
  env.set(var, at);
  return try_eval(e, env);
}

/// Max relative violation of K' = keq(t, K) at points near t0 where K evaluates.
double k_residual(const Expr& K, const Expr& keq, const std::string& t, double t0, double span) {
  const Expr dK = differentiate(K, t);
  double worst = 0.0;
  int checked = 0;
  for (int i = -10; i <= 10; ++i) {
    const double at = t0 + span * i / 10.0;
    auto kv = try_eval(K, t, at);
    auto dv = try_eval(dK, t, at);
    if (!kv || !dv) continue;
    Env env;
    env.set(t, at);
    env.set("K", *kv);
    auto rv = try_eval(keq, env);
    if (!rv) continue;
    worst = std::max(worst, std::abs(*dv - *rv) / (1.0 + std::abs(*dv) + std::abs(*rv)));
    ++checked;
  }
  return checked >= 5 ? worst : INFINITY;
}

bool accept_closed(const Expr& K, const Expr& keq, const std::string& t, double t0, double K0,
                   double span) {
  auto v = try_eval(K, t, t0);
  if (!v || std::abs(*v - K0) > 1e-10 * (1.0 + std::abs(K0))) return false;
  return k_residual(K, keq, t, t0, span) <= 1e-8;
}

struct KSolution {
  Expr K;
  std::string method;
};

/// K' = keq(t, K), K(t0) = K0: closed-form routes first, numeric otherwise.
KSolution solve_k_equation(const Expr& keq, const FirstOrderForm& form, const std::string& t,
                           double t0, double K0, bool positive, const ReduceOptions& opt) {
  const double span = opt.interval_end ? std::max(0.05, std::abs(*opt.interval_end - t0)) : 0.5;
  if (opt.k_closed) {
    if (!accept_closed(*opt.k_closed, keq, t, t0, K0, 0.05))
      throw ReductionError("supplied closed form for K does not satisfy K(" + num(t0) +
                           ") = " + num(K0) + " and the K-equation");
    return {simplify(*opt.k_closed), "closed (supplied)"};
  }
  auto has = [&](FormTag tag) {
    return std::find(form.matches.begin(), form.matches.end(), tag) != form.matches.end();
  };
  const Anchor an{t0, K0};
  auto attempt = [&](const char* name, const std::function<Expr()>& make) -> std::optional<KSolution> {
    try {
      Expr K = make();
      if (accept_closed(K, keq, t, t0, K0, 0.05)) return KSolution{K, std::string("closed: ") + name};
    } catch (const std::exception&) {
    }
    return std::nullopt;
  };
  std::optional<KSolution> out;
  if (has(FormTag::EllipticIntegral)) {
    out = attempt("elliptic integral (Jacobi sn)", [&] {
      const Expr F = substitute(substitute(keq, t, Expr::var("u")), "K", Expr::var("v"));
      auto payload = elliptic_recognize(F);
      if (!payload) throw SolverError("no elliptic payload");
      return elliptic_solve(*payload, an, t);
    });
  }
  if (!out && has(FormTag::Linear))
    out = attempt("linear", [&] { return solve_linear(form.coeffs[1], form.coeffs[0], an, t); });
  if (!out && has(FormTag::Bernoulli)) {
    out = attempt("Bernoulli", [&] {
      return solve_bernoulli(form.coeffs[1], form.coeffs[static_cast<std::size_t>(form.bernoulli_n)],
                             form.bernoulli_n, an, t);
    });
  }
  if (!out && has(FormTag::Riccati) && opt.particular) {
    out = attempt("Riccati with particular solution", [&] {
      return solve_riccati_with_particular(form.coeffs[2], form.coeffs[1], form.coeffs[0],
                                           *opt.particular, an, t0 + span, t);
    });
  }
  if (out) return *out;
  auto ns = numeric_solution("K", keq, t, "K", t0, K0, opt.k_tol, positive);
  return {ns->at(Expr::var(t)), "numeric"};
}

void check_anchor(const ReducedODE& r) {
  Env env{{"x", r.ic.x0}, {"y", r.ic.y0}};
  auto v = try_eval(r.rhs, env);
  if (!v) throw ReductionError("reduced right-hand side is undefined at the initial point");
  if (std::abs(*v - r.ic.yp0) > 1e-10 * (1.0 + std::abs(r.ic.yp0)))
    throw ReductionError("reduced right-hand side gives y'(x0) = " + num(*v) + " instead of " +
                         num(r.ic.yp0));
}

Expr inverse_factor(const ClassDescriptor& d, const InitialCondition& ic) {
  return integrating_factor(d, {ic.x0, ic.y0});
}

/// e^{-int a}, anchored at the initial point.
Expr decay_factor(const ClassDescriptor& d, const InitialCondition& ic) {
  const std::string v = d.a_variable();
  return simplify(exp(-antiderive(d.a, v, v == "x" ? ic.x0 : ic.y0)->at(Expr::var(v))));
}

void require_finite_factor(const Expr& e, const char* var, double at) {
  if (!try_eval(e, var, at))
    throw ReductionError(std::string("integrating factor is undefined at ") + var + " = " + num(at));
}

ReducedODE reduce_additive(const ClassDescriptor& d, const InitialCondition& ic,
                           const ReduceOptions&) {
  ReducedODE r;
  r.tag = d.tag;
  r.ic = ic;
  r.k_var = "y";
  const Expr x = Expr::var("x"), y = Expr::var("y");
  const Expr eI = inverse_factor(d, ic);
  require_finite_factor(eI, d.a_variable(), d.tag == ClassTag::I ? ic.x0 : ic.y0);
  r.E = decay_factor(d, ic);
  const bool one = d.tag == ClassTag::I;
  r.H = antiderive(one ? simplify(d.F * eI) : d.F, "x", ic.x0)->at(x);
  r.K = antiderive(one ? d.G : simplify(d.G * eI), "y", ic.y0)->at(y);
  r.A = ic.yp0;
  r.K0 = 0.0;
  r.k_method = "quadrature";
  r.rhs = simplify((r.H + r.K + Expr(r.A)) * r.E);
  r.shape = simplify((symbol("H", "x") + symbol("K", "y") + Expr::var("A")) * r.E).str();
  check_anchor(r);
  return r;
}

ReducedODE reduce_power(const ClassDescriptor& d, const InitialCondition& ic,
                        const ReduceOptions& opt) {
  ReducedODE r;
  r.tag = d.tag;
  r.m = d.m;
  r.ic = ic;
  const bool three = d.tag == ClassTag::III;
  r.k_var = three ? "y" : "x";
  const Expr eI = inverse_factor(d, ic);
  require_finite_factor(eI, d.a_variable(), three ? ic.x0 : ic.y0);
  r.E = decay_factor(d, ic);
  const bool even = (d.m + 1) % 2 == 0;
  r.branch = even && ic.yp0 < 0.0 ? -1 : 1;
  const double s = r.branch;
  r.K0 = s * ic.yp0;
  r.A = r.K0;
  const Expr Kv = Expr::var("K");
  const Expr F = substitute(substitute(d.F2, "u", Expr::var(r.k_var)), "v", Expr(s) * Kv);
  // III: K^{m+1} K' = s^m F2;  IV: K^m K' = s^{m+1} F2.
  const double sign = std::pow(s, three ? d.m : d.m + 1);
  const double power = three ? d.m + 1 : d.m;
  r.k_equation = combine_var_powers(Expr(sign) * F, "K", -power);
  if (!try_eval(r.k_equation, Env{{r.k_var, three ? ic.y0 : ic.x0}, {"K", r.K0}}))
    throw ReductionError("K-equation is singular at the anchor (K0 = " + num(r.K0) + ")");
  const double t0 = three ? ic.y0 : ic.x0;
  ProbeBox box;
  const double kspan = std::max(0.25, 0.25 * std::abs(r.K0));
  box.t_lo = t0;
  box.t_hi = t0 + 0.5;
  box.y_lo = r.K0 - kspan;
  box.y_hi = r.K0 + kspan;
  if (even) box.y_lo = std::max(box.y_lo, 0.5 * r.K0);
  r.k_form = classify_first_order(r.k_equation, r.k_var, "K", box);
  ReduceOptions kopt = opt;
  if (three) kopt.interval_end.reset();  // K lives in y; the x interval says nothing
  const auto ks = solve_k_equation(r.k_equation, r.k_form, r.k_var, t0, r.K0, even, kopt);
  r.K = ks.K;
  r.k_method = ks.method;
  r.rhs = simplify(Expr(s) * r.K * r.E);
  r.shape = simplify(Expr(s) * symbol("K", r.k_var) * r.E).str();
  check_anchor(r);
  return r;
}

}  // namespace

std::string ReducedODE::summary() const {
  std::ostringstream s;
  s << "class " << to_string(tag);
  if (tag == ClassTag::III || tag == ClassTag::IV) s << ", m = " << m;
  s << "\ny' = " << shape << "\n";
  if (tag == ClassTag::I || tag == ClassTag::II) {
    s << "H(x) = " << H.str() << "\nK(y) = " << K.str() << "\nA = " << num(A) << "\n";
  } else {
    s << "K-equation: K'(" << k_var << ") = " << k_equation.str() << ", K(" << k_var
      << "0) = " << num(K0) << "\n";
    s << "form: " << to_string(k_form.tag) << "\n";
    s << "K(" << k_var << ") = " << K.str() << " [" << k_method << "]\n";
    if (branch < 0) s << "branch: y' = -K E\n";
  }
  s << "E = " << E.str() << "\ny' = " << rhs.str() << "\n";
  return s.str();
}

ReducedODE reduce_class1(const ClassDescriptor& d, const InitialCondition& ic,
                         const ReduceOptions& opt) {
  if (d.tag != ClassTag::I) throw ReductionError("descriptor is not class I");
  return reduce_additive(d, ic, opt);
}

ReducedODE reduce_class2(const ClassDescriptor& d, const InitialCondition& ic,
                         const ReduceOptions& opt) {
  if (d.tag != ClassTag::II) throw ReductionError("descriptor is not class II");
  return reduce_additive(d, ic, opt);
}

ReducedODE reduce_class3(const ClassDescriptor& d, const InitialCondition& ic,
                         const ReduceOptions& opt) {
  if (d.tag != ClassTag::III) throw ReductionError("descriptor is not class III");
  return reduce_power(d, ic, opt);
}

ReducedODE reduce_class4(const ClassDescriptor& d, const InitialCondition& ic,
                         const ReduceOptions& opt) {
  if (d.tag != ClassTag::IV) throw ReductionError("descriptor is not class IV");
  return reduce_power(d, ic, opt);
}

ReducedODE reduce(const ClassDescriptor& d, const InitialCondition& ic, const ReduceOptions& opt) {
  validate(d, ic);
  switch (d.tag) {
    case ClassTag::I:
      return reduce_class1(d, ic, opt);
    case ClassTag::II:
      return reduce_class2(d, ic, opt);
    case ClassTag::III:
      return reduce_class3(d, ic, opt);
    default:
      return reduce_class4(d, ic, opt);
  }
}

ImplicitSolution implicit_solution(const ReducedODE& r, const ReduceOptions& opt) {
  if (r.tag != ClassTag::III && r.tag != ClassTag::IV)
    throw ReductionError("implicit solutions are defined for classes III and IV");
  ImplicitSolution out;
  out.left_var = "y";
  out.right_var = "x";
  const double s = r.branch;
  if (opt.implicit) {
    out.left = opt.implicit->first;
    out.right = opt.implicit->second;
    auto l0 = try_eval(out.left, "y", r.ic.y0);
    auto r0 = try_eval(out.right, "x", r.ic.x0);
    if (!l0 || !r0) throw ReductionError("supplied implicit relation is undefined at the anchor");
    out.B = *l0 - *r0;
    // Along solutions L'(y) y' = R'(x).
    const Expr dl = differentiate(out.left, "y"), dr = differentiate(out.right, "x");
    int checked = 0;
    for (int i = 0; i <= 4; ++i)
      for (int j = -2; j <= 2; ++j) {
        const double x = r.ic.x0 + 0.02 * i, y = r.ic.y0 + 0.02 * j;
        Env env{{"x", x}, {"y", y}};
        auto a = try_eval(dl, env), b = try_eval(dr, env), f = try_eval(r.rhs, env);
        if (!a || !b || !f) continue;
        if (std::abs(*a * *f - *b) > 1e-8 * (1.0 + std::abs(*b)))
          throw ReductionError("supplied implicit relation is inconsistent with y' = " +
                               r.rhs.str());
        ++checked;
      }
    if (checked < 5) throw ReductionError("supplied implicit relation could not be checked");
    return out;
  }
  Expr left_f, right_f;
  if (r.tag == ClassTag::III) {
    // 1/K as a power when K already is one, so the rule table can see it.
    left_f = r.K.op() == Op::Pow && r.K.rhs().is_const()
                 ? simplify(Expr(s) * pow(r.K.lhs(), Expr(-r.K.rhs().value())))
                 : simplify(Expr(1.0) / (Expr(s) * r.K));
    right_f = r.E;
  } else {
    left_f = simplify(Expr(1.0) / r.E);
    right_f = simplify(Expr(s) * r.K);
  }
  if (!try_eval(left_f, "y", r.ic.y0))
    throw ReductionError("implicit-solution integrand vanishes or is undefined at y0");
  const auto L = antiderive(left_f, "y", r.ic.y0);
  const auto R = antiderive(right_f, "x", r.ic.x0);
  if (L->closed_form() && R->closed_form()) {
    out.left = *L->closed_form();
    out.right = *R->closed_form();
    out.B = eval(out.left, "y", r.ic.y0) - eval(out.right, "x", r.ic.x0);
  } else {
    out.left = L->at(Expr::var("y"));
    out.right = R->at(Expr::var("x"));
    out.B = 0.0;
  }
  return out;
}

}  // namespace odered
