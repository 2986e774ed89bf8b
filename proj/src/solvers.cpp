#include "odered/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "odered/antiderivative.hpp"
#include "odered/functions.hpp"
#include "odered/special.hpp"

namespace odered {

namespace {

constexpr double kStructTol = 1e-9;

struct Probes {
  std::vector<double> t;
  std::vector<double> y;
};

Probes make_probes(const ProbeBox& box, int n) {
  std::mt19937_64 rng(box.seed);
  std::uniform_real_distribution<double> ut(box.t_lo, box.t_hi);
  std::uniform_real_distribution<double> uy(box.y_lo, box.y_hi);
  Probes p;
  for (int i = 0; i < n; ++i) {
    p.t.push_back(ut(rng));
    p.y.push_back(uy(rng));
  }
  return p;
}

std::optional<double> try_eval(const Expr& e, const std::string& v1, double x1,
                               const std::string& v2 = "", double x2 = 0.0) {
  Env env;
  env.set(v1, x1);
  if (!v2.empty()) env.set(v2, x2);
  try {
    const double r = eval(e, env);
    if (!std::isfinite(r)) return std::nullopt;
    return r;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

/// Coefficient functions of indep that vanish at every probe.
bool vanishes(const Expr& c, const std::string& indep, const Probes& pr, double scale) {
  const Expr s = simplify(c);
  if (s.is_const()) return std::abs(s.value()) <= 1e-14 * (1.0 + scale);
  int seen = 0;
  for (double t : pr.t) {
    auto v = try_eval(s, indep, t);
    if (!v) return false;
    if (std::abs(*v) > 1e-11 * (1.0 + scale)) return false;
    ++seen;
  }
  return seen > 0;
}

/// rhs = sum c_k dep^k with k <= max_deg, confirmed at the probes.
std::optional<std::vector<Expr>> poly_coeffs(const Expr& e, const std::string& indep,
                                             const std::string& dep, const Probes& pr,
                                             int max_deg = 3) {
  if (!depends_on(e, dep)) return std::vector<Expr>{e};
  std::vector<Expr> c;
  Expr d = e;
  double fact = 1.0;
  for (int k = 0; k <= max_deg; ++k) {
    if (k > 0) {
      d = differentiate(d, dep);
      fact *= k;
    }
    c.push_back(simplify(substitute(d, dep, Expr(0.0)) / Expr(fact)));
  }
  int checked = 0;
  double scale = 0.0;
  for (std::size_t i = 0; i < pr.t.size(); ++i) {
    auto v = try_eval(e, indep, pr.t[i], dep, pr.y[i]);
    if (!v) continue;
    double sum = 0.0, mag = std::abs(*v);
    for (int k = 0; k <= max_deg; ++k) {
      auto ck = try_eval(c[static_cast<std::size_t>(k)], indep, pr.t[i]);
      if (!ck) return std::nullopt;
      const double term = *ck * std::pow(pr.y[i], k);
      sum += term;
      mag += std::abs(term);
    }
    if (std::abs(sum - *v) > kStructTol * (1.0 + mag)) return std::nullopt;
    scale = std::max(scale, mag);
    ++checked;
  }
  if (checked < 3) return std::nullopt;
  while (c.size() > 1 && vanishes(c.back(), indep, pr, scale)) c.pop_back();
  for (auto& ck : c)
    if (vanishes(ck, indep, pr, scale)) ck = Expr(0.0);
  return c;
}

struct Factor {
  Expr e;
  int power;  // +1 numerator, -1 denominator
};

void collect_factors(const Expr& e, int power, std::vector<Factor>& out, double& constant) {
  switch (e.op()) {
    case Op::Mul:
      collect_factors(e.lhs(), power, out, constant);
      collect_factors(e.rhs(), power, out, constant);
      return;
    case Op::Div:
      collect_factors(e.lhs(), power, out, constant);
      collect_factors(e.rhs(), -power, out, constant);
      return;
    case Op::Neg:
      constant = -constant;
      collect_factors(e.arg(), power, out, constant);
      return;
    case Op::Const:
      constant = power > 0 ? constant * e.value() : constant / e.value();
      return;
    default:
      out.push_back({e, power});
  }
}

Expr rebuild(const std::vector<Factor>& fs, double constant = 1.0) {
  Expr numer = Expr(constant), denom = Expr(1.0);
  for (const auto& f : fs) (f.power > 0 ? numer : denom) = (f.power > 0 ? numer : denom) * f.e;
  return simplify(numer / denom);
}

std::optional<std::pair<Expr, Expr>> symbolic_split(const Expr& rhs, const std::string& indep,
                                                    const std::string& dep) {
  std::vector<Factor> fs;
  double constant = 1.0;
  collect_factors(rhs, 1, fs, constant);
  std::vector<Factor> xs, ys;
  for (const auto& f : fs) {
    const bool di = depends_on(f.e, indep), dd = depends_on(f.e, dep);
    if (di && dd) return std::nullopt;
    (dd ? ys : xs).push_back(f);
  }
  return std::make_pair(rebuild(xs, constant), rebuild(ys));
}

std::optional<std::pair<Expr, Expr>> separable_split(const Expr& rhs, const std::string& indep,
                                                     const std::string& dep, const Probes& pr) {
  if (auto s = symbolic_split(rhs, indep, dep)) return s;
  // Numeric test R(t1,y1) R(t2,y2) = R(t1,y2) R(t2,y1).
  int checked = 0;
  for (std::size_t i = 0; i + 1 < pr.t.size(); i += 2) {
    const double t1 = pr.t[i], t2 = pr.t[i + 1], y1 = pr.y[i], y2 = pr.y[i + 1];
    auto r11 = try_eval(rhs, indep, t1, dep, y1), r22 = try_eval(rhs, indep, t2, dep, y2);
    auto r12 = try_eval(rhs, indep, t1, dep, y2), r21 = try_eval(rhs, indep, t2, dep, y1);
    if (!r11 || !r22 || !r12 || !r21) continue;
    const double lhs = *r11 * *r22, rhs2 = *r12 * *r21;
    if (std::abs(lhs - rhs2) > kStructTol * (1e-300 + std::abs(lhs) + std::abs(rhs2))) return std::nullopt;
    ++checked;
  }
  if (checked < 3) return std::nullopt;
  for (std::size_t i = 0; i < pr.t.size(); ++i) {
    auto r = try_eval(rhs, indep, pr.t[i], dep, pr.y[i]);
    if (!r || std::abs(*r) < 1e-6) continue;
    const Expr X = simplify(substitute(rhs, dep, Expr(pr.y[i])) / Expr(*r));
    const Expr Y = simplify(substitute(rhs, indep, Expr(pr.t[i])));
    return std::make_pair(X, Y);
  }
  return std::nullopt;
}

bool is_homogeneous(const Expr& rhs, const std::string& indep, const std::string& dep,
                    const Probes& pr) {
  if (!depends_on(rhs, indep) || !depends_on(rhs, dep)) return false;
  std::mt19937_64 rng(pr.t.size() * 7919);
  std::uniform_real_distribution<double> lam(0.6, 1.6);
  int checked = 0;
  for (std::size_t i = 0; i < pr.t.size(); ++i) {
    const double l = lam(rng);
    auto a = try_eval(rhs, indep, pr.t[i], dep, pr.y[i]);
    auto b = try_eval(rhs, indep, l * pr.t[i], dep, l * pr.y[i]);
    if (!a || !b) continue;
    if (std::abs(*a - *b) > kStructTol * (1.0 + std::abs(*a))) return false;
    ++checked;
  }
  return checked >= 3;
}

std::optional<std::pair<Expr, Expr>> split_fraction(const Expr& e, const std::string& dep) {
  if (e.op() == Op::Div) return std::make_pair(e.lhs(), e.rhs());
  if (e.op() == Op::Neg) {
    auto f = split_fraction(e.arg(), dep);
    if (f) return std::make_pair(-f->first, f->second);
  }
  if (e.op() == Op::Mul) {
    if (e.lhs().op() == Op::Div && !depends_on(e.rhs(), dep))
      return std::make_pair(e.rhs() * e.lhs().lhs(), e.lhs().rhs());
    if (e.rhs().op() == Op::Div && !depends_on(e.lhs(), dep))
      return std::make_pair(e.lhs() * e.rhs().lhs(), e.rhs().rhs());
  }
  return std::nullopt;
}

void require_one_sign(const Expr& e, const std::string& what, const std::string& indep, double lo,
                      double hi) {
  int sign = 0;
  for (int i = 0; i <= 100; ++i) {
    const double t = lo + (hi - lo) * i / 100.0;
    auto v = try_eval(e, indep, t);
    if (!v || *v == 0.0)
      throw SolverError(what + " vanishes or is undefined at " + indep + " = " + num(t), t);
    const int s = *v > 0 ? 1 : -1;
    if (sign != 0 && s != sign)
      throw SolverError(what + " changes sign near " + indep + " = " + num(t), t);
    sign = s;
  }
}

double sign_of(double v) { return v < 0.0 ? -1.0 : 1.0; }

void collect_powers(const Expr& e, const std::string& var, double sign, double& constant,
                    double& k_power, std::vector<std::pair<Expr, double>>& rest) {
  switch (e.op()) {
    case Op::Mul:
      collect_powers(e.lhs(), var, sign, constant, k_power, rest);
      collect_powers(e.rhs(), var, sign, constant, k_power, rest);
      return;
    case Op::Div:
      collect_powers(e.lhs(), var, sign, constant, k_power, rest);
      collect_powers(e.rhs(), var, -sign, constant, k_power, rest);
      return;
    case Op::Neg:
      constant = -constant;
      collect_powers(e.arg(), var, sign, constant, k_power, rest);
      return;
    case Op::Const:
      constant = sign > 0 ? constant * e.value() : constant / e.value();
      return;
    case Op::Var:
      if (e.name() == var) {
        k_power += sign;
        return;
      }
      break;
    case Op::Pow:
      if (e.lhs().op() == Op::Var && e.lhs().name() == var && e.rhs().is_const()) {
        k_power += sign * e.rhs().value();
        return;
      }
      if (e.lhs().op() == Op::Neg && e.lhs().arg().op() == Op::Var &&
          e.lhs().arg().name() == var && e.rhs().is_const() &&
          e.rhs().value() == std::round(e.rhs().value())) {
        const double n = e.rhs().value();
        if (std::fmod(std::abs(n), 2.0) == 1.0) constant = -constant;
        k_power += sign * n;
        return;
      }
      break;
    default:
      break;
  }
  rest.emplace_back(e, sign);
}

}  // namespace

Expr combine_var_powers(const Expr& e, const std::string& var, double extra_power) {
  double constant = 1.0, k_power = extra_power;
  std::vector<std::pair<Expr, double>> rest;
  collect_powers(e, var, 1.0, constant, k_power, rest);
  Expr numer(constant), denom(1.0);
  for (const auto& [f, sg] : rest) (sg > 0 ? numer : denom) = (sg > 0 ? numer : denom) * f;
  const Expr v = Expr::var(var);
  if (k_power > 0) numer = numer * (k_power == 1.0 ? v : pow(v, Expr(k_power)));
  if (k_power < 0) denom = denom * (k_power == -1.0 ? v : pow(v, Expr(-k_power)));
  return simplify(numer / denom);
}

std::string to_string(FormTag t) {
  switch (t) {
    case FormTag::Separable:
      return "Separable";
    case FormTag::Linear:
      return "Linear";
    case FormTag::Bernoulli:
      return "Bernoulli";
    case FormTag::Riccati:
      return "Riccati";
    case FormTag::AbelKind1:
      return "AbelKind1";
    case FormTag::AbelKind2:
      return "AbelKind2";
    case FormTag::Homogeneous:
      return "Homogeneous";
    case FormTag::EllipticIntegral:
      return "EllipticIntegral";
    default:
      return "General";
  }
}

Expr FirstOrderForm::reassemble() const {
  const Expr y = Expr::var(dep);
  auto poly = [&](const std::vector<Expr>& c) {
    Expr s;
    for (std::size_t k = 0; k < c.size(); ++k) s = s + c[k] * pow(y, static_cast<double>(k));
    return s;
  };
  switch (tag) {
    case FormTag::Separable:
      return X * Y;
    case FormTag::Linear:
    case FormTag::Riccati:
    case FormTag::AbelKind1:
    case FormTag::Bernoulli:
      return poly(coeffs);
    case FormTag::AbelKind2:
      return poly(num) / (g1 * y + g0);
    case FormTag::Homogeneous:
      return substitute(ratio_fn, "w", y / Expr::var(indep));
    case FormTag::EllipticIntegral: {
      Expr p;
      for (std::size_t k = 0; k < P.size(); ++k) p = p + Expr(P[k]) * pow(y, static_cast<double>(k));
      return h1 * substitute(substitute(R, "r", sqrt(p)), "v", y);
    }
    default:
      return rhs;
  }
}

FirstOrderForm classify_first_order(const Expr& rhs_in, const std::string& indep,
                                    const std::string& dep, const ProbeBox& box) {
  FirstOrderForm out;
  out.indep = indep;
  out.dep = dep;
  out.rhs = simplify(rhs_in);
  const Expr& rhs = out.rhs;
  const Probes pr = make_probes(box, 24);

  if (auto s = separable_split(rhs, indep, dep, pr)) {
    out.matches.push_back(FormTag::Separable);
    out.X = s->first;
    out.Y = s->second;
  }
  if (auto c = poly_coeffs(rhs, indep, dep, pr)) {
    const auto& cs = *c;
    const std::size_t deg = cs.size() - 1;
    auto zero = [](const Expr& e) { return e.is_const(0.0); };
    if (deg <= 1) {
      out.matches.push_back(FormTag::Linear);
      out.coeffs = cs;
      if (deg == 0) out.coeffs.push_back(Expr(0.0));  // pure quadrature, p = 0
    } else if (deg >= 2) {
      bool bern = zero(cs[0]);
      for (std::size_t k = 2; k < deg; ++k) bern = bern && zero(cs[k]);
      if (bern) {
        out.matches.push_back(FormTag::Bernoulli);
        out.bernoulli_n = static_cast<int>(deg);
      }
      out.matches.push_back(deg == 2 ? FormTag::Riccati : FormTag::AbelKind1);
      out.coeffs = cs;
    }
  }
  if (auto fr = split_fraction(rhs, dep)) {
    auto den = poly_coeffs(fr->second, indep, dep, pr);
    auto numc = poly_coeffs(fr->first, indep, dep, pr);
    if (den && numc && den->size() == 2 && numc->size() <= 4) {
      out.matches.push_back(FormTag::AbelKind2);
      out.num = *numc;
      out.g0 = (*den)[0];
      out.g1 = (*den)[1];
    }
  }
  if (is_homogeneous(rhs, indep, dep, pr)) {
    out.matches.push_back(FormTag::Homogeneous);
    out.ratio_fn = simplify(substitute(substitute(rhs, dep, Expr::var("w")), indep, Expr(1.0)));
  }
  if (auto e = elliptic_recognize(
          substitute(substitute(rhs, indep, Expr::var("u")), dep, Expr::var("v")))) {
    out.matches.push_back(FormTag::EllipticIntegral);
    out.h1 = substitute(e->h1, "u", Expr::var(indep));
    out.R = e->R;
    out.P = e->P;
  }
  static constexpr FormTag kOrder[] = {
      FormTag::Separable, FormTag::Linear,      FormTag::Bernoulli,
      FormTag::Riccati,   FormTag::AbelKind1,   FormTag::AbelKind2,
      FormTag::Homogeneous, FormTag::EllipticIntegral};
  std::vector<FormTag> ordered;
  for (FormTag t : kOrder)
    if (std::find(out.matches.begin(), out.matches.end(), t) != out.matches.end())
      ordered.push_back(t);
  out.matches = ordered;
  out.tag = ordered.empty() ? FormTag::General : ordered.front();
  return out;
}

// ------------------------------------------------------------------ implicit

double ImplicitSolution::residual(double x, double y) const {
  return eval(left, left_var, y) - eval(right, right_var, x) - B;
}

double ImplicitSolution::solve(double x, double lo, double hi, double tol) const {
  const double rx = eval(right, right_var, x) + B;
  return special::find_root([&](double y) { return eval(left, left_var, y) - rx; }, lo, hi, tol);
}

std::string ImplicitSolution::str() const {
  std::string b = B == 0.0 ? "" : (B > 0 ? " + " + format_number(B) : " - " + format_number(-B));
  return left.str() + " = " + right.str() + b;
}

ImplicitSolution solve_separable(const Expr& X, const Expr& Y, const Anchor& ic,
                                 const std::string& indep, const std::string& dep) {
  auto y0 = try_eval(Y, dep, ic.y0);
  if (!y0 || *y0 == 0.0)
    throw SolverError("Y vanishes or is undefined at the initial value " + dep + " = " +
                          num(ic.y0),
                      ic.y0);
  ImplicitSolution s;
  s.left_var = dep;
  s.right_var = indep;
  s.left = antiderive(simplify(Expr(1.0) / Y), dep, ic.y0)->at(Expr::var(dep));
  s.right = antiderive(X, indep, ic.x0)->at(Expr::var(indep));
  s.B = 0.0;
  return s;
}

Expr solve_linear(const Expr& p, const Expr& q, const Anchor& ic, const std::string& indep) {
  const Expr t = Expr::var(indep);
  const Expr P = antiderive(combine_var_powers(p, indep), indep, ic.x0)->at(t);
  const Expr phi = simplify(exp(P));
  const Expr Q = antiderive(combine_var_powers(q / phi, indep), indep, ic.x0)->at(t);
  return simplify(phi * (Expr(ic.y0) + Q));
}

Expr solve_bernoulli(const Expr& p, const Expr& q, int n, const Anchor& ic,
                     const std::string& indep, std::optional<double> check_until) {
  if (n < 2) throw SolverError("Bernoulli exponent must be at least 2");
  if (ic.y0 == 0.0) throw SolverError("Bernoulli route needs a nonzero initial value");
  const double e = 1.0 - n;
  const double w0 = std::pow(ic.y0, e);
  const Expr w = solve_linear(simplify(Expr(e) * p), simplify(Expr(e) * q), {ic.x0, w0}, indep);
  const double s = sign_of(ic.y0), sw = sign_of(w0);
  if (check_until) {
    auto wv = [&](double t) { return sw * eval(w, indep, t); };
    const double a = ic.x0, b = *check_until;
    double prev_t = a;
    for (int i = 1; i <= 400; ++i) {
      const double t = a + (b - a) * i / 400.0;
      double v = 0.0;
      try {
        v = wv(t);
      } catch (const std::exception&) {
        throw SolverError("w = y^(1-n) is undefined near " + indep + " = " + num(t), t);
      }
      if (v <= 0.0) {
        const double at = special::find_root(wv, prev_t, t, 1e-14);
        throw SolverError("w = y^(1-n) reaches 0 near " + indep + " = " + num(at) +
                              " (the solution blows up)",
                          at);
      }
      prev_t = t;
    }
  }
  return simplify(Expr(s) * pow(Expr(sw) * w, Expr(1.0 / e)));
}

Expr solve_riccati_with_particular(const Expr& f, const Expr& g, const Expr& h,
                                   const Expr& y_part, const Anchor& ic, double check_until,
                                   const std::string& indep) {
  const Expr yp = simplify(y_part);
  const Expr dyp = differentiate(yp, indep);
  for (int i = 0; i < 20; ++i) {
    const double t = ic.x0 + (check_until - ic.x0) * i / 19.0;
    auto lhs = try_eval(dyp, indep, t);
    auto vf = try_eval(f, indep, t), vg = try_eval(g, indep, t), vh = try_eval(h, indep, t),
         vy = try_eval(yp, indep, t);
    if (!lhs || !vf || !vg || !vh || !vy)
      throw SolverError("particular solution is undefined at " + indep + " = " + num(t), t);
    const double a = *vf * *vy * *vy, b = *vg * *vy;
    const double r = *lhs - (a + b + *vh);
    if (std::abs(r) > 1e-8 * (1.0 + std::abs(*lhs) + std::abs(a) + std::abs(b) + std::abs(*vh)))
      throw SolverError("particular solution fails the Riccati residual check at " + indep +
                            " = " + num(t),
                        t);
  }
  const double yp0 = eval(yp, indep, ic.x0);
  const double gap = ic.y0 - yp0;
  if (std::abs(gap) <= 1e-14 * (1.0 + std::abs(ic.y0))) return yp;
  const Expr t = Expr::var(indep);
  const Expr phi = simplify(exp(antiderive(simplify(Expr(2.0) * f * yp + g), indep, ic.x0)->at(t)));
  const Expr J = antiderive(simplify(f * phi), indep, ic.x0)->at(t);
  return simplify(yp + phi / (Expr(1.0 / gap) - J));
}

// ------------------------------------------------------------------ chains

std::pair<double, double> CanonicalChain::forward(double t, double y) const {
  const double G1 = eval(g1, indep, t), G0 = eval(g0, indep, t), e = eval(E, indep, t);
  const double s = eval(S, indep, t);
  if (kind == Kind::Cubic) {
    const double u = 1.0 / (G1 * y + G0);
    const double v = u + eval(sigma, indep, t);
    return {s, v / e};
  }
  return {s, (G1 * y + G0) / e};
}

double CanonicalChain::t_of_s(double s) const {
  if (s == 0.0) return t0;
  auto f = [&](double t) { return eval(S, indep, t) - s; };
  return special::find_root(f, t_lo, t_hi, 1e-15);
}

std::pair<double, double> CanonicalChain::inverse(double s, double w) const {
  const double t = t_of_s(s);
  const double G1 = eval(g1, indep, t), G0 = eval(g0, indep, t), e = eval(E, indep, t);
  if (kind == Kind::Cubic) {
    const double u = e * w - eval(sigma, indep, t);
    return {t, (1.0 - G0 * u) / (G1 * u)};
  }
  return {t, (e * w - G0) / G1};
}

double CanonicalChain::k(double s) const { return eval(k_of_t, indep, t_of_s(s)); }

double CanonicalChain::canonical_rhs(double s, double w) const {
  const double kv = k(s);
  if (kind == Kind::Cubic) return w * w * w + kv;
  if (w == 0.0) throw DomainError("canonical Abel equation is singular at w = 0");
  return (w + kv) / w;
}

std::string CanonicalChain::canonical_text() const {
  const std::string k = "k(s) = " + k_of_t.str() + " at " + indep + " = " + indep + "(s)";
  return kind == Kind::Cubic ? "w'(s) = w(s)^3 + k(s), " + k
                             : "w(s)*w'(s) = w(s) + k(s), " + k;
}

CanonicalChain abel2_cubic_to_canonical(const Expr& f3, const Expr& f2, const Expr& f1,
                                        const Expr& f0, const Expr& g1, const Expr& g0,
                                        double t0, double t_lo, double t_hi,
                                        const std::string& indep) {
  const Expr t = Expr::var(indep);
  require_one_sign(g1, "g1", indep, t_lo, t_hi);
  require_one_sign(f3, "f3", indep, t_lo, t_hi);
  const Expr al = simplify(Expr(1.0) / g1);
  const Expr be = simplify(-g0 / g1);
  const Expr g1p = differentiate(g1, indep), g0p = differentiate(g0, indep);
  const Expr ft0 = simplify(-(g1 * f3 * pow(al, 3.0)));
  const Expr ft1 = simplify(-(g1p * al) - g1 * (Expr(3.0) * f3 * pow(al, 2.0) * be + f2 * pow(al, 2.0)));
  const Expr ft2 = simplify(-(g1p * be) - g0p -
                            g1 * (Expr(3.0) * f3 * al * pow(be, 2.0) + Expr(2.0) * f2 * al * be +
                                  f1 * al));
  const Expr ft3 =
      simplify(-(g1 * (f3 * pow(be, 3.0) + f2 * pow(be, 2.0) + f1 * be + f0)));
  require_one_sign(ft3, "transformed cubic coefficient f~3", indep, t_lo, t_hi);

  const Expr sigma = simplify(ft2 / (Expr(3.0) * ft3));
  const Expr sp = differentiate(sigma, indep);
  const Expr h3 = ft3;
  const Expr h1 = simplify(Expr(3.0) * pow(sigma, 2.0) * ft3 - Expr(2.0) * sigma * ft2 + ft1);
  const Expr h0 = simplify(-(ft3 * pow(sigma, 3.0)) + ft2 * pow(sigma, 2.0) - ft1 * sigma + ft0 + sp);
  const Expr E = simplify(exp(antiderive(h1, indep, t0)->at(t)));
  const Expr ht3 = simplify(h3 * pow(E, 2.0));
  const Expr ht0 = simplify(h0 / E);

  CanonicalChain c;
  c.kind = CanonicalChain::Kind::Cubic;
  c.indep = indep;
  c.t0 = t0;
  c.t_lo = t_lo;
  c.t_hi = t_hi;
  c.g0 = g0;
  c.g1 = g1;
  c.sigma = sigma;
  c.E = E;
  c.S = antiderive(ht3, indep, t0)->at(t);
  c.k_of_t = simplify(ht0 / ht3);
  c.steps.push_back({"y = (1 - g0*u)/(g1*u): u' = f~3 u^3 + f~2 u^2 + f~1 u + f~0",
                     {{"f~3", ft3}, {"f~2", ft2}, {"f~1", ft1}, {"f~0", ft0}}});
  c.steps.push_back({"u = v - f~2/(3 f~3): v' = h3 v^3 + h1 v + h0",
                     {{"shift", sigma}, {"h3", h3}, {"h1", h1}, {"h0", h0}}});
  c.steps.push_back({"v = E w, E = exp(int h1): w' = h~3 w^3 + h~0",
                     {{"E", E}, {"h~3", ht3}, {"h~0", ht0}}});
  c.steps.push_back({"s = int h~3: w'(s) = w^3 + k(s)", {{"s", c.S}, {"k", c.k_of_t}}});
  return c;
}

CanonicalChain abel2_quadratic_to_canonical(const Expr& f2, const Expr& f1, const Expr& f0,
                                            const Expr& g1, const Expr& g0, double t0,
                                            double t_lo, double t_hi, const std::string& indep) {
  const Expr t = Expr::var(indep);
  require_one_sign(g1, "g1", indep, t_lo, t_hi);
  const Expr g1p = differentiate(g1, indep), g0p = differentiate(g0, indep);
  const Expr ft2 = simplify(g1p / g1 + f2 / g1);
  const Expr ft1 = simplify(-(g1p * g0 / g1) + g0p - Expr(2.0) * f2 * g0 / g1 + f1);
  const Expr ft0 = simplify(f2 * pow(g0, 2.0) / g1 - f1 * g0 + g1 * f0);
  require_one_sign(ft1, "transformed linear coefficient f~1", indep, t_lo, t_hi);
  const Expr E = simplify(exp(antiderive(ft2, indep, t0)->at(t)));
  const Expr ht1 = simplify(ft1 / E);
  const Expr ht0 = simplify(ft0 / pow(E, 2.0));

  CanonicalChain c;
  c.kind = CanonicalChain::Kind::Quadratic;
  c.indep = indep;
  c.t0 = t0;
  c.t_lo = t_lo;
  c.t_hi = t_hi;
  c.g0 = g0;
  c.g1 = g1;
  c.E = E;
  c.S = antiderive(ht1, indep, t0)->at(t);
  c.k_of_t = simplify(ht0 / ht1);
  c.steps.push_back({"y = (z - g0)/g1: z z' = f~2 z^2 + f~1 z + f~0",
                     {{"f~2", ft2}, {"f~1", ft1}, {"f~0", ft0}}});
  c.steps.push_back({"z = E w, E = exp(int f~2): w w' = h~1 w + h~0",
                     {{"E", E}, {"h~1", ht1}, {"h~0", ht0}}});
  c.steps.push_back({"s = int h~1: w w'(s) = w + k(s)", {{"s", c.S}, {"k", c.k_of_t}}});
  return c;
}

// ------------------------------------------------------------------ homogeneous

std::pair<double, double> HomogeneousReduction::forward(double y, double K) const {
  switch (case_id) {
    case 1: {
      const double u = y - y_shift;
      return {u, (K - k_shift) / u};
    }
    case 2:
      return {y, a * y + b * K + c};
    default:
      return {y, alpha * y + beta * K + gamma};
  }
}

std::pair<double, double> HomogeneousReduction::inverse(double s, double z) const {
  switch (case_id) {
    case 1:
      return {s + y_shift, z * s + k_shift};
    case 2:
      return {s, (z - a * s - c) / b};
    default:
      return {s, (z - alpha * s - gamma) / beta};
  }
}

HomogeneousReduction homogeneous_reduce(const Expr& f, double alpha, double beta, double gamma,
                                        double a, double b, double c) {
  HomogeneousReduction h;
  h.alpha = alpha;
  h.beta = beta;
  h.gamma = gamma;
  h.a = a;
  h.b = b;
  h.c = c;
  const double delta = a * beta - b * alpha;
  const double scale = std::abs(a * beta) + std::abs(b * alpha);
  if (std::abs(delta) > 1e-14 * scale) {
    h.case_id = 1;
    h.y_shift = (b * gamma - c * beta) / delta;
    h.k_shift = (c * alpha - a * gamma) / delta;
    h.indep = "u";
    h.dep = "w";
    const Expr w = Expr::var("w");
    h.f_tilde = simplify(substitute(f, "r", (Expr(a) + Expr(b) * w) / (Expr(alpha) + Expr(beta) * w)));
    h.separable_rhs = simplify((h.f_tilde - w) / Expr::var("u"));
    return h;
  }
  const Expr v = Expr::var("v");
  h.indep = "y";
  h.dep = "v";
  if (b != 0.0) {
    h.case_id = 2;
    h.separable_rhs = simplify(
        Expr(a) + Expr(b) * substitute(f, "r", Expr(b) * v / (Expr(beta) * v + Expr(b * gamma - c * beta))));
    return h;
  }
  if (beta != 0.0) {
    h.case_id = 3;
    h.separable_rhs = simplify(
        Expr(alpha) +
        Expr(beta) * substitute(f, "r", (Expr(b) * v + Expr(c * beta - b * gamma)) / (Expr(beta) * v)));
    return h;
  }
  throw SolverError("the ratio does not involve K (b = beta = 0)");
}

// ------------------------------------------------------------------ elliptic

std::optional<EllipticPayload> elliptic_recognize(const Expr& F2) {
  const Expr e = simplify(F2);
  std::vector<Factor> fs;
  double constant = 1.0;
  collect_factors(e, 1, fs, constant);
  std::vector<Factor> hs, rs;
  std::optional<Expr> radicand;
  for (const auto& f : fs) {
    const bool du = depends_on(f.e, "u"), dv = depends_on(f.e, "v");
    if (du && dv) return std::nullopt;
    if (!dv) {
      hs.push_back(f);
      continue;
    }
    const bool is_root = f.e.op() == Op::Sqrt ||
                         (f.e.op() == Op::Pow && f.e.rhs().is_const(0.5));
    if (is_root && !radicand) {
      radicand = f.e.op() == Op::Sqrt ? f.e.arg() : f.e.lhs();
      rs.push_back({Expr::var("r"), f.power});
    } else {
      rs.push_back(f);
    }
  }
  if (!radicand) return std::nullopt;
  ProbeBox box;
  box.t_lo = 0.0;
  box.t_hi = 0.0;
  box.y_lo = -0.9;
  box.y_hi = 0.9;
  const Probes pr = make_probes(box, 16);
  auto c = poly_coeffs(*radicand, "u", "v", pr, 4);
  if (!c || c->size() < 4) return std::nullopt;
  EllipticPayload out;
  for (const auto& ck : *c) {
    const Expr s = simplify(ck);
    if (!s.is_const()) return std::nullopt;
    out.P.push_back(s.value());
  }
  out.h1 = rebuild(hs, constant);
  out.R = rebuild(rs);
  if (out.P.size() == 5 && out.R == Expr::var("r")) {
    const double k2 = out.P[4];
    const auto& P = out.P;
    const bool shape = std::abs(P[0] - 1.0) <= 1e-12 && std::abs(P[1]) <= 1e-12 &&
                       std::abs(P[3]) <= 1e-12 && std::abs(P[2] + 1.0 + k2) <= 1e-12;
    if (shape && k2 >= 0.0 && k2 <= 1.0) out.modulus = std::sqrt(k2);
  }
  return out;
}

Expr elliptic_solve(const EllipticPayload& e, const Anchor& ic, const std::string& indep,
                    double* A_out) {
  if (e.P.size() == 4)
    throw SolverError("cubic radicand recognized; Jacobi inversion is only supported for the quartic (1 - v^2)(1 - k^2 v^2)");
  if (!e.modulus)
    throw SolverError("quartic radicand is not of the form (1 - v^2)(1 - k^2 v^2) with R = sqrt(P); inversion unsupported");
  const double k = *e.modulus;
  if (std::abs(ic.y0) > 1.0 || (k == 1.0 && std::abs(ic.y0) == 1.0))
    throw SolverError("initial value outside the range of sn");
  const double A = special::elliptic_f(std::asin(ic.y0), k);
  if (A_out) *A_out = A;
  const Expr t = Expr::var(indep);
  const Expr H1 = antiderive(substitute(e.h1, "u", t), indep, ic.x0)->at(t);
  return jacobi_call(JacobiKind::Sn, k, simplify(H1 + Expr(A)));
}

std::pair<double, double> evaluable_range(const Expr& e, const std::string& var, double from,
                                          double a, double b, int samples) {
  auto ok = [&](double t) { return try_eval(e, var, t).has_value(); };
  if (!ok(from)) throw SolverError("expression is undefined at the starting point");
  auto walk = [&](double end) {
    double last = from;
    for (int i = 1; i <= samples; ++i) {
      const double t = from + (end - from) * i / samples;
      if (!ok(t)) {
        double good = last, bad = t;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (good + bad);
          (ok(mid) ? good : bad) = mid;
        }
        return good;
      }
      last = t;
    }
    return end;
  };
  return {walk(a), walk(b)};
}

}  // namespace odered
