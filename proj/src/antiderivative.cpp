#include "odered/antiderivative.hpp"

#include <cmath>
#include <map>

#include "odered/functions.hpp"
#include "odered/special.hpp"

namespace odered {

namespace {

/// Nonzero constant slope when `l` is affine in `var`.
std::optional<double> affine_slope(const Expr& l, const std::string& var) {
  if (!depends_on(l, var)) return std::nullopt;
  const Expr d = differentiate(l, var);
  if (d.is_const() && d.value() != 0.0) return d.value();
  return std::nullopt;
}

std::optional<Expr> log_rule(const Expr& num, const Expr& l, double slope, const std::string& var,
                             double base) {
  double at_base = 0.0;
  try {
    at_base = eval(l, var, base);
  } catch (const DomainError&) {
    return std::nullopt;
  }
  if (at_base == 0.0) return std::nullopt;
  const Expr arg = at_base > 0.0 ? l : -l;
  return num * ln(arg) / Expr(slope);
}

std::optional<Expr> rules(const Expr& e, const std::string& var, double base);

using Laurent = std::map<double, double>;  // exponent -> coefficient
constexpr std::size_t kMaxLaurentTerms = 40;

Laurent laurent_mul(const Laurent& a, const Laurent& b) {
  Laurent out;
  for (const auto& [ea, ca] : a)
    for (const auto& [eb, cb] : b) out[ea + eb] += ca * cb;
  return out;
}

/// Finite Laurent expansion in `var` of sums, products and integer powers.
std::optional<Laurent> laurent(const Expr& e, const std::string& var) {
  if (!depends_on(e, var)) {
    if (!e.is_const()) return std::nullopt;
    return Laurent{{0.0, e.value()}};
  }
  std::optional<Laurent> out;
  switch (e.op()) {
    case Op::Var:
      return Laurent{{1.0, 1.0}};
    case Op::Neg: {
      out = laurent(e.arg(), var);
      if (out)
        for (auto& [k, c] : *out) c = -c;
      return out;
    }
    case Op::Add:
    case Op::Sub: {
      auto l = laurent(e.lhs(), var);
      auto r = laurent(e.rhs(), var);
      if (!l || !r) return std::nullopt;
      const double sign = e.op() == Op::Add ? 1.0 : -1.0;
      for (const auto& [k, c] : *r) (*l)[k] += sign * c;
      out = l;
      break;
    }
    case Op::Mul: {
      auto l = laurent(e.lhs(), var);
      auto r = laurent(e.rhs(), var);
      if (!l || !r) return std::nullopt;
      out = laurent_mul(*l, *r);
      break;
    }
    case Op::Div: {
      auto l = laurent(e.lhs(), var);
      auto r = laurent(e.rhs(), var);
      if (!l || !r || r->size() != 1 || r->begin()->second == 0.0) return std::nullopt;
      const auto [k, c] = *r->begin();
      out = laurent_mul(*l, Laurent{{-k, 1.0 / c}});
      break;
    }
    case Op::Pow: {
      if (!e.rhs().is_const()) return std::nullopt;
      const double n = e.rhs().value();
      auto b = laurent(e.lhs(), var);
      if (!b) return std::nullopt;
      if (b->size() == 1 && b->begin()->second > 0.0) {
        const auto [k, c] = *b->begin();
        return Laurent{{k * n, std::pow(c, n)}};
      }
      if (n < 0.0 || n > 6.0 || n != std::floor(n)) return std::nullopt;
      Laurent acc{{0.0, 1.0}};
      for (int i = 0; i < static_cast<int>(n); ++i) acc = laurent_mul(acc, *b);
      out = acc;
      break;
    }
    default:
      return std::nullopt;
  }
  if (out && out->size() > kMaxLaurentTerms) return std::nullopt;
  return out;
}

std::optional<Expr> laurent_rule(const Expr& e, const std::string& var, double base) {
  const auto terms = laurent(e, var);
  if (!terms) return std::nullopt;
  const Expr t = Expr::var(var);
  Expr sum(0.0);
  for (const auto& [k, c] : *terms) {
    if (c == 0.0) continue;
    if (k == -1.0) {
      auto l = log_rule(Expr(c), t, 1.0, var, base);
      if (!l) return std::nullopt;
      sum = sum + *l;
    } else {
      sum = sum + Expr(c / (k + 1.0)) * pow(t, k + 1.0);
    }
  }
  return sum;
}

/// c D'/D -> c ln|D| when num/D' is constant at probes around the base point.
std::optional<Expr> log_derivative_rule(const Expr& num, const Expr& den, const std::string& var,
                                        double base) {
  const Expr dd = differentiate(den, var);
  std::optional<double> ratio;
  int seen = 0;
  for (double h : {0.0, -0.29, -0.13, 0.07, 0.17, 0.31, 0.53}) {
    double n = 0.0, d = 0.0;
    try {
      n = eval(num, var, base + h);
      d = eval(dd, var, base + h);
    } catch (const DomainError&) {
      continue;
    }
    if (!std::isfinite(n) || !std::isfinite(d) || d == 0.0) return std::nullopt;
    const double r = n / d;
    if (!ratio) ratio = r;
    else if (std::abs(r - *ratio) > 1e-11 * std::max(1.0, std::abs(*ratio)))
      return std::nullopt;
    ++seen;
  }
  if (seen < 4) return std::nullopt;
  return log_rule(Expr(*ratio), den, 1.0, var, base);
}

std::optional<Expr> basic_rules(const Expr& e, const std::string& var, double base) {
  if (!depends_on(e, var)) return e * Expr::var(var);
  switch (e.op()) {
    case Op::Var:
      return pow(e, 2.0) / Expr(2.0);
    case Op::Neg: {
      auto inner = rules(e.arg(), var, base);
      if (!inner) return std::nullopt;
      return -*inner;
    }
    case Op::Add:
    case Op::Sub: {
      auto l = rules(e.lhs(), var, base);
      auto r = rules(e.rhs(), var, base);
      if (!l || !r) return std::nullopt;
      return e.op() == Op::Add ? *l + *r : *l - *r;
    }
    case Op::Mul: {
      if (!depends_on(e.lhs(), var)) {
        auto r = rules(e.rhs(), var, base);
        if (r) return e.lhs() * *r;
      } else if (!depends_on(e.rhs(), var)) {
        auto l = rules(e.lhs(), var, base);
        if (l) return *l * e.rhs();
      }
      return std::nullopt;
    }
    case Op::Div: {
      const Expr& num = e.lhs();
      const Expr& den = e.rhs();
      if (!depends_on(den, var)) {
        auto l = rules(num, var, base);
        if (l) return *l / den;
        return std::nullopt;
      }
      if (depends_on(num, var)) return std::nullopt;
      if (auto s = affine_slope(den, var)) return log_rule(num, den, *s, var, base);
      if (den.op() == Op::Pow && !depends_on(den.rhs(), var)) {
        auto r = rules(pow(den.lhs(), -den.rhs()), var, base);
        if (r) return num * *r;
        return std::nullopt;
      }
      if (den.op() == Op::Sqrt) {
        if (auto s = affine_slope(den.arg(), var)) return Expr(2.0) * num * den / Expr(*s);
        return std::nullopt;
      }
      if (den.op() == Op::Exp) {
        if (auto s = affine_slope(den.arg(), var))
          return -(num * exp(-den.arg())) / Expr(*s);
      }
      return std::nullopt;
    }
    case Op::Pow: {
      const Expr& b = e.lhs();
      const Expr& n = e.rhs();
      if (!depends_on(n, var) && n.is_const()) {
        auto s = affine_slope(b, var);
        if (!s) return std::nullopt;
        if (n.value() == -1.0) return log_rule(Expr(1.0), b, *s, var, base);
        return pow(b, Expr(n.value() + 1.0)) / Expr((n.value() + 1.0) * *s);
      }
      if (!depends_on(b, var) && b.is_const() && b.value() > 0.0 && b.value() != 1.0) {
        auto s = affine_slope(n, var);
        if (!s) return std::nullopt;
        return e / Expr(std::log(b.value()) * *s);
      }
      return std::nullopt;
    }
    case Op::Exp: {
      auto s = affine_slope(e.arg(), var);
      if (!s) return std::nullopt;
      return e / Expr(*s);
    }
    case Op::Sin: {
      auto s = affine_slope(e.arg(), var);
      if (!s) return std::nullopt;
      return -cos(e.arg()) / Expr(*s);
    }
    case Op::Cos: {
      auto s = affine_slope(e.arg(), var);
      if (!s) return std::nullopt;
      return sin(e.arg()) / Expr(*s);
    }
    case Op::Sqrt: {
      auto s = affine_slope(e.arg(), var);
      if (!s) return std::nullopt;
      return pow(e.arg(), 1.5) / Expr(1.5 * *s);
    }
    case Op::Call: {
      // int sn(u, k) du = -ln(dn + k cn)/k; dn > k|cn| for 0 < k < 1.
      const auto* j = dynamic_cast<const JacobiFunction*>(e.function().get());
      if (!j || j->kind() != JacobiKind::Sn || !(j->modulus() > 0.0 && j->modulus() < 1.0))
        return std::nullopt;
      auto s = affine_slope(e.arg(), var);
      if (!s) return std::nullopt;
      const double k = j->modulus();
      return -ln(jacobi_call(JacobiKind::Dn, k, e.arg()) +
                 Expr(k) * jacobi_call(JacobiKind::Cn, k, e.arg())) /
             Expr(k * *s);
    }
    default:
      return std::nullopt;
  }
}

std::optional<Expr> rules(const Expr& e, const std::string& var, double base) {
  if (auto r = basic_rules(e, var, base)) return r;
  if (e.op() == Op::Mul || e.op() == Op::Div || e.op() == Op::Pow) {
    if (auto r = laurent_rule(e, var, base)) return r;
  }
  if (e.op() == Op::Div && depends_on(e.rhs(), var))
    return log_derivative_rule(e.lhs(), e.rhs(), var, base);
  return std::nullopt;
}

}  // namespace

std::optional<Expr> integrate_rules(const Expr& e, const std::string& var, double base_point) {
  auto r = rules(simplify(e), var, base_point);
  if (!r) return std::nullopt;
  return simplify(*r);
}

Antiderivative::Antiderivative(Expr integrand, std::string var, double base_point)
    : integrand_(simplify(integrand)), var_(std::move(var)), base_(base_point) {
  closed_ = integrate_rules(integrand_, var_, base_);
  if (closed_) {
    try {
      (void)eval(*closed_, var_, base_);
    } catch (const DomainError&) {
      closed_.reset();
    }
  }
  cache_.emplace(base_, 0.0);
}

double Antiderivative::value(double t) const {
  if (closed_) return eval(*closed_, var_, t) - eval(*closed_, var_, base_);
  std::lock_guard lock(mu_);
  auto hit = cache_.find(t);
  if (hit != cache_.end()) return hit->second;
  auto hi = cache_.lower_bound(t);
  auto start = hi;
  if (hi == cache_.end()) {
    start = std::prev(hi);
  } else if (hi != cache_.begin()) {
    auto lo = std::prev(hi);
    start = (t - lo->first) <= (hi->first - t) ? lo : hi;
  }
  const Expr& f = integrand_;
  const std::string& v = var_;
  const double noise = has_numeric_calls(f) ? kNestedNoise : 0.0;
  const double piece = special::quad_adaptive(
      [&f, &v](double s) { return eval(f, v, s); }, start->first, t, kAntiderivativeTol, noise);
  const double out = start->second + piece;
  cache_.emplace(t, out);
  return out;
}

std::string Antiderivative::name() const {
  return "int{" + integrand_.str() + " d" + var_ + " from " + format_number(base_) + "}";
}

Expr Antiderivative::derivative(const Expr& arg) const { return substitute(integrand_, var_, arg); }

Expr Antiderivative::at(const Expr& arg) const {
  if (closed_) {
    const double c0 = eval(*closed_, var_, base_);
    return simplify(substitute(*closed_, var_, arg) - Expr::constant(c0));
  }
  return Expr::call(shared_from_this(), arg);
}

std::shared_ptr<const Antiderivative> antiderive(const Expr& e, const std::string& var,
                                                 double base_point) {
  return std::make_shared<Antiderivative>(e, var, base_point);
}

}  // namespace odered
