#include "odered/solution.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace odered {

std::string SolutionSummary::text() const {
  if (!closed) return "numeric";
  if (explicit_y) return "y = " + explicit_y->str();
  if (implicit) return implicit->str();
  return "numeric";
}

namespace {

void collect_terms(const Expr& e, double coef, std::vector<std::pair<double, Expr>>& out) {
  switch (e.op()) {
    case Op::Add:
      collect_terms(e.lhs(), coef, out);
      collect_terms(e.rhs(), coef, out);
      return;
    case Op::Sub:
      collect_terms(e.lhs(), coef, out);
      collect_terms(e.rhs(), -coef, out);
      return;
    case Op::Neg:
      collect_terms(e.arg(), -coef, out);
      return;
    case Op::Mul:
      if (e.lhs().is_const()) return collect_terms(e.rhs(), coef * e.lhs().value(), out);
      if (e.rhs().is_const()) return collect_terms(e.lhs(), coef * e.rhs().value(), out);
      break;
    case Op::Div:
      if (e.rhs().is_const() && e.rhs().value() != 0.0)
        return collect_terms(e.lhs(), coef / e.rhs().value(), out);
      break;
    default:
      break;
  }
  out.emplace_back(coef, e);
}

/// exp of a sum as a product: constants fold into one factor and c ln f
/// becomes f^c.
Expr exp_as_product(const Expr& e) {
  std::vector<std::pair<double, Expr>> terms;
  collect_terms(e, 1.0, terms);
  double c = 0.0;
  Expr out(1.0);
  for (const auto& [k, t] : terms) {
    if (t.is_const()) c += k * t.value();
    else if (t.op() == Op::Ln) out = out * (k == 1.0 ? t.arg() : pow(t.arg(), k));
    else out = out * exp(Expr(k) * t);
  }
  return simplify(Expr(std::exp(c)) * out);
}

}  // namespace

std::optional<Expr> isolate(const ImplicitSolution& s) {
  const Expr y = Expr::var(s.left_var);
  const Expr rhs = simplify(s.right + Expr(s.B));
  if (s.left == y) return rhs;
  if (s.left.op() == Op::Ln && s.left.arg() == y) return exp_as_product(rhs);
  return std::nullopt;
}

namespace {

bool free_of_calls(const SolutionSummary& s) {
  if (s.explicit_y && has_numeric_calls(*s.explicit_y)) return false;
  if (s.implicit && (has_numeric_calls(s.implicit->left) || has_numeric_calls(s.implicit->right)))
    return false;
  return s.explicit_y || s.implicit;
}

void additive_route(const ReducedODE& r, const ReduceOptions& opt, SolutionSummary& out) {
  ProbeBox box;
  const double x1 = opt.interval_end.value_or(r.ic.x0 + 1.0);
  box.t_lo = std::min(r.ic.x0, x1);
  box.t_hi = std::max(r.ic.x0, x1);
  box.y_lo = r.ic.y0 - 0.25 * std::max(1.0, std::abs(r.ic.y0));
  box.y_hi = r.ic.y0 + 0.25 * std::max(1.0, std::abs(r.ic.y0));
  const auto form = classify_first_order(r.rhs, "x", "y", box);
  const Anchor a{r.ic.x0, r.ic.y0};
  auto has = [&](FormTag t) {
    return std::find(form.matches.begin(), form.matches.end(), t) != form.matches.end();
  };
  if (has(FormTag::Linear)) {
    out.explicit_y = solve_linear(form.coeffs.at(1), form.coeffs.at(0), a);
    out.method = "linear";
  } else if (has(FormTag::Separable)) {
    out.implicit = solve_separable(form.X, form.Y, a);
    out.explicit_y = isolate(*out.implicit);
    out.method = "separable";
  } else if (has(FormTag::Bernoulli)) {
    out.explicit_y = solve_bernoulli(form.coeffs.at(1), form.coeffs.at(form.bernoulli_n),
                                     form.bernoulli_n, a, "x", x1);
    out.method = "bernoulli";
  } else {
    out.failure = "reduced equation is " + to_string(form.tag) + ", no closed route";
  }
}

}  // namespace

SolutionSummary solve_reduced(const ReducedODE& r, const ReduceOptions& opt) {
  SolutionSummary out;
  out.method = "numeric";
  try {
    if (r.tag == ClassTag::I || r.tag == ClassTag::II) {
      additive_route(r, opt, out);
    } else {
      out.implicit = implicit_solution(r, opt);
      out.explicit_y = isolate(*out.implicit);
      out.method = "quadrature";
    }
  } catch (const std::exception& e) {
    out.implicit.reset();
    out.explicit_y.reset();
    out.method = "numeric";
    out.failure = e.what();
  }
  out.closed = free_of_calls(out);
  if (!out.closed && out.failure.empty()) out.failure = "quadratures have no closed form";
  return out;
}

}  // namespace odered
