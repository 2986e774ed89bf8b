#include "odered/classes.hpp"

#include <cmath>

#include "odered/antiderivative.hpp"

namespace odered {

namespace {

void require_only(const Expr& e, const std::string& field,
                  std::initializer_list<const char*> allowed) {
  for (const auto& v : free_variables(e)) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || v == a;
    if (!ok) {
      std::string list;
      for (const char* a : allowed) list += list.empty() ? a : std::string(", ") + a;
      throw ValidationError(field, "depends on '" + v + "' but may only use {" + list + "}");
    }
  }
}

bool a_in_x(ClassTag t) { return t == ClassTag::I || t == ClassTag::III; }

/// int a from the anchor, as an expression in the variable of a.
Expr integral_of_a(const ClassDescriptor& d, const Anchor& anchor) {
  const bool in_x = a_in_x(d.tag);
  const std::string var = in_x ? "x" : "y";
  auto ad = antiderive(d.a, var, in_x ? anchor.x0 : anchor.y0);
  return ad->at(Expr::var(var));
}

}  // namespace

std::string to_string(ClassTag t) {
  switch (t) {
    case ClassTag::I:
      return "I";
    case ClassTag::II:
      return "II";
    case ClassTag::III:
      return "III";
    default:
      return "IV";
  }
}

ClassTag class_tag_from_string(const std::string& s) {
  if (s == "I" || s == "1") return ClassTag::I;
  if (s == "II" || s == "2") return ClassTag::II;
  if (s == "III" || s == "3") return ClassTag::III;
  if (s == "IV" || s == "4") return ClassTag::IV;
  throw ValidationError("class", "unknown class '" + s + "' (expected I, II, III or IV)");
}

const char* ClassDescriptor::a_variable() const { return a_in_x(tag) ? "x" : "y"; }

void validate(const ClassDescriptor& d) {
  if (d.m < 0) throw ValidationError("m", "must be non-negative");
  switch (d.tag) {
    case ClassTag::I:
    case ClassTag::II:
      if (d.m != 0) throw ValidationError("m", "must be 0 for class " + to_string(d.tag));
      require_only(d.a, "a", {d.a_variable()});
      require_only(d.F, "F", {"x"});
      require_only(d.G, "G", {"y"});
      if (!d.F2.is_const(0.0)) throw ValidationError("F2", "not used by class " + to_string(d.tag));
      break;
    case ClassTag::III:
    case ClassTag::IV:
      require_only(d.a, "a", {d.a_variable()});
      require_only(d.F2, "F2", {"u", "v"});
      if (!d.F.is_const(0.0) || !d.G.is_const(0.0))
        throw ValidationError(d.F.is_const(0.0) ? "G" : "F",
                              "not used by class " + to_string(d.tag) + " (use F2)");
      break;
  }
}

void validate(const ClassDescriptor& d, const InitialCondition& ic) {
  validate(d);
  if (!std::isfinite(ic.x0) || !std::isfinite(ic.y0) || !std::isfinite(ic.yp0))
    throw ValidationError("initial_condition", "all values must be finite");
  if ((d.tag == ClassTag::III || d.tag == ClassTag::IV) && d.m >= 1 && ic.yp0 == 0.0)
    throw ValidationError("initial_condition", "yp0 must be nonzero when m >= 1");
}

Expr integrating_factor(const ClassDescriptor& d, const Anchor& anchor) {
  return simplify(exp(integral_of_a(d, anchor)));
}

Expr residual_expr(const ClassDescriptor& d, const Anchor& anchor) {
  const Expr x = Expr::var("x"), y = Expr::var("y"), p = Expr::var("p"), q = Expr::var("q");
  const Expr ia = integral_of_a(d, anchor);
  const double m = d.m;
  Expr out;
  switch (d.tag) {
    case ClassTag::I:
      out = q + d.a * p - d.F - p * d.G * exp(-ia);
      break;
    case ClassTag::II:
      out = q + d.a * pow(p, 2.0) - d.F * exp(-ia) - p * d.G;
      break;
    case ClassTag::III: {
      const Expr f2 = substitute(substitute(d.F2, "u", y), "v", p * exp(ia));
      out = pow(p, m) * q + d.a * pow(p, m + 1) - exp(Expr(-(m + 2)) * ia) * f2;
      break;
    }
    case ClassTag::IV: {
      const Expr f2 = substitute(substitute(d.F2, "u", x), "v", p * exp(ia));
      out = pow(p, m) * q + d.a * pow(p, m + 2) - exp(Expr(-(m + 1)) * ia) * f2;
      break;
    }
  }
  return simplify(out);
}

Expr second_derivative_expr(const ClassDescriptor& d, const Anchor& anchor) {
  const Expr x = Expr::var("x"), y = Expr::var("y"), p = Expr::var("p");
  const Expr ia = integral_of_a(d, anchor);
  const double m = d.m;
  Expr out;
  switch (d.tag) {
    case ClassTag::I:
      out = d.F + p * d.G * exp(-ia) - d.a * p;
      break;
    case ClassTag::II:
      out = d.F * exp(-ia) + p * d.G - d.a * pow(p, 2.0);
      break;
    case ClassTag::III: {
      const Expr f2 = substitute(substitute(d.F2, "u", y), "v", p * exp(ia));
      const Expr rhs = exp(Expr(-(m + 2)) * ia) * f2;
      out = d.m == 0 ? rhs - d.a * p : rhs / pow(p, m) - d.a * p;
      break;
    }
    case ClassTag::IV: {
      const Expr f2 = substitute(substitute(d.F2, "u", x), "v", p * exp(ia));
      const Expr rhs = exp(Expr(-(m + 1)) * ia) * f2;
      out = (d.m == 0 ? rhs : rhs / pow(p, m)) - d.a * pow(p, 2.0);
      break;
    }
  }
  return simplify(out);
}

}  // namespace odered
