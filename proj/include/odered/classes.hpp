/**
 * @file classes.hpp
 * @brief The four reducible classes of second-order equations.
 *
 * Class I    y'' + a(x) y' = F(x) + y' G(y) e^{-int a dx}
 * Class II   y'' + a(y) y'^2 = F(x) e^{-int a dy} + y' G(y)
 * Class III  y'^m y'' + a(x) y'^{m+1} = e^{-(m+2) int a dx} F2(y, y' e^{int a dx})
 * Class IV   y'^m y'' + a(y) y'^{m+2} = e^{-(m+1) int a dy} F2(x, y' e^{int a dy})
 *
 * F2 is written in the formal arguments u and v. Every integral is taken from
 * an anchor point, normally the initial condition, so e^{int a} = 1 there.
 */
#pragma once

#include <stdexcept>
#include <string>

#include "odered/expr.hpp"

namespace odered {

enum class ClassTag { I, II, III, IV };

std::string to_string(ClassTag t);
/// Accepts "I".."IV" and "1".."4".
ClassTag class_tag_from_string(const std::string& s);

/// Names the offending descriptor field.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string field, const std::string& msg)
      : std::runtime_error(field + ": " + msg), field_(std::move(field)) {}
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ClassDescriptor {
  ClassTag tag = ClassTag::I;
  int m = 0;
  Expr a;   // in x (I, III) or y (II, IV)
  Expr F;   // in x (I, II)
  Expr G;   // in y (I, II)
  Expr F2;  // in u, v (III, IV)

  /// Variable of a(.): "x" or "y".
  [[nodiscard]] const char* a_variable() const;
};

struct InitialCondition {
  double x0 = 0.0;
  double y0 = 0.0;
  double yp0 = 0.0;
};

struct Anchor {
  double x0 = 0.0;
  double y0 = 0.0;
};

/// Throws ValidationError naming the field with a forbidden variable or bad m.
void validate(const ClassDescriptor& d);
/// validate(d) plus the initial-condition invariants.
void validate(const ClassDescriptor& d, const InitialCondition& ic);

/// Left minus right of the class equation, an expression in x, y, p = y',
/// q = y''. Integrals of a are anchored at `anchor`.
Expr residual_expr(const ClassDescriptor& d, const Anchor& anchor);

/// y'' solved from the class equation, an expression in x, y, p.
Expr second_derivative_expr(const ClassDescriptor& d, const Anchor& anchor);

/// e^{int a} with the integral taken from the anchor, in the variable of a.
Expr integrating_factor(const ClassDescriptor& d, const Anchor& anchor);

}  // namespace odered
