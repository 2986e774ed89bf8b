/**
 * @file reduction.hpp
 * @brief Second-order class equations reduced to first-order equations by
 *        variation of the integration constant.
 *
 * Class I    y' = (H(x) + K(y) + A) e^{-int a dx},  H' = F e^{int a dx},  K' = G
 * Class II   y' = (H(x) + K(y) + A) e^{-int a dy},  H' = F,  K' = G e^{int a dy}
 * Class III  y' = s K(y) e^{-int a dx},  K^{m+1} K' = s^m F2(y, s K)
 * Class IV   y' = s K(x) e^{-int a dy},  K^m K' = s^{m+1} F2(x, s K)
 *
 * H and K vanish at the initial point (K = K0 for III/IV), so A = y'(x0).
 * s = sign(y'(x0)) when m + 1 is even (K then stays positive), else s = 1.
 */
#pragma once

#include <optional>
#include <string>
#include <utility>

#include "odered/classes.hpp"
#include "odered/expr.hpp"
#include "odered/solvers.hpp"

namespace odered {

class ReductionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReduceOptions {
  /// Riccati particular solution of the K-equation, in K's variable.
  std::optional<Expr> particular;
  /// Closed form for K supplied by the caller; checked at the anchor and
  /// against the K-equation before use.
  std::optional<Expr> k_closed;
  /// Implicit relation left(y) = right(x) + B supplied by the caller; checked
  /// against the reduced equation before use.
  std::optional<std::pair<Expr, Expr>> implicit;
  /// End of the working interval in x (used for particular-solution checks).
  std::optional<double> interval_end;
  double k_tol = 1e-12;
};

struct ReducedODE {
  ClassTag tag = ClassTag::I;
  int m = 0;
  InitialCondition ic;

  Expr rhs;           // y' as an expression in x and y
  Expr E;             // e^{-int a}, in the variable of a
  Expr H;             // classes I, II: in x
  Expr K;             // K in k_var (closed expression or numeric call)
  std::string k_var;  // "y" for I, II, III; "x" for IV
  Expr k_equation;    // classes III, IV: K' as an expression in (k_var, "K")
  FirstOrderForm k_form;
  std::string k_method;  // how K was obtained
  double A = 0.0;
  double K0 = 0.0;
  int branch = 1;
  std::string shape;  // rhs with K (and H) left symbolic, e.g. "K(y)/x"

  [[nodiscard]] bool closed() const { return !has_numeric_calls(rhs); }
  [[nodiscard]] std::string summary() const;
};

ReducedODE reduce_class1(const ClassDescriptor& d, const InitialCondition& ic,
                         const ReduceOptions& opt = {});
ReducedODE reduce_class2(const ClassDescriptor& d, const InitialCondition& ic,
                         const ReduceOptions& opt = {});
ReducedODE reduce_class3(const ClassDescriptor& d, const InitialCondition& ic,
                         const ReduceOptions& opt = {});
ReducedODE reduce_class4(const ClassDescriptor& d, const InitialCondition& ic,
                         const ReduceOptions& opt = {});
/// Validates and dispatches on d.tag.
ReducedODE reduce(const ClassDescriptor& d, const InitialCondition& ic,
                  const ReduceOptions& opt = {});

/**
 * Class III: int dy/(s K) = int e^{-int a dx} dx + B.
 * Class IV:  int e^{int a dy} dy = int s K dx + B.
 * When both quadratures have closed forms they are written unanchored and B
 * is fixed by the initial point; otherwise both sides are anchored and B = 0.
 */
ImplicitSolution implicit_solution(const ReducedODE& r, const ReduceOptions& opt = {});

}  // namespace odered
