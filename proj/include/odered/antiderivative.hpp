/**
 * @file antiderivative.hpp
 * @brief Anchored antiderivatives: a finite rule table for closed forms with
 *        cached adaptive quadrature as the fallback.
 */
#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "odered/expr.hpp"

namespace odered {

/// Absolute tolerance used for every numeric-mode antiderivative.
inline constexpr double kAntiderivativeTol = 1e-12;
/// Relative noise assumed for integrands that contain numeric calls.
inline constexpr double kNestedNoise = 1e-10;

/**
 * t -> integral of the integrand from base_point to t.
 *
 * value(base_point) == 0 always. When the rule table applies, closed_form()
 * holds an unanchored antiderivative C(t) and value(t) = C(t) - C(base).
 * Otherwise values come from adaptive quadrature started at the nearest
 * previously computed point, so marching evaluations (ODE stages) only
 * integrate over short panels. The cache is internally synchronized.
 */
class Antiderivative : public Function, public std::enable_shared_from_this<Antiderivative> {
 public:
  Antiderivative(Expr integrand, std::string var, double base_point);

  [[nodiscard]] const Expr& integrand() const { return integrand_; }
  [[nodiscard]] const std::string& variable() const { return var_; }
  [[nodiscard]] double base_point() const { return base_; }
  [[nodiscard]] const std::optional<Expr>& closed_form() const { return closed_; }

  /// Throws special::QuadratureError when quadrature fails to converge.
  [[nodiscard]] double value(double t) const override;
  [[nodiscard]] std::string name() const override;
  [[nodiscard]] Expr derivative(const Expr& arg) const override;
  [[nodiscard]] bool numeric() const override { return !closed_.has_value(); }

  /// The anchored antiderivative applied to `arg`: the simplified
  /// C(arg) - C(base) in closed mode, an opaque call node otherwise.
  [[nodiscard]] Expr at(const Expr& arg) const;

 private:
  Expr integrand_;
  std::string var_;
  double base_;
  std::optional<Expr> closed_;
  mutable std::mutex mu_;
  mutable std::map<double, double> cache_;
};

std::shared_ptr<const Antiderivative> antiderive(const Expr& e, const std::string& var,
                                                 double base_point);

/// Closed-form antiderivative from the rule table (powers, 1/t, exp/sin/cos of
/// linear arguments, linearity, constant multiples, finite Laurent
/// polynomials, c D'/D), or nullopt. `base_point`
/// picks the branch of ln|L| for reciprocal-linear integrands.
std::optional<Expr> integrate_rules(const Expr& e, const std::string& var, double base_point);

}  // namespace odered
