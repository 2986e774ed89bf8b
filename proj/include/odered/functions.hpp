/**
 * @file functions.hpp
 * @brief Call-node functions: Jacobi elliptic sn/cn/dn and the lazily
 *        integrated solution of a scalar first-order equation.
 */
#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "odered/expr.hpp"
#include "odered/integrator.hpp"

namespace odered {

enum class JacobiKind { Sn, Cn, Dn };

/// sn/cn/dn(., k) as a tree function; derivatives are expressed through the
/// sibling functions so differentiation stays symbolic.
class JacobiFunction : public Function {
 public:
  JacobiFunction(JacobiKind kind, double k);
  [[nodiscard]] std::string name() const override;
  [[nodiscard]] double value(double u) const override;
  [[nodiscard]] Expr derivative(const Expr& arg) const override;
  [[nodiscard]] JacobiKind kind() const { return kind_; }
  [[nodiscard]] double modulus() const { return k_; }

 private:
  JacobiKind kind_;
  double k_;
};

Expr jacobi_call(JacobiKind kind, double k, const Expr& arg);

/**
 * K(t) solving K' = rhs(t, K), K(t0) = K0, extended on demand in both
 * directions with Dopri5 and evaluated through its continuous extension.
 *
 * Failures (blow-up, step underflow, or K leaving (0, inf) when
 * require_positive is set) are remembered per direction; later requests past
 * the failure point throw DomainError naming it.
 */
class NumericSolution : public Function, public std::enable_shared_from_this<NumericSolution> {
 public:
  NumericSolution(std::string label, Expr rhs, std::string t_var, std::string k_var, double t0,
                  double k0, double tol = 1e-12, bool require_positive = false);

  [[nodiscard]] std::string name() const override { return label_; }
  [[nodiscard]] double value(double t) const override;
  [[nodiscard]] Expr derivative(const Expr& arg) const override;
  [[nodiscard]] bool numeric() const override { return true; }

  [[nodiscard]] const Expr& rhs() const { return rhs_; }
  [[nodiscard]] double t0() const { return t0_; }
  [[nodiscard]] double k0() const { return k0_; }
  [[nodiscard]] Expr at(const Expr& arg) const { return Expr::call(shared_from_this(), arg); }

 private:
  struct Segment {
    double a;  // start of the step (closer to t0)
    double b;
    double h;  // signed
    double c[5];
  };
  struct Branch {
    std::unique_ptr<Dopri5> solver;
    std::vector<Segment> segments;
    std::optional<std::string> failure;
    double failed_at = 0.0;
  };

  double extend_and_eval(Branch& br, double dir, double t) const;

  std::string label_;
  Expr rhs_;
  std::string t_var_;
  std::string k_var_;
  double t0_;
  double k0_;
  double tol_;
  bool require_positive_;
  mutable std::mutex mu_;
  mutable Branch fwd_;
  mutable Branch bwd_;
};

std::shared_ptr<const NumericSolution> numeric_solution(std::string label, Expr rhs,
                                                        std::string t_var, std::string k_var,
                                                        double t0, double k0, double tol = 1e-12,
                                                        bool require_positive = false);

}  // namespace odered
