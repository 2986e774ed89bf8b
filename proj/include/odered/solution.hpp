/**
 * @file solution.hpp
 * @brief Closed-form solution of a reduced equation where one of the solver
 *        routes applies; otherwise the caller integrates numerically.
 */
#pragma once

#include <optional>
#include <string>

#include "odered/reduction.hpp"

namespace odered {

struct SolutionSummary {
  std::string method;                       // route that produced the forms, or "numeric"
  std::optional<ImplicitSolution> implicit;  // left(y) = right(x) + B
  std::optional<Expr> explicit_y;            // y(x) when it could be isolated
  bool closed = false;                       // no numeric calls anywhere
  std::string failure;                       // why no closed form was found

  /// "y = ..." or the implicit relation when closed, "numeric" otherwise.
  [[nodiscard]] std::string text() const;
};

/// y isolated from left(y) = right(x) + B when left is y or ln(y).
std::optional<Expr> isolate(const ImplicitSolution& s);

/**
 * Classes I and II: the reduced rhs is classified and solved as linear,
 * separable or Bernoulli. Classes III and IV: the implicit quadrature
 * relation. Never throws for solver failures; they land in `failure`.
 */
SolutionSummary solve_reduced(const ReducedODE& r, const ReduceOptions& opt = {});

}  // namespace odered
