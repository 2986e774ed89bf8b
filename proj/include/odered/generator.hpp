/**
 * @file generator.hpp
 * @brief Seeded random problem families for property checks: class
 *        descriptors, paired descriptors for the cross-class equivalences and
 *        second-kind Abel instances.
 *
 * Component functions are drawn from polynomials of degree <= 3 with
 * coefficients in [-2, 2], c/t and c e^{c' t} with |c|, |c'| <= 1.
 * Descriptors start at x0 = 1 and run over an interval of length 1; a draw is
 * kept only if the direct integration stays in y in [0.5, 10] with |y'| <= 50
 * (and |y'| >= 0.1 for classes III and IV, whose K = y'/(sE) must stay
 * away from zero).
 */
#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "odered/classes.hpp"

namespace odered {

struct GeneratedProblem {
  ClassDescriptor d;
  InitialCondition ic;
  double x1 = 2.0;
  std::string text;  // printable description of the draw
};

struct EquivalentPair {
  GeneratedProblem first;   // class I or II
  GeneratedProblem second;  // class III or IV with m = 0
};

struct AbelInstance {
  bool cubic = true;
  // dep' = (f3 y^3 + f2 y^2 + f1 y + f0)/(g1 y + g0); f3 = 0 for the quadratic kind.
  Expr f3, f2, f1, f0, g1, g0;
  double t0 = 0.0;
  double t1 = 0.5;
  double y0 = 1.0;
  std::string text;
};

class ProblemGenerator {
 public:
  explicit ProblemGenerator(std::uint64_t seed) : rng_(seed) {}

  /// A descriptor of the given class passing the admissibility filter.
  GeneratedProblem descriptor(ClassTag tag);
  /// (I, III) when `first` is I, (II, IV) when it is II.
  EquivalentPair equivalent_pair(ClassTag first);
  /// Sign conditions of the chains hold on [t0, t1] and y stays bounded.
  AbelInstance abel(bool cubic);

  /// Component function of `var` as expression text.
  std::string component(const std::string& var);
  std::string polynomial(const std::string& var, int max_degree);

 private:
  double uniform(double a, double b);
  double coefficient();
  bool admissible(const GeneratedProblem& p);

  std::mt19937_64 rng_;
};

}  // namespace odered
