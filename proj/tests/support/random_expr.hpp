// Random expression generator shared by the unit and acceptance suites.
//
// Trees are built from a "positive" sub-grammar so that ln, sqrt, division
// and general powers stay defined for x in [0.5, 2]; every operator the
// parser knows about except tan appears somewhere in the grammar.
#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "odered/expr.hpp"

namespace odered::testing {

class ExprGen {
 public:
  explicit ExprGen(std::uint64_t seed, std::string var = "x") : rng_(seed), var_(std::move(var)) {}

  /// Any-signed expression of bounded depth.
  Expr any(int depth) {
    if (depth <= 0) return leaf();
    switch (pick(10)) {
      case 0: return any(depth - 1) + any(depth - 1);
      case 1: return any(depth - 1) - any(depth - 1);
      case 2: return any(depth - 1) * any(depth - 1);
      case 3: return any(depth - 1) / positive(depth - 1);
      case 4: return -any(depth - 1);
      case 5: return sin(any(depth - 1));
      case 6: return cos(any(depth - 1));
      case 7: return atan(any(depth - 1));
      case 8: return ln(positive(depth - 1));
      default: return positive(depth);
    }
  }

  /// Expression strictly positive wherever it is defined.
  Expr positive(int depth) {
    if (depth <= 0) return pick(2) == 0 ? Expr::var(var_) : Expr::constant(coef(0.25, 2.0));
    switch (pick(8)) {
      case 0: return exp(bounded(depth - 1));
      case 1: return Expr(1.0) + pow(any(depth - 1), 2.0);
      case 2: return positive(depth - 1) * positive(depth - 1);
      case 3: return positive(depth - 1) / positive(depth - 1);
      case 4: return positive(depth - 1) + positive(depth - 1);
      case 5: return sqrt(positive(depth - 1));
      case 6: return pow(positive(depth - 1), Expr::constant(small_exponent()));
      default: return pow(positive(depth - 1), bounded(depth - 1));
    }
  }

  double coef(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  std::mt19937_64& rng() { return rng_; }

 private:
  Expr leaf() {
    if (pick(3) == 0) return Expr::constant(coef(-2.0, 2.0));
    return Expr::var(var_);
  }

  // Keeps exponents from overflowing: |atan| < pi/2.
  Expr bounded(int depth) { return atan(any(depth)); }

  double small_exponent() {
    static constexpr double kChoices[] = {2.0, 3.0, -1.0, 0.5, -0.5, 1.5, -2.0};
    return kChoices[pick(7)];
  }

  std::mt19937_64 rng_;
  std::string var_;
};

}  // namespace odered::testing
