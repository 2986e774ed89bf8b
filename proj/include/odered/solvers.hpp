/**
 * @file solvers.hpp
 * @brief Structural classification of first-order equations and the
 *        closed-form routes: separable, linear, Bernoulli, Riccati with a
 *        known particular solution, Abel canonical chains, homogeneous
 *        reductions and Jacobi inversion of elliptic integrals.
 *
 * Equations are written dep' = rhs(indep, dep). The variable names default to
 * x and y but every entry point takes them explicitly, since the K-equations
 * of classes III and IV use y or x as the independent variable.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "odered/classes.hpp"
#include "odered/expr.hpp"

namespace odered {

class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& msg, std::optional<double> location = std::nullopt)
      : std::runtime_error(msg), location_(location) {}
  [[nodiscard]] std::optional<double> location() const { return location_; }

 private:
  std::optional<double> location_;
};

enum class FormTag {
  Separable,
  Linear,
  Bernoulli,
  Riccati,
  AbelKind1,
  AbelKind2,
  Homogeneous,
  EllipticIntegral,
  General,
};

std::string to_string(FormTag t);

/// Region in which classification probes are drawn.
struct ProbeBox {
  double t_lo = 0.5;
  double t_hi = 1.5;
  double y_lo = 0.5;
  double y_hi = 1.5;
  std::uint64_t seed = 1;
};

struct FirstOrderForm {
  FormTag tag = FormTag::General;
  std::vector<FormTag> matches;  // every structure that fits, most specific first
  std::string indep = "x";
  std::string dep = "y";
  Expr rhs;

  Expr X, Y;                   // Separable: rhs = X(indep) * Y(dep)
  std::vector<Expr> coeffs;    // polynomial in dep: rhs = sum coeffs[k] dep^k
  int bernoulli_n = 0;         // Bernoulli: rhs = coeffs[1] dep + coeffs[n] dep^n
  std::vector<Expr> num;       // AbelKind2: numerator coefficients
  Expr g0, g1;                 // AbelKind2: denominator g1 dep + g0
  Expr ratio_fn;               // Homogeneous: rhs = ratio_fn(w = dep/indep)
  Expr h1;                     // EllipticIntegral: rhs = h1(indep) R(dep, sqrt(P(dep)))
  Expr R;                      // EllipticIntegral: in dep and "r" = sqrt(P)
  std::vector<double> P;       // EllipticIntegral: P coefficients, ascending

  /// The payload rebuilt as an expression in (indep, dep).
  [[nodiscard]] Expr reassemble() const;
};

FirstOrderForm classify_first_order(const Expr& rhs, const std::string& indep = "x",
                                    const std::string& dep = "y", const ProbeBox& box = {});

/// left(dep) = right(indep) + B.
struct ImplicitSolution {
  std::string left_var = "y";
  std::string right_var = "x";
  Expr left;
  Expr right;
  double B = 0.0;

  [[nodiscard]] double residual(double x, double y) const;
  /// dep at `x` by bracketed root finding on [lo, hi].
  [[nodiscard]] double solve(double x, double lo, double hi, double tol = 1e-13) const;
  [[nodiscard]] std::string str() const;
};

/// dep' = X(indep) Y(dep): int dy/Y = int X dx + B, anchored (B = 0).
ImplicitSolution solve_separable(const Expr& X, const Expr& Y, const Anchor& ic,
                                 const std::string& indep = "x", const std::string& dep = "y");

/// dep' = p dep + q by the integrating factor, anchored at ic.
Expr solve_linear(const Expr& p, const Expr& q, const Anchor& ic, const std::string& indep = "x");

/// dep' = p dep + q dep^n (n >= 2) via w = dep^{1-n}. When `check_until` is
/// given, throws SolverError with the location if w reaches 0 on the way.
Expr solve_bernoulli(const Expr& p, const Expr& q, int n, const Anchor& ic,
                     const std::string& indep = "x",
                     std::optional<double> check_until = std::nullopt);

/// dep' = f dep^2 + g dep + h given a particular solution y_part. The
/// particular solution is checked on [ic.x0, check_until] at 20 probes.
Expr solve_riccati_with_particular(const Expr& f, const Expr& g, const Expr& h,
                                   const Expr& y_part, const Anchor& ic, double check_until,
                                   const std::string& indep = "x");

struct ChainStep {
  std::string description;
  std::vector<std::pair<std::string, Expr>> coefficients;
};

/**
 * Variable changes from an Abel equation of the second kind to a canonical
 * form: w'_s = w^3 + k(s) for the cubic numerator, w w'_s = w + k(s) for the
 * quadratic one. s is anchored at t0 (s(t0) = 0).
 */
class CanonicalChain {
 public:
  enum class Kind { Cubic, Quadratic };

  Kind kind = Kind::Cubic;
  std::string indep = "x";
  double t0 = 0.0;
  double t_lo = 0.0;
  double t_hi = 1.0;
  std::vector<ChainStep> steps;
  Expr g0, g1;
  Expr sigma;   // cubic only: shift
  Expr E;       // scaling factor
  Expr S;       // s(t)
  Expr k_of_t;  // k as a function of the original independent variable

  [[nodiscard]] std::pair<double, double> forward(double t, double y) const;  // -> (s, w)
  [[nodiscard]] std::pair<double, double> inverse(double s, double w) const;  // -> (t, y)
  [[nodiscard]] double t_of_s(double s) const;
  [[nodiscard]] double k(double s) const;
  /// Right-hand side of the canonical equation w'_s.
  [[nodiscard]] double canonical_rhs(double s, double w) const;
  [[nodiscard]] std::string canonical_text() const;
};

/// dep' = (f3 dep^3 + f2 dep^2 + f1 dep + f0)/(g1 dep + g0). Requires g1 and
/// the transformed cubic coefficient to keep one sign on [t_lo, t_hi].
CanonicalChain abel2_cubic_to_canonical(const Expr& f3, const Expr& f2, const Expr& f1,
                                        const Expr& f0, const Expr& g1, const Expr& g0,
                                        double t0, double t_lo, double t_hi,
                                        const std::string& indep = "x");

/// dep' = (f2 dep^2 + f1 dep + f0)/(g1 dep + g0). f2 may vanish; g1 and the
/// transformed linear coefficient must keep one sign on [t_lo, t_hi].
CanonicalChain abel2_quadratic_to_canonical(const Expr& f2, const Expr& f1, const Expr& f0,
                                            const Expr& g1, const Expr& g0, double t0,
                                            double t_lo, double t_hi,
                                            const std::string& indep = "x");

/**
 * K' = f((a y + b K + c)/(alpha y + beta K + gamma)) reduced to a separable
 * equation. Case 1 (Delta = a beta - b alpha != 0): u = y - y_shift,
 * w = (K - k_shift)/u, u w'_u = f~(w) - w. Case 2 (Delta = 0, b != 0):
 * v = a y + b K + c. Case 3 (Delta = 0, beta != 0): v = alpha y + beta K + gamma.
 */
struct HomogeneousReduction {
  int case_id = 1;
  double y_shift = 0.0;
  double k_shift = 0.0;
  std::string indep;  // "u" (case 1) or "y"
  std::string dep;    // "w" (case 1) or "v"
  Expr separable_rhs;  // new dep' in (indep, dep)
  Expr f_tilde;        // case 1 only, in w
  double alpha = 0, beta = 0, gamma = 0, a = 0, b = 0, c = 0;

  [[nodiscard]] std::pair<double, double> forward(double y, double K) const;
  [[nodiscard]] std::pair<double, double> inverse(double s, double z) const;
};

/// `f` is an expression in the ratio variable "r".
HomogeneousReduction homogeneous_reduce(const Expr& f, double alpha, double beta, double gamma,
                                        double a, double b, double c);

struct EllipticPayload {
  Expr h1;                // in u
  std::vector<double> P;  // ascending coefficients in v, degree 3 or 4
  Expr R;                 // remaining rational factor, in v and "r" = sqrt(P(v))
  std::optional<double> modulus;  // set when P = (1 - v^2)(1 - k^2 v^2) and R = r
};

/// Recognizes F(u, v) = h1(u) R(v, sqrt(P(v))) with deg P in {3, 4}.
std::optional<EllipticPayload> elliptic_recognize(const Expr& F2);

/// K(t) = sn(int h1 + A, k) with A = F(asin K0 | k), for K' = h1(t) sqrt(P(K))
/// and the Jacobi quartic. Valid while int h1 + A stays in [-K(k), K(k)];
/// throws SolverError for unsupported payloads (cubic P, other quartics).
Expr elliptic_solve(const EllipticPayload& e, const Anchor& ic, const std::string& indep,
                    double* A_out = nullptr);

/// Product/quotient of factors with the explicit powers of `var` merged into
/// one, times var^extra_power. Other factors are kept as they are.
Expr combine_var_powers(const Expr& e, const std::string& var, double extra_power = 0.0);

/// Largest interval [lo, hi] containing `from` on which `e` evaluates,
/// scanned on `samples` points towards each end of [a, b].
std::pair<double, double> evaluable_range(const Expr& e, const std::string& var, double from,
                                          double a, double b, int samples = 2001);

}  // namespace odered
