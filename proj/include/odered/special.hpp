/**
 * @file special.hpp
 * @brief Low-level numerics: Jacobi elliptic functions, adaptive Simpson
 *        quadrature and bracketed scalar root finding.
 */
#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace odered::special {

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& msg, double lo, double hi)
      : std::runtime_error(msg), lo_(lo), hi_(hi) {}
  /// Subinterval where refinement gave up.
  [[nodiscard]] double lo() const noexcept { return lo_; }
  [[nodiscard]] double hi() const noexcept { return hi_; }

 private:
  double lo_;
  double hi_;
};

class RootError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// sn, cn, dn at argument u for modulus k (k is the modulus, not m = k^2).
struct JacobiTriple {
  double sn = 0.0;
  double cn = 1.0;
  double dn = 1.0;
  double u = 0.0;
  double k = 0.0;
};

/// Throws std::invalid_argument for k outside [0, 1].
JacobiTriple jacobi(double u, double k);

/// Incomplete elliptic integral of the first kind F(phi | k) by quadrature.
double elliptic_f(double phi, double k);

inline constexpr int kMaxQuadDepth = 60;

/**
 * Adaptive Simpson quadrature with Richardson correction. The requested
 * absolute tolerance is split across subintervals; recursion depth is capped
 * at kMaxQuadDepth and hitting the cap throws QuadratureError naming the
 * subinterval. a > b is allowed and flips the sign. `noise` is the relative
 * noise level of f itself (e.g. when f contains another numeric quadrature or
 * an ODE solution); panels whose Richardson estimate falls below it are accepted.
 */
double quad_adaptive(const std::function<double(double)>& f, double a, double b, double tol,
                     double noise = 0.0);

/**
 * Bracketed hybrid bisection/secant (Illinois variant of regula falsi).
 * Requires f(lo) * f(hi) <= 0. Returns once |f(root)| <= tol or the bracket is
 * narrower than 1e-14 (relative to its magnitude).
 */
double find_root(const std::function<double(double)>& f, double lo, double hi, double tol);

}  // namespace odered::special
