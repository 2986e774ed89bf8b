/**
 * @file verify.hpp
 * @brief Two-route check of a reduction: integrate the second-order class
 *        equation directly and the reduced first-order equation, compare the
 *        trajectories and evaluate the class residual along the reduced one.
 */
#pragma once

#include <string>
#include <vector>

#include "odered/classes.hpp"
#include "odered/integrator.hpp"
#include "odered/reduction.hpp"
#include "odered/solvers.hpp"

namespace odered {

struct Trajectory {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> yp;  // y' (the first-order route fills it from the rhs)
  IntegratorStats stats;
};

inline constexpr int kGridPoints = 101;

/// (y, y') for the class equation with y'' solved symbolically; 101 grid points.
Trajectory integrate_second_order(const ClassDescriptor& d, const InitialCondition& ic, double x1,
                                  double tol, int points = kGridPoints);

/// y' = r.rhs(x, y) from (x0, y0).
Trajectory integrate_first_order(const ReducedODE& r, double x1, double tol,
                                 int points = kGridPoints);

/// y'' along solutions of the reduced equation: rhs_x + rhs * rhs_y.
Expr reduced_second_derivative(const ReducedODE& r);

/// Residual of the class equation at one point, with y' and y'' taken from
/// the reduced equation.
double residual_at(const ClassDescriptor& d, const ReducedODE& r, double x, double y);

/// sup over the grid of |residual_expr| with y' = rhs and y'' from the total
/// derivative of rhs. Throws DomainError naming the first failing point.
double residual_on_grid(const ClassDescriptor& d, const ReducedODE& r, const Trajectory& t);

struct Tolerances {
  double integrator = 1e-10;
  double residual = 1e-6;
  double trajectory = 1e-6;
  bool operator==(const Tolerances&) const = default;
};

struct VerificationReport {
  double x0 = 0.0;
  double x1 = 0.0;
  double residual_sup = -1.0;    // -1 when not computed
  double trajectory_dev = -1.0;  // -1 when not computed
  bool pass = false;
  std::vector<std::string> diagnostics;
  Tolerances tolerances;
  bool operator==(const VerificationReport&) const = default;
};

struct Comparison {
  VerificationReport report;
  std::optional<ReducedODE> reduced;
  std::optional<Trajectory> direct;
  std::optional<Trajectory> reduced_route;
  std::vector<double> residuals;  // per grid point of the reduced route
};

/// Runs reduce, both integrators and the residual; a failing route is
/// recorded in the diagnostics and does not stop the other one.
Comparison compare(const ClassDescriptor& d, const InitialCondition& ic, double x1,
                   const Tolerances& tol = {}, const ReduceOptions& opt = {});

/// Integrates the canonical equation from the image of (t0, y0) up to the image
/// of t_hi, maps back and compares with direct integration of `orig` at the
/// mapped abscissae. Returns the sup deviation in y.
double chain_round_trip(const CanonicalChain& c, const OdeRhs& orig, double y0, double tol = 1e-11,
                        int points = 21);

/// sup |y_a - y_b| of the direct trajectories of two descriptors from the same
/// initial condition.
double direct_deviation(const ClassDescriptor& a, const ClassDescriptor& b,
                        const InitialCondition& ic, double x1, double tol = 1e-11);

}  // namespace odered
