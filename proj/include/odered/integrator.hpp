/**
 * @file integrator.hpp
 * @brief Dormand-Prince 5(4) with PI step-size control, grid output and
 *        continuous extension.
 */
#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace odered {

/// Integration stopped: step underflow or the blow-up guard fired. location()
/// is the last accepted abscissa.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& msg, double location)
      : std::runtime_error(msg), location_(location) {}
  [[nodiscard]] double location() const noexcept { return location_; }

 private:
  double location_;
};

struct IntegratorStats {
  long steps = 0;
  long rejected = 0;
  long evaluations = 0;
};

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  double max_abs = 1e12;  // blow-up guard on |y| and |y'|
  long max_steps = 200000;
};

/// dy = f(x, y) for a system of fixed dimension. May throw DomainError or
/// QuadratureError; the stepper treats that as a rejected trial step.
using OdeRhs = std::function<void(double x, const double* y, double* dy)>;

class Dopri5 {
 public:
  Dopri5(OdeRhs f, std::vector<double> y0, double x0, OdeOptions opt = {});

  /// One accepted step towards `limit`, never past it. Throws
  /// IntegrationError on underflow, step budget or blow-up.
  void step(double limit);
  /// Accepted steps until x() == target exactly.
  void advance_to(double target);

  [[nodiscard]] double x() const { return x_; }
  [[nodiscard]] const std::vector<double>& y() const { return y_; }
  [[nodiscard]] const std::vector<double>& dy() const { return k1_; }
  [[nodiscard]] const IntegratorStats& stats() const { return stats_; }

  /// Continuous extension over the last accepted step [x_prev, x].
  [[nodiscard]] double x_prev() const { return x_old_; }
  [[nodiscard]] double dense(std::size_t i, double at) const;
  /// Coefficients of the last step's interpolant, 5 per component.
  [[nodiscard]] const std::vector<double>& dense_coefficients() const { return cont_; }

 private:
  bool try_step(double h, double& err);
  double initial_step(double dir) const;
  void eval(double x, const double* y, double* dy);

  OdeRhs f_;
  std::size_t n_;
  double x_;
  double x_old_;
  double h_ = 0.0;
  double h_last_ = 0.0;
  double err_old_ = 1e-4;
  bool reject_last_ = false;
  OdeOptions opt_;
  IntegratorStats stats_;
  std::vector<double> y_, k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_, cont_;
};

/// Integrates from grid.front() and returns the state at every grid point
/// (grid must be strictly monotone). Steps are clipped to land on grid points.
std::vector<std::vector<double>> integrate_on_grid(const OdeRhs& f, std::vector<double> y0,
                                                   const std::vector<double>& grid,
                                                   const OdeOptions& opt,
                                                   IntegratorStats* stats = nullptr);

/// `count` evenly spaced points from a to b inclusive.
std::vector<double> uniform_grid(double a, double b, int count);

}  // namespace odered
