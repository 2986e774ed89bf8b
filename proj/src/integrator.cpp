#include "odered/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace odered {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Shampine), fourth order.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafe = 0.9;
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;

std::string where(double x) {
  std::ostringstream s;
  s.precision(10);
  s << x;
  return s.str();
}

}  // namespace

Dopri5::Dopri5(OdeRhs f, std::vector<double> y0, double x0, OdeOptions opt)
    : f_(std::move(f)), n_(y0.size()), x_(x0), x_old_(x0), opt_(opt), y_(std::move(y0)) {
  for (auto* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ytmp_, &ynew_}) v->assign(n_, 0.0);
  cont_.assign(5 * n_, 0.0);
  eval(x_, y_.data(), k1_.data());
  for (std::size_t i = 0; i < n_; ++i) {
    if (!std::isfinite(k1_[i]))
      throw IntegrationError("right-hand side not finite at the initial point x = " + where(x_), x_);
    cont_[i] = y_[i];
  }
}

void Dopri5::eval(double x, const double* y, double* dy) {
  ++stats_.evaluations;
  f_(x, y, dy);
}

double Dopri5::initial_step(double dir) const {
  auto norm = [this](const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double sk = opt_.atol + opt_.rtol * std::abs(y_[i]);
      s += (v[i] / sk) * (v[i] / sk);
    }
    return std::sqrt(s / static_cast<double>(n_));
  };
  const double dnf = norm(k1_);
  const double dny = norm(y_);
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
  // Explicit Euler probe for a second-derivative estimate.
  std::vector<double> y1(n_), f1(n_);
  for (std::size_t i = 0; i < n_; ++i) y1[i] = y_[i] + dir * h * k1_[i];
  try {
    f_(x_ + dir * h, y1.data(), f1.data());
  } catch (const std::exception&) {
    return h * 1e-3;
  }
  std::vector<double> diff(n_);
  for (std::size_t i = 0; i < n_; ++i) diff[i] = f1[i] - k1_[i];
  const double der2 = norm(diff) / h;
  const double der12 = std::max(der2, dnf);
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  return std::min(100.0 * h, h1);
}

bool Dopri5::try_step(double h, double& err) {
  const std::size_t n = n_;
  const double x = x_;
  try {
    for (std::size_t i = 0; i < n; ++i) ytmp_[i] = y_[i] + h * a21 * k1_[i];
    eval(x + c2 * h, ytmp_.data(), k2_.data());
    for (std::size_t i = 0; i < n; ++i) ytmp_[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
    eval(x + c3 * h, ytmp_.data(), k3_.data());
    for (std::size_t i = 0; i < n; ++i)
      ytmp_[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
    eval(x + c4 * h, ytmp_.data(), k4_.data());
    for (std::size_t i = 0; i < n; ++i)
      ytmp_[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
    eval(x + c5 * h, ytmp_.data(), k5_.data());
    for (std::size_t i = 0; i < n; ++i)
      ytmp_[i] = y_[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] +
                              a65 * k5_[i]);
    eval(x + h, ytmp_.data(), k6_.data());
    for (std::size_t i = 0; i < n; ++i)
      ynew_[i] = y_[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] +
                              a76 * k6_[i]);
    eval(x + h, ynew_.data(), k7_.data());
  } catch (const std::exception&) {
    return false;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] +
                          e7 * k7_[i]);
    const double sk = opt_.atol + opt_.rtol * std::max(std::abs(y_[i]), std::abs(ynew_[i]));
    sum += (e / sk) * (e / sk);
    if (!std::isfinite(ynew_[i]) || !std::isfinite(k7_[i])) return false;
  }
  err = std::sqrt(sum / static_cast<double>(n));
  return std::isfinite(err);
}

void Dopri5::step(double limit) {
  const double dist = limit - x_;
  if (dist == 0.0) return;
  const double dir = dist > 0.0 ? 1.0 : -1.0;
  if (h_ == 0.0) h_ = initial_step(dir);
  double h = std::min(std::abs(h_), std::abs(dist));
  for (;;) {
    if (stats_.steps + stats_.rejected >= opt_.max_steps)
      throw IntegrationError("step budget exhausted near x = " + where(x_), x_);
    const double floor_h = 1e-14 * std::max(1.0, std::abs(x_));
    if (h < floor_h)
      throw IntegrationError("step size underflow near x = " + where(x_) + " (suspected singularity)",
                             x_);
    bool landing = std::abs(dist) <= 1.01 * h;
    if (landing) h = std::abs(dist);
    double err = 0.0;
    if (!try_step(dir * h, err)) {
      ++stats_.rejected;
      h *= 0.25;
      reject_last_ = true;
      continue;
    }
    const double fac11 = std::pow(err, kExpo);
    if (err <= 1.0) {
      double fac = fac11 / std::pow(err_old_, kBeta);
      fac = std::clamp(fac / kSafe, 0.1, 5.0);
      double hnew = h / fac;
      if (reject_last_) hnew = std::min(hnew, h);
      err_old_ = std::max(err, 1e-4);
      reject_last_ = false;
      // Continuous extension before the state moves on.
      for (std::size_t i = 0; i < n_; ++i) {
        const double ydiff = ynew_[i] - y_[i];
        const double bspl = dir * h * k1_[i] - ydiff;
        cont_[i] = y_[i];
        cont_[n_ + i] = ydiff;
        cont_[2 * n_ + i] = bspl;
        cont_[3 * n_ + i] = ydiff - dir * h * k7_[i] - bspl;
        cont_[4 * n_ + i] = dir * h *
                            (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] + d6 * k6_[i] +
                             d7 * k7_[i]);
      }
      x_old_ = x_;
      h_last_ = dir * h;
      x_ = landing ? limit : x_ + dir * h;
      y_.swap(ynew_);
      k1_.swap(k7_);
      ++stats_.steps;
      h_ = hnew;
      for (std::size_t i = 0; i < n_; ++i) {
        if (std::abs(y_[i]) > opt_.max_abs || std::abs(k1_[i]) > opt_.max_abs)
          throw IntegrationError("solution exceeds 1e12 near x = " + where(x_), x_);
      }
      return;
    }
    ++stats_.rejected;
    reject_last_ = true;
    h /= std::min(5.0, fac11 / kSafe);
  }
}

void Dopri5::advance_to(double target) {
  while (x_ != target) step(target);
}

double Dopri5::dense(std::size_t i, double at) const {
  if (h_last_ == 0.0) return y_[i];
  const double theta = (at - x_old_) / h_last_;
  const double theta1 = 1.0 - theta;
  return cont_[i] +
         theta * (cont_[n_ + i] +
                  theta1 * (cont_[2 * n_ + i] +
                            theta * (cont_[3 * n_ + i] + theta1 * cont_[4 * n_ + i])));
}

std::vector<std::vector<double>> integrate_on_grid(const OdeRhs& f, std::vector<double> y0,
                                                   const std::vector<double>& grid,
                                                   const OdeOptions& opt, IntegratorStats* stats) {
  std::vector<std::vector<double>> out;
  if (grid.empty()) return out;
  out.reserve(grid.size());
  Dopri5 solver(f, std::move(y0), grid.front(), opt);
  out.push_back(solver.y());
  for (std::size_t g = 1; g < grid.size(); ++g) {
    solver.advance_to(grid[g]);
    out.push_back(solver.y());
  }
  if (stats) *stats = solver.stats();
  return out;
}

std::vector<double> uniform_grid(double a, double b, int count) {
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) g[static_cast<std::size_t>(i)] = a + (b - a) * i / (count - 1);
  if (count > 0) g.back() = b;
  return g;
}

}  // namespace odered
