#include "odered/verify.hpp"

#include <cmath>
#include <sstream>

#include "odered/special.hpp"

namespace odered {

namespace {

std::string num(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

void require_finite(const Trajectory& t, const char* route) {
  for (std::size_t i = 0; i < t.x.size(); ++i)
    if (!std::isfinite(t.y[i]) || (!t.yp.empty() && !std::isfinite(t.yp[i])))
      throw DomainError(std::string(route) + " trajectory is not finite at x = " + num(t.x[i]));
}

}  // namespace

Trajectory integrate_second_order(const ClassDescriptor& d, const InitialCondition& ic, double x1,
                                  double tol, int points) {
  const Expr q = second_derivative_expr(d, {ic.x0, ic.y0});
  OdeRhs f = [q](double x, const double* s, double* ds) {
    ds[0] = s[1];
    ds[1] = eval(q, Env{{"x", x}, {"y", s[0]}, {"p", s[1]}});
  };
  OdeOptions opt;
  opt.rtol = opt.atol = tol;
  Trajectory t;
  t.x = uniform_grid(ic.x0, x1, points);
  const auto ys = integrate_on_grid(f, {ic.y0, ic.yp0}, t.x, opt, &t.stats);
  for (const auto& s : ys) {
    t.y.push_back(s[0]);
    t.yp.push_back(s[1]);
  }
  require_finite(t, "direct");
  return t;
}

Trajectory integrate_first_order(const ReducedODE& r, double x1, double tol, int points) {
  const Expr rhs = r.rhs;
  OdeRhs f = [rhs](double x, const double* s, double* ds) {
    ds[0] = eval(rhs, Env{{"x", x}, {"y", s[0]}});
  };
  OdeOptions opt;
  opt.rtol = opt.atol = tol;
  Trajectory t;
  t.x = uniform_grid(r.ic.x0, x1, points);
  const auto ys = integrate_on_grid(f, {r.ic.y0}, t.x, opt, &t.stats);
  for (std::size_t i = 0; i < ys.size(); ++i) {
    t.y.push_back(ys[i][0]);
    t.yp.push_back(eval(rhs, Env{{"x", t.x[i]}, {"y", ys[i][0]}}));
  }
  require_finite(t, "reduced");
  return t;
}

Expr reduced_second_derivative(const ReducedODE& r) {
  return differentiate(r.rhs, "x") + r.rhs * differentiate(r.rhs, "y");
}

namespace {

struct ResidualProgram {
  Expr residual;
  Expr rhs;
  Expr q;
};

ResidualProgram residual_program(const ClassDescriptor& d, const ReducedODE& r) {
  return {residual_expr(d, {r.ic.x0, r.ic.y0}), r.rhs, reduced_second_derivative(r)};
}

double residual_with(const ResidualProgram& p, double x, double y) {
  const Env xy{{"x", x}, {"y", y}};
  const double yp = eval(p.rhs, xy);
  const double q = eval(p.q, xy);
  return eval(p.residual, Env{{"x", x}, {"y", y}, {"p", yp}, {"q", q}});
}

}  // namespace

double residual_at(const ClassDescriptor& d, const ReducedODE& r, double x, double y) {
  return residual_with(residual_program(d, r), x, y);
}

double residual_on_grid(const ClassDescriptor& d, const ReducedODE& r, const Trajectory& t) {
  const auto p = residual_program(d, r);
  double sup = 0.0;
  for (std::size_t i = 0; i < t.x.size(); ++i) {
    double v = 0.0;
    try {
      v = residual_with(p, t.x[i], t.y[i]);
    } catch (const std::exception& e) {
      throw DomainError("residual undefined at x = " + num(t.x[i]) + ": " + e.what());
    }
    if (!std::isfinite(v)) throw DomainError("residual is not finite at x = " + num(t.x[i]));
    sup = std::max(sup, std::abs(v));
  }
  return sup;
}

Comparison compare(const ClassDescriptor& d, const InitialCondition& ic, double x1,
                   const Tolerances& tol, const ReduceOptions& opt) {
  Comparison c;
  auto& rep = c.report;
  rep.x0 = ic.x0;
  rep.x1 = x1;
  rep.tolerances = tol;
  validate(d, ic);
  try {
    c.direct = integrate_second_order(d, ic, x1, tol.integrator);
  } catch (const std::exception& e) {
    rep.diagnostics.push_back(std::string("direct route: ") + e.what());
  }
  try {
    ReduceOptions o = opt;
    if (!o.interval_end) o.interval_end = x1;
    c.reduced = reduce(d, ic, o);
  } catch (const std::exception& e) {
    rep.diagnostics.push_back(std::string("reduction: ") + e.what());
  }
  if (c.reduced) {
    try {
      c.reduced_route = integrate_first_order(*c.reduced, x1, tol.integrator);
    } catch (const std::exception& e) {
      rep.diagnostics.push_back(std::string("reduced route: ") + e.what());
    }
  }
  if (c.reduced && c.reduced_route) {
    try {
      const auto p = residual_program(d, *c.reduced);
      double sup = 0.0;
      for (std::size_t i = 0; i < c.reduced_route->x.size(); ++i) {
        const double v = residual_with(p, c.reduced_route->x[i], c.reduced_route->y[i]);
        if (!std::isfinite(v))
          throw DomainError("residual is not finite at x = " + num(c.reduced_route->x[i]));
        c.residuals.push_back(v);
        sup = std::max(sup, std::abs(v));
      }
      rep.residual_sup = sup;
    } catch (const std::exception& e) {
      c.residuals.clear();
      rep.diagnostics.push_back(std::string("residual: ") + e.what());
    }
  }
  if (c.direct && c.reduced_route) {
    double dev = 0.0;
    for (std::size_t i = 0; i < c.direct->y.size(); ++i)
      dev = std::max(dev, std::abs(c.direct->y[i] - c.reduced_route->y[i]));
    rep.trajectory_dev = dev;
  }
  const bool have = rep.residual_sup >= 0.0 && rep.trajectory_dev >= 0.0;
  rep.pass = have && rep.residual_sup <= tol.residual && rep.trajectory_dev <= tol.trajectory;
  if (have && rep.residual_sup > tol.residual)
    rep.diagnostics.push_back("residual " + num(rep.residual_sup) + " exceeds " +
                              num(tol.residual));
  if (have && rep.trajectory_dev > tol.trajectory)
    rep.diagnostics.push_back("trajectory deviation " + num(rep.trajectory_dev) + " exceeds " +
                              num(tol.trajectory));
  return c;
}

double chain_round_trip(const CanonicalChain& c, const OdeRhs& orig, double y0, double tol,
                        int points) {
  const auto [s0, w0] = c.forward(c.t0, y0);
  const double s1 = c.forward(c.t_hi, y0).first;
  OdeOptions opt;
  opt.rtol = opt.atol = tol;
  const auto sg = uniform_grid(s0, s1, points);
  OdeRhs canon = [&c](double s, const double* w, double* dw) { dw[0] = c.canonical_rhs(s, w[0]); };
  const auto ws = integrate_on_grid(canon, {w0}, sg, opt);
  std::vector<double> tg, back;
  for (std::size_t j = 0; j < sg.size(); ++j) {
    const auto [t, y] = c.inverse(sg[j], ws[j][0]);
    tg.push_back(t);
    back.push_back(y);
  }
  const auto ys = integrate_on_grid(orig, {y0}, tg, opt);
  double dev = 0.0;
  for (std::size_t j = 0; j < tg.size(); ++j) dev = std::max(dev, std::abs(ys[j][0] - back[j]));
  return dev;
}

double direct_deviation(const ClassDescriptor& a, const ClassDescriptor& b,
                        const InitialCondition& ic, double x1, double tol) {
  const auto ta = integrate_second_order(a, ic, x1, tol);
  const auto tb = integrate_second_order(b, ic, x1, tol);
  double dev = 0.0;
  for (std::size_t i = 0; i < ta.y.size(); ++i) dev = std::max(dev, std::abs(ta.y[i] - tb.y[i]));
  return dev;
}

}  // namespace odered
