#include "odered/functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "odered/special.hpp"

namespace odered {

JacobiFunction::JacobiFunction(JacobiKind kind, double k) : kind_(kind), k_(k) {
  if (!(k >= 0.0 && k <= 1.0)) throw std::invalid_argument("Jacobi modulus must lie in [0, 1]");
}

std::string JacobiFunction::name() const {
  const char* base = kind_ == JacobiKind::Sn ? "sn" : kind_ == JacobiKind::Cn ? "cn" : "dn";
  return std::string(base) + "[k=" + format_number(k_) + "]";
}

double JacobiFunction::value(double u) const {
  const auto j = special::jacobi(u, k_);
  switch (kind_) {
    case JacobiKind::Sn:
      return j.sn;
    case JacobiKind::Cn:
      return j.cn;
    default:
      return j.dn;
  }
}

Expr JacobiFunction::derivative(const Expr& arg) const {
  const Expr sn = jacobi_call(JacobiKind::Sn, k_, arg);
  const Expr cn = jacobi_call(JacobiKind::Cn, k_, arg);
  const Expr dn = jacobi_call(JacobiKind::Dn, k_, arg);
  switch (kind_) {
    case JacobiKind::Sn:
      return cn * dn;
    case JacobiKind::Cn:
      return -(sn * dn);
    default:
      return Expr(-k_ * k_) * sn * cn;
  }
}

Expr jacobi_call(JacobiKind kind, double k, const Expr& arg) {
  return Expr::call(std::make_shared<JacobiFunction>(kind, k), arg);
}

NumericSolution::NumericSolution(std::string label, Expr rhs, std::string t_var, std::string k_var,
                                 double t0, double k0, double tol, bool require_positive)
    : label_(std::move(label)),
      rhs_(std::move(rhs)),
      t_var_(std::move(t_var)),
      k_var_(std::move(k_var)),
      t0_(t0),
      k0_(k0),
      tol_(tol),
      require_positive_(require_positive) {
  if (require_positive_ && !(k0_ > 0.0))
    throw DomainError(label_ + " must be positive at the anchor");
}

Expr NumericSolution::derivative(const Expr& arg) const {
  const Expr self = Expr::call(shared_from_this(), Expr::var(t_var_));
  return substitute(substitute(rhs_, k_var_, self), t_var_, arg);
}

double NumericSolution::value(double t) const {
  if (t == t0_) return k0_;
  std::lock_guard lock(mu_);
  return t > t0_ ? extend_and_eval(fwd_, 1.0, t) : extend_and_eval(bwd_, -1.0, t);
}

double NumericSolution::extend_and_eval(Branch& br, double dir, double t) const {
  auto covers = [&](const Segment& s) { return dir * (t - s.b) <= 0.0; };
  if (br.segments.empty() || !covers(br.segments.back())) {
    if (br.failure && dir * (t - br.failed_at) >= 0.0) throw DomainError(*br.failure);
    if (!br.solver) {
      OdeOptions opt;
      opt.rtol = tol_;
      opt.atol = tol_;
      opt.max_steps = 1000000;
      const std::string tv = t_var_, kv = k_var_;
      const Expr rhs = rhs_;
      const bool pos = require_positive_;
      const std::string label = label_;
      OdeRhs f = [rhs, tv, kv, pos, label](double x, const double* y, double* dy) {
        if (pos && !(y[0] > 0.0)) throw DomainError(label + " left the positive branch");
        Env env;
        env.set(tv, x);
        env.set(kv, y[0]);
        dy[0] = eval(rhs, env);
      };
      br.solver = std::make_unique<Dopri5>(std::move(f), std::vector<double>{k0_}, t0_, opt);
    }
    const double far = dir * std::numeric_limits<double>::max();
    while (br.segments.empty() || !covers(br.segments.back())) {
      try {
        br.solver->step(far);
      } catch (const IntegrationError& e) {
        br.failed_at = e.location();
        std::ostringstream msg;
        msg.precision(10);
        msg << label_ << "(" << t_var_ << ") could not be continued past " << t_var_ << " = "
            << e.location();
        if (require_positive_) msg << " (it must stay positive on this branch)";
        msg << ": " << e.what();
        br.failure = msg.str();
        if (dir * (t - br.failed_at) >= 0.0) throw DomainError(*br.failure);
        break;
      }
      Segment s{br.solver->x_prev(), br.solver->x(), br.solver->x() - br.solver->x_prev(), {}};
      const auto& c = br.solver->dense_coefficients();
      for (int i = 0; i < 5; ++i) s.c[i] = c[static_cast<std::size_t>(i)];
      br.segments.push_back(s);
    }
  }
  // First segment whose far end reaches t.
  auto it = std::lower_bound(br.segments.begin(), br.segments.end(), t,
                             [dir](const Segment& s, double v) { return dir * (s.b - v) < 0.0; });
  if (it == br.segments.end()) throw DomainError(br.failure.value_or(label_ + ": out of range"));
  const double theta = (t - it->a) / it->h;
  const double theta1 = 1.0 - theta;
  return it->c[0] +
         theta * (it->c[1] + theta1 * (it->c[2] + theta * (it->c[3] + theta1 * it->c[4])));
}

std::shared_ptr<const NumericSolution> numeric_solution(std::string label, Expr rhs,
                                                        std::string t_var, std::string k_var,
                                                        double t0, double k0, double tol,
                                                        bool require_positive) {
  return std::make_shared<NumericSolution>(std::move(label), std::move(rhs), std::move(t_var),
                                           std::move(k_var), t0, k0, tol, require_positive);
}

}  // namespace odered
