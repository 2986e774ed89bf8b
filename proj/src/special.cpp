#include "odered/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace odered::special {

JacobiTriple jacobi(double u, double k) {
  if (!(k >= 0.0 && k <= 1.0)) throw std::invalid_argument("jacobi: modulus must lie in [0, 1]");
  JacobiTriple out;
  out.u = u;
  out.k = k;
  if (k == 0.0) {
    out.sn = std::sin(u);
    out.cn = std::cos(u);
    out.dn = 1.0;
    return out;
  }
  if (k == 1.0) {
    out.sn = std::tanh(u);
    out.cn = 1.0 / std::cosh(u);
    out.dn = out.cn;
    return out;
  }

  // Descending Landen / AGM scheme: a_{n+1} = (a+b)/2, b_{n+1} = sqrt(ab),
  // c_{n+1} = (a-b)/2, then phi_N = 2^N a_N u and the backward recurrence
  // phi_{n-1} = (phi_n + asin(c_n sin(phi_n) / a_n)) / 2.
  constexpr int kMaxLevels = 32;
  double a[kMaxLevels + 1];
  double c[kMaxLevels + 1];
  a[0] = 1.0;
  double b = std::sqrt(1.0 - k * k);
  c[0] = k;
  int n = 0;
  while (std::abs(c[n]) > 1e-15 && n < kMaxLevels) {
    const double an = a[n];
    a[n + 1] = 0.5 * (an + b);
    c[n + 1] = 0.5 * (an - b);
    b = std::sqrt(an * b);
    ++n;
  }
  double phi = std::ldexp(a[n] * u, n);
  double phi_prev = phi;
  for (int i = n; i > 0; --i) {
    phi_prev = phi;
    phi = 0.5 * (phi + std::asin(c[i] * std::sin(phi) / a[i]));
  }
  out.sn = std::sin(phi);
  out.cn = std::cos(phi);
  out.dn = n > 0 ? out.cn / std::cos(phi_prev - phi) : 1.0;
  return out;
}

double elliptic_f(double phi, double k) {
  return quad_adaptive(
      [k](double t) {
        const double s = std::sin(t);
        return 1.0 / std::sqrt(1.0 - k * k * s * s);
      },
      0.0, phi, 1e-13);
}

namespace {

struct SimpsonState {
  const std::function<double(double)>& f;
  double noise = 0.0;
  bool failed = false;
  double fail_lo = 0.0;
  double fail_hi = 0.0;
};

double simpson_step(SimpsonState& st, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = st.f(lm);
  const double frm = st.f(rm);
  const double h = b - a;
  // Actual half widths: the rounded midpoint is rarely exactly central.
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double both = left + right;
  const double delta = both - whole;
  // Roundoff floor: once |delta| is at the level of the rounding noise in the
  // integrand values over this panel, further bisection cannot reduce it.
  const double scale =
      std::max({std::abs(fa), std::abs(flm), std::abs(fm), std::abs(frm), std::abs(fb)});
  const double floor =
      std::max(64.0 * std::numeric_limits<double>::epsilon(), st.noise) * std::abs(h) * scale;
  const bool divisible = a < lm && lm < m && m < rm && rm < b;
  // Panels a few ulps wide (reachable when marching from a nearby cached point)
  // pass on the same tests; near a true singularity their delta stays O(1).
  if (std::abs(delta) <= 15.0 * tol || std::abs(delta) <= floor)
    return both + delta / 15.0;
  if (!divisible || depth >= kMaxQuadDepth || !std::isfinite(both)) {
    if (!st.failed) {
      st.failed = true;
      st.fail_lo = a;
      st.fail_hi = b;
    }
    return both;
  }
  return simpson_step(st, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         simpson_step(st, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace

double quad_adaptive(const std::function<double(double)>& f, double a, double b, double tol,
                     double noise) {
  if (a == b) return 0.0;
  if (a > b) return -quad_adaptive(f, b, a, tol, noise);
  SimpsonState st{f, noise};
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double result = simpson_step(st, a, b, fa, fm, fb, whole, tol, 0);
  if (st.failed) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "quadrature did not converge on [" << st.fail_lo << ", " << st.fail_hi
        << "] (suspected singularity)";
    throw QuadratureError(msg.str(), st.fail_lo, st.fail_hi);
  }
  return result;
}

double find_root(const std::function<double(double)>& f, double lo, double hi, double tol) {
  double flo = f(lo);
  if (lo == hi) {
    if (std::abs(flo) <= tol) return lo;
    throw RootError("find_root: degenerate bracket without a root");
  }
  double fhi = f(hi);
  if (std::abs(flo) <= tol) return lo;
  if (std::abs(fhi) <= tol) return hi;
  if (flo * fhi > 0.0) throw RootError("find_root: no sign change in bracket");

  // Illinois variant: halve the retained end's value when the same side moves twice.
  int side = 0;
  for (int iter = 0; iter < 400; ++iter) {
    const double width = std::abs(hi - lo);
    if (width <= 1e-14 * std::max(1.0, std::abs(lo) + std::abs(hi))) break;
    double mid = (lo * fhi - hi * flo) / (fhi - flo);
    if (!(mid > std::min(lo, hi) && mid < std::max(lo, hi))) mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (std::abs(fm) <= tol) return mid;
    if (fm * fhi > 0.0) {
      hi = mid;
      fhi = fm;
      if (side == -1) flo *= 0.5;
      side = -1;
    } else {
      lo = mid;
      flo = fm;
      if (side == 1) fhi *= 0.5;
      side = 1;
    }
  }
  return std::abs(flo) < std::abs(fhi) ? lo : hi;
}

}  // namespace odered::special
