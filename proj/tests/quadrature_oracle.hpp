#ifndef CLUSTINF_TESTS_QUADRATURE_ORACLE_HPP_
#define CLUSTINF_TESTS_QUADRATURE_ORACLE_HPP_

#include <algorithm>
#include <cmath>

// Independent oracle for the truncated normal CDF: the Gaussian density is
// integrated directly by adaptive Simpson quadrature in extended precision,
// with the density rescaled by its value at the lower endpoint so far-tail
// intervals stay inside the representable range. No code from the library's
// CDF path is involved.
namespace testsupport {

inline long double gauss_rescaled(long double t, long double ref) {
  return expl(-0.5L * (t - ref) * (t + ref));
}

inline long double simpson_rec(long double a, long double b, long double fa,
                               long double fm, long double fb,
                               long double whole, long double eps,
                               long double ref, int depth) {
  long double m = 0.5L * (a + b);
  long double lm = 0.5L * (a + m);
  long double rm = 0.5L * (m + b);
  long double flm = gauss_rescaled(lm, ref);
  long double frm = gauss_rescaled(rm, ref);
  long double left = (m - a) / 6.0L * (fa + 4.0L * flm + fm);
  long double right = (b - m) / 6.0L * (fm + 4.0L * frm + fb);
  if (depth <= 0 || fabsl(left + right - whole) <= 15.0L * eps)
    return left + right + (left + right - whole) / 15.0L;
  return simpson_rec(a, m, fa, flm, fm, left, 0.5L * eps, ref, depth - 1) +
         simpson_rec(m, b, fm, frm, fb, right, 0.5L * eps, ref, depth - 1);
}

inline long double integrate_gauss(long double a, long double b,
                                   long double ref) {
  if (b <= a) return 0.0L;
  long double fa = gauss_rescaled(a, ref);
  long double fb = gauss_rescaled(b, ref);
  long double m = 0.5L * (a + b);
  long double fm = gauss_rescaled(m, ref);
  long double whole = (b - a) / 6.0L * (fa + 4.0L * fm + fb);
  long double eps = std::max(fabsl(whole), 1e-300L) * 1e-15L;
  return simpson_rec(a, b, fa, fm, fb, whole, eps, ref, 48);
}

// CDF at x of a standard normal truncated to [lo, hi]; lo must be finite,
// hi may be +infinity (the integrand is negligible 60 units past lo).
inline double trunc_cdf_oracle(double x, double lo, double hi) {
  long double a = lo;
  long double b = std::isfinite(hi) ? (long double)hi : a + 60.0L;
  long double xi = std::min<long double>(std::max<long double>(x, a), b);
  long double top = integrate_gauss(a, xi, a);
  long double bottom = integrate_gauss(a, b, a);
  return static_cast<double>(top / bottom);
}

}  // namespace testsupport

#endif  // CLUSTINF_TESTS_QUADRATURE_ORACLE_HPP_
