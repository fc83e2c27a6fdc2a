#include "clustinf/normal.hpp"

#include <cmath>
#include <limits>

#include "clustinf/errors.hpp"

namespace clustinf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kHalfLog2Pi = 0.91893853320467274178;  // log(2*pi)/2
constexpr double kInvSqrt2 = 0.70710678118654752440;

// Mills ratio P(X > t) / phi(t) for t >= 8 by the classical continued
// fraction 1/(t + 1/(t + 2/(t + 3/(...)))), evaluated backwards.
double mills_ratio(double t) {
  double f = t;
  for (int k = 64; k >= 1; --k) f = t + k / f;
  return 1.0 / f;
}

}  // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double norm_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double log_norm_sf(double x) {
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (x == kInf) return -kInf;
  if (x == -kInf) return 0.0;
  if (x < 0.0) {
    // P(X > x) = 1 - P(X > -x), and P(X > -x) <= 1/2 here.
    return std::log1p(-std::exp(log_norm_sf(-x)));
  }
  if (x <= 8.0) return std::log(0.5 * std::erfc(x * kInvSqrt2));
  return -0.5 * x * x - kHalfLog2Pi + std::log(mills_ratio(x));
}

double trunc_std_gauss_cdf(double x, double lo, double hi) {
  if (x <= lo) return 0.0;
  if (x >= hi) return 1.0;
  if (hi <= 0.0) {
    // Mirror a left-tail interval into the right tail.
    return 1.0 - trunc_std_gauss_cdf(-x, -hi, -lo);
  }
  // T = (Q(lo) - Q(x)) / (Q(lo) - Q(hi)) in terms of upper tails Q,
  // computed from log-tail differences; both expm1 arguments are <= 0.
  double log_q_lo = log_norm_sf(lo);
  double num = std::expm1(log_norm_sf(x) - log_q_lo);
  double den = std::expm1(log_norm_sf(hi) - log_q_lo);
  double t = num / den;
  if (t < 0.0) return 0.0;
  if (t > 1.0) return 1.0;
  return t;
}

double trunc_gauss_cdf(double x, double mean, double var, double lo,
                       double hi) {
  if (!(var > 0.0) || !std::isfinite(var) || !std::isfinite(mean))
    throw InvalidInput("trunc_gauss_cdf: variance must be finite and > 0");
  if (std::isnan(x) || std::isnan(lo) || std::isnan(hi))
    throw InvalidInput("trunc_gauss_cdf: NaN argument");
  if (!(lo < hi))
    throw DegenerateTruncation("trunc_gauss_cdf: empty truncation interval");
  if (std::isfinite(lo) && std::isfinite(hi)) {
    double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
    if (hi - lo <= 1e-12 * scale)
      throw DegenerateTruncation(
          "trunc_gauss_cdf: truncation interval collapses at double precision");
  }
  double sd = std::sqrt(var);
  double a = (lo - mean) / sd;
  double b = (hi - mean) / sd;
  double z = (x - mean) / sd;
  return trunc_std_gauss_cdf(z, a, b);
}

}  // namespace clustinf
