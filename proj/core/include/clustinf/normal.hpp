#ifndef CLUSTINF_NORMAL_HPP_
#define CLUSTINF_NORMAL_HPP_

namespace clustinf {

/// Standard normal CDF.
double norm_cdf(double x);

/// Standard normal upper tail P(X > x).
double norm_sf(double x);

/// log of the standard normal upper tail, finite far beyond the point
/// where the tail itself underflows (evaluated through a Mills-ratio
/// continued fraction for large arguments).
double log_norm_sf(double x);

/// CDF at x of a standard normal truncated to [lo, hi] (either bound may
/// be infinite). Evaluated through log-tail differences so intervals deep
/// in either tail keep full relative accuracy instead of collapsing to
/// 0/0.
double trunc_std_gauss_cdf(double x, double lo, double hi);

/// CDF at x of a N(mean, var) truncated to [lo, hi].
/// Throws InvalidInput for var <= 0 and DegenerateTruncation when the
/// interval is empty or collapses at double precision.
double trunc_gauss_cdf(double x, double mean, double var, double lo, double hi);

}  // namespace clustinf

#endif  // CLUSTINF_NORMAL_HPP_
