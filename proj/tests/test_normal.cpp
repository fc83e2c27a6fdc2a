#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "clustinf/errors.hpp"
#include "clustinf/normal.hpp"
#include "quadrature_oracle.hpp"

using namespace clustinf;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("log upper tail matches erfc where both are usable") {
  for (double t = 8.0; t <= 25.0; t += 0.37) {
    double direct = std::log(0.5 * std::erfc(t / std::sqrt(2.0)));
    double stable = log_norm_sf(t);
    CHECK(std::abs(direct - stable) <= 1e-12 * std::abs(direct));
  }
  // Finite far beyond erfc underflow.
  CHECK(std::isfinite(log_norm_sf(40.0)));
  CHECK(log_norm_sf(40.0) < -800.0);
  CHECK(log_norm_sf(-kInf) == 0.0);
  CHECK(log_norm_sf(kInf) == -kInf);
}

TEST_CASE("untruncated and endpoint behavior") {
  CHECK(trunc_gauss_cdf(0.0, 0.0, 1.0, -kInf, kInf) == 0.5);
  // No truncation reproduces the plain normal CDF.
  for (double x = -6.0; x <= 6.0; x += 0.31) {
    double plain = norm_cdf(x);
    double truncated = trunc_gauss_cdf(x, 0.0, 1.0, -kInf, kInf);
    CHECK(std::abs(plain - truncated) <= 1e-14);
  }
  CHECK(trunc_gauss_cdf(10.0, 3.0, 4.0, 10.0, 11.0) == 0.0);
  CHECK(trunc_gauss_cdf(11.0, 3.0, 4.0, 10.0, 11.0) == 1.0);
  CHECK(trunc_gauss_cdf(9.0, 3.0, 4.0, 10.0, 11.0) == 0.0);
  CHECK(trunc_gauss_cdf(12.0, 3.0, 4.0, 10.0, 11.0) == 1.0);
}

TEST_CASE("far-tail interval where the naive difference underflows") {
  double t = trunc_gauss_cdf(10.5, 0.0, 1.0, 10.0, 11.0);
  CHECK(t > 0.99);
  CHECK(t < 1.0);
  double oracle = testsupport::trunc_cdf_oracle(10.5, 10.0, 11.0);
  CHECK(std::abs(t - oracle) <= 1e-12 * oracle);

  // The two-sided difference of CDF values is 0/0 here.
  double naive = (norm_cdf(10.5) - norm_cdf(10.0)) /
                 (norm_cdf(11.0) - norm_cdf(10.0));
  CHECK(std::isnan(naive));
}

TEST_CASE("agreement with quadrature over both tails") {
  std::mt19937_64 rng(271828);
  std::uniform_real_distribution<double> unif;
  for (int rep = 0; rep < 150; ++rep) {
    double a = 6.0 + 32.0 * unif(rng);
    double w = 0.05 + (std::min(30.0 / a, 40.0 - a) - 0.05) * unif(rng);
    double b = a + w;
    double x = a + (0.05 + 0.9 * unif(rng)) * w;
    double t = trunc_gauss_cdf(x, 0.0, 1.0, a, b);
    double oracle = testsupport::trunc_cdf_oracle(x, a, b);
    CHECK(t > 0.0);
    CHECK(t < 1.0);
    CHECK(std::abs(t - oracle) <= 1e-9 * std::max(oracle, 1e-12));

    // Left-tail mirror image.
    double left = trunc_gauss_cdf(-x, 0.0, 1.0, -b, -a);
    CHECK(std::abs(left - (1.0 - t)) <= 1e-12);
  }
}

TEST_CASE("location-scale and monotonicity") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unif;
  for (int rep = 0; rep < 100; ++rep) {
    double mean = -3.0 + 6.0 * unif(rng);
    double sd = 0.2 + 3.0 * unif(rng);
    double a = mean + sd * (-2.0 + 10.0 * unif(rng));
    double b = a + sd * (0.1 + 4.0 * unif(rng));
    double x1 = a + (b - a) * unif(rng);
    double x2 = a + (b - a) * unif(rng);
    if (x1 > x2) std::swap(x1, x2);
    double t1 = trunc_gauss_cdf(x1, mean, sd * sd, a, b);
    double t2 = trunc_gauss_cdf(x2, mean, sd * sd, a, b);
    CHECK(t1 <= t2);
    CHECK(t1 >= 0.0);
    CHECK(t2 <= 1.0);

    // Standardization identity against the unit-variance evaluation.
    double t_std =
        trunc_std_gauss_cdf((x1 - mean) / sd, (a - mean) / sd, (b - mean) / sd);
    CHECK(std::abs(t1 - t_std) <= 1e-14);
  }
}

TEST_CASE("straddling intervals agree with the direct formula") {
  for (double a = -4.0; a < 0.0; a += 0.63) {
    for (double b = 0.1; b < 5.0; b += 0.77) {
      double x = 0.5 * (a + b);
      double direct = (norm_cdf(x) - norm_cdf(a)) / (norm_cdf(b) - norm_cdf(a));
      double stable = trunc_gauss_cdf(x, 0.0, 1.0, a, b);
      CHECK(std::abs(direct - stable) <= 1e-13);
    }
  }
}

TEST_CASE("degenerate and invalid truncation arguments") {
  CHECK_THROWS_AS(trunc_gauss_cdf(0.0, 0.0, 1.0, 1.0, 1.0),
                  DegenerateTruncation);
  CHECK_THROWS_AS(trunc_gauss_cdf(0.0, 0.0, 1.0, 2.0, 1.0),
                  DegenerateTruncation);
  CHECK_THROWS_AS(trunc_gauss_cdf(0.0, 0.0, 1.0, 5.0, 5.0 + 1e-14),
                  DegenerateTruncation);
  CHECK_THROWS_AS(trunc_gauss_cdf(0.0, 0.0, 0.0, 0.0, 1.0), InvalidInput);
  CHECK_THROWS_AS(trunc_gauss_cdf(0.0, 0.0, -1.0, 0.0, 1.0), InvalidInput);
  CHECK_THROWS_AS(trunc_gauss_cdf(std::nan(""), 0.0, 1.0, 0.0, 1.0),
                  InvalidInput);
}
