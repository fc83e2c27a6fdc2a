#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "clustinf/errors.hpp"
#include "clustinf/inference.hpp"
#include "clustinf/normal.hpp"
#include "clustinf/path.hpp"
#include "clustinf/simstats.hpp"
#include "quadrature_oracle.hpp"

using namespace clustinf;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd random_spd(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = gauss(rng);
  return a * a.transpose() / n + Eigen::MatrixXd::Identity(n, n);
}

ConstraintSystem system_for(const std::vector<double>& x, double lambda) {
  RegularizationPath path = compute_path(x);
  SegmentedClustering c = path.clustering_at(lambda);
  return single_block(build_constraints(c), c.order);
}

}  // namespace

TEST_CASE("two-point worked example") {
  std::vector<double> x{1.0, 0.0};
  double lambda = 0.1;
  GaussianModel model = GaussianModel::identity(2);
  Eigen::VectorXd eta(2);
  eta << 1.0, -1.0;

  ConstraintSystem sys = system_for(x, lambda);
  Eigen::Map<const Eigen::VectorXd> obs(x.data(), 2);
  TruncationBounds bounds = conditional_bounds(sys, model, eta, obs, lambda);

  CHECK(bounds.lower == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(bounds.upper == kInf);
  CHECK(bounds.residual[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(bounds.residual[1] == doctest::Approx(0.5).epsilon(1e-12));

  // The removed component is the contrast direction scaled by the statistic.
  Eigen::VectorXd direction_part = obs - bounds.residual;
  CHECK(direction_part[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(direction_part[1] == doctest::Approx(-0.5).epsilon(1e-12));

  SelectiveTestResult result = selective_pvalue_1d(
      x, lambda, model, [&eta](const SegmentedClustering&) { return eta; });
  CHECK(result.stat == doctest::Approx(1.0));
  CHECK(result.variance == doctest::Approx(2.0));
  CHECK(std::abs(result.invariant_stat - 0.4598) < 2e-4);
  CHECK(result.pvalue == doctest::Approx(2.0 * std::min(
                              result.invariant_stat,
                              1.0 - result.invariant_stat)));
  // Pin the invariant statistic against the quadrature oracle in
  // standardized coordinates.
  double sd = std::sqrt(2.0);
  double oracle =
      testsupport::trunc_cdf_oracle(1.0 / sd, 0.2 / sd, kInf);
  CHECK(std::abs(result.invariant_stat - oracle) <= 1e-12);
}

TEST_CASE("observation decomposes exactly along the contrast") {
  std::mt19937_64 rng(1001);
  std::normal_distribution<double> gauss;
  for (int rep = 0; rep < 100; ++rep) {
    int n = 3 + int(rng() % 8);
    std::vector<double> x(n);
    for (auto& v : x) v = gauss(rng);
    Eigen::MatrixXd sigma = random_spd(rng, n);
    GaussianModel model = GaussianModel::dense(sigma);
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
    eta[0] = 1.0;
    eta[n - 1] = -1.0;
    double lambda = 0.2 * lambda_max(x);
    if (lambda <= 0.0) continue;
    ConstraintSystem sys = system_for(x, lambda);
    Eigen::Map<const Eigen::VectorXd> obs(x.data(), n);
    TruncationBounds bounds =
        conditional_bounds(sys, model, eta, obs, lambda, false);
    double stat = eta.dot(obs);
    Eigen::VectorXd direction = model.cov_times(eta) / model.quad_form(eta);
    Eigen::VectorXd reconstructed = direction * stat + bounds.residual;
    CHECK((reconstructed - obs).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("all-zero classification yields an unbounded interval") {
  // With a two-cluster clustering of two points and a contrast orthogonal
  // to every constraint row there is nothing to bound.
  std::vector<double> x{1.0, 0.0};
  ConstraintSystem sys = system_for(x, 0.1);
  GaussianModel model = GaussianModel::identity(2);
  Eigen::VectorXd eta(2);
  eta << 1.0, 1.0;  // rows are mean differences, all orthogonal to 1
  Eigen::Map<const Eigen::VectorXd> obs(x.data(), 2);
  TruncationBounds bounds = conditional_bounds(sys, model, eta, obs, 0.1);
  CHECK(bounds.lower == -kInf);
  CHECK(bounds.upper == kInf);
  CHECK(bounds.zero_margin >= 0.0);
}

TEST_CASE("region equivalence by Monte Carlo") {
  // Fix one conditioning event (clustering, ordering, lambda, contrast),
  // then check on random draws that the polyhedron membership coincides
  // with the interval-and-margin description, and that the residual is
  // empirically uncorrelated with the statistic.
  int n = 5;
  std::mt19937_64 rng(2718);
  std::normal_distribution<double> gauss;
  std::vector<double> x0(n);
  for (auto& v : x0) v = gauss(rng);
  double lambda = 0.3 * lambda_max(x0);
  RegularizationPath path = compute_path(x0);
  SegmentedClustering target = path.clustering_at(lambda);
  PolyhedralConstraint pc = build_constraints(target);
  ConstraintSystem sys = single_block(pc, target.order);
  GaussianModel model = GaussianModel::identity(n);
  SegmentedClustering merged = target.num_clusters >= 2
                                   ? balanced_two_merge(target)
                                   : target;
  REQUIRE(target.num_clusters >= 2);
  Eigen::VectorXd eta = two_group_contrast(merged.cluster_members(0),
                                           merged.cluster_members(1), n);

  const int draws = 2000;
  int members = 0;
  std::vector<double> stats;
  std::vector<Eigen::VectorXd> residuals;
  for (int d = 0; d < draws; ++d) {
    std::vector<double> x(n);
    for (auto& v : x) v = gauss(rng);
    bool in_polyhedron = check_membership(pc, target.order, x, lambda, 0.0).member;
    Eigen::Map<const Eigen::VectorXd> obs(x.data(), n);
    TruncationBounds b = conditional_bounds(sys, model, eta, obs, lambda, false);
    double stat = eta.dot(obs);
    bool in_interval =
        b.lower <= stat && stat <= b.upper && b.zero_margin >= 0.0;
    CHECK(in_polyhedron == in_interval);
    members += in_polyhedron;
    stats.push_back(stat);
    residuals.push_back(b.residual);
  }
  CHECK(members > 0);

  // Empirical correlation between the statistic and each residual entry.
  double mean_stat = 0.0;
  for (double s : stats) mean_stat += s;
  mean_stat /= draws;
  for (int i = 0; i < n; ++i) {
    double mean_res = 0.0;
    for (const auto& r : residuals) mean_res += r[i];
    mean_res /= draws;
    double cov = 0.0, var_s = 0.0, var_r = 0.0;
    for (int d = 0; d < draws; ++d) {
      double ds = stats[d] - mean_stat;
      double dr = residuals[d][i] - mean_res;
      cov += ds * dr;
      var_s += ds * ds;
      var_r += dr * dr;
    }
    double corr = cov / std::sqrt(var_s * var_r);
    CHECK(std::abs(corr) < 4.0 / std::sqrt(static_cast<double>(draws)));
  }
}

TEST_CASE("conditional null uniformity at a fixed event") {
  // Rejection-sample draws that realize one fixed (clustering, ordering)
  // event; the p-values among those draws must be uniform.
  const int n = 5;
  const double lambda = 0.25;
  std::mt19937_64 rng(424242);
  std::normal_distribution<double> gauss;
  GaussianModel model = GaussianModel::identity(n);

  auto draw_clustering = [&](std::vector<double>* x) {
    for (auto& v : *x) v = gauss(rng);
    RegularizationPath path = compute_path(*x);
    return path.clustering_at(lambda);
  };

  // Pilot: find a frequently realized event with at least two clusters.
  std::vector<double> x(n);
  SegmentedClustering target;
  for (int trial = 0; trial < 2000; ++trial) {
    SegmentedClustering c = draw_clustering(&x);
    if (c.num_clusters >= 2 && c.num_clusters <= 3) {
      target = c;
      break;
    }
  }
  REQUIRE(target.num_clusters >= 2);
  SegmentedClustering merged = balanced_two_merge(target);
  Eigen::VectorXd eta = two_group_contrast(merged.cluster_members(0),
                                           merged.cluster_members(1), n);
  ConstraintSystem sys = single_block(build_constraints(target), target.order);

  std::vector<double> pvals;
  int attempts = 0;
  while (static_cast<int>(pvals.size()) < 400 && attempts < 300000) {
    ++attempts;
    SegmentedClustering c = draw_clustering(&x);
    if (c.boundaries != target.boundaries ||
        c.order.rank_to_index != target.order.rank_to_index)
      continue;
    Eigen::Map<const Eigen::VectorXd> obs(x.data(), n);
    TruncationBounds b = conditional_bounds(sys, model, eta, obs, lambda);
    double t = trunc_gauss_cdf(eta.dot(obs), 0.0, model.quad_form(eta),
                               b.lower, b.upper);
    pvals.push_back(2.0 * std::min(t, 1.0 - t));
  }
  REQUIRE(pvals.size() >= 400);
  CHECK(ks_uniformity(pvals) < ks_critical_value(pvals.size(), 0.01));
}

TEST_CASE("translation invariance for sum-zero contrasts") {
  std::mt19937_64 rng(555);
  std::normal_distribution<double> gauss;
  for (int rep = 0; rep < 20; ++rep) {
    int n = 8;
    std::vector<double> x(n);
    for (auto& v : x) v = gauss(rng);
    double lambda = 0.4 * lambda_max(x);
    if (lambda <= 0.0) continue;
    GaussianModel model = GaussianModel::identity(n);
    SelectiveTestResult base =
        selective_pvalue_1d(x, lambda, model, balanced_contrast_builder());
    std::vector<double> shifted(x);
    for (auto& v : shifted) v += 7.25;
    SelectiveTestResult moved =
        selective_pvalue_1d(shifted, lambda, model, balanced_contrast_builder());
    CHECK(std::abs(base.pvalue - moved.pvalue) <= 1e-12);
    CHECK(std::abs(base.stat - moved.stat) <= 1e-12);
  }
}

TEST_CASE("undefined contrasts are reported") {
  GaussianModel model = GaussianModel::identity(4);
  std::vector<double> constant{1.0, 1.0, 1.0, 1.0};
  CHECK_THROWS_AS(selective_pvalue_1d(constant, 0.5, model,
                                      balanced_contrast_builder()),
                  UndefinedContrast);
  std::vector<double> x{3.0, 2.0, 1.0, 0.0};
  CHECK_THROWS_AS(selective_pvalue_1d(x, 0.1, model,
                                      cluster_pair_contrast_builder(0, 5)),
                  UndefinedContrast);
  CHECK_THROWS_AS(two_group_contrast({}, {1}, 4), UndefinedContrast);
  CHECK_THROWS_AS(two_group_contrast({1}, {1}, 4), UndefinedContrast);
}

TEST_CASE("mismatched conditioning event is rejected") {
  // Claiming two clusters for data the path has already fused leaves the
  // statistic outside its interval.
  std::vector<double> x{1.0, 0.0};
  SegmentedClustering wrong;
  wrong.n = 2;
  wrong.num_clusters = 2;
  wrong.boundaries = {0, 1, 2};
  wrong.order = sort_descending(x);
  ConstraintSystem sys = single_block(build_constraints(wrong), wrong.order);
  GaussianModel model = GaussianModel::identity(2);
  Eigen::VectorXd eta(2);
  eta << 1.0, -1.0;
  Eigen::Map<const Eigen::VectorXd> obs(x.data(), 2);
  CHECK_THROWS_AS(conditional_bounds(sys, model, eta, obs, 0.6),
                  InconsistentConditioning);
}

TEST_CASE("gaussian model forms") {
  std::mt19937_64 rng(808);
  SUBCASE("kronecker product action matches the dense product") {
    int n = 4, p = 3;
    Eigen::MatrixXd sigma = random_spd(rng, n);
    Eigen::MatrixXd delta = random_spd(rng, p);
    GaussianModel kron = GaussianModel::kronecker(sigma, delta);
    Eigen::MatrixXd dense_cov(n * p, n * p);
    for (int j1 = 0; j1 < p; ++j1)
      for (int j2 = 0; j2 < p; ++j2)
        dense_cov.block(j1 * n, j2 * n, n, n) = delta(j1, j2) * sigma;
    GaussianModel dense = GaussianModel::dense(dense_cov);
    std::normal_distribution<double> gauss;
    for (int rep = 0; rep < 10; ++rep) {
      Eigen::VectorXd v(n * p);
      for (int i = 0; i < n * p; ++i) v[i] = gauss(rng);
      Eigen::VectorXd a = kron.cov_times(v);
      Eigen::VectorXd b = dense.cov_times(v);
      CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12 * b.cwiseAbs().maxCoeff());
      CHECK(std::abs(kron.quad_form(v) - dense.quad_form(v)) <=
            1e-12 * std::abs(dense.quad_form(v)));
    }
  }
  SUBCASE("non-SPD input is rejected") {
    Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(3, 3);
    bad(1, 1) = -2.0;
    CHECK_THROWS_AS(GaussianModel::dense(bad), FactorizationFailure);
    Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(3, 3);
    asym(0, 1) = 0.5;
    CHECK_THROWS_AS(GaussianModel::dense(asym), FactorizationFailure);
  }
  SUBCASE("block contrast direction matches the one-dimensional one") {
    int n = 6, p = 3, j0 = 1;
    Eigen::MatrixXd sigma = random_spd(rng, n);
    GaussianModel kron = GaussianModel::kronecker(
        sigma, Eigen::MatrixXd::Identity(p, p));
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
    eta << 0.5, 0.5, -0.25, -0.25, -0.25, -0.25;
    Eigen::VectorXd kappa = Eigen::VectorXd::Zero(n * p);
    kappa.segment(j0 * n, n) = eta;
    Eigen::VectorXd dir_block =
        kron.cov_times(kappa) / kron.quad_form(kappa);
    Eigen::VectorXd dir_1d = sigma * eta / (eta.dot(sigma * eta));
    for (int j = 0; j < p; ++j) {
      Eigen::VectorXd seg = dir_block.segment(j * n, n);
      if (j == j0)
        CHECK((seg - dir_1d).cwiseAbs().maxCoeff() <= 1e-12);
      else
        CHECK(seg.cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("p = 1 block computation collapses to the one-dimensional test") {
  std::mt19937_64 rng(91);
  std::normal_distribution<double> gauss;
  for (int rep = 0; rep < 20; ++rep) {
    int n = 10;
    std::vector<double> x(n);
    for (auto& v : x) v = gauss(rng);
    double lambda = 0.35 * lambda_max(x);
    if (lambda <= 0.0) continue;
    Eigen::MatrixXd sigma = random_spd(rng, n);
    GaussianModel model_1d = GaussianModel::dense(sigma);

    SelectiveTestResult base;
    try {
      base = selective_pvalue_1d(x, lambda, model_1d,
                                 balanced_contrast_builder());
    } catch (const UndefinedContrast&) {
      continue;
    }

    Eigen::MatrixXd y(n, 1);
    for (int i = 0; i < n; ++i) y(i, 0) = x[i];
    GaussianModel model_block =
        GaussianModel::kronecker(sigma, Eigen::MatrixXd::Identity(1, 1));
    SelectiveTestResult block = selective_pvalue_multidim(
        y, lambda, model_block, [n](const ColumnClusterings& cc) {
          SegmentedClustering merged = balanced_two_merge(cc.clusterings[0]);
          return two_group_contrast(merged.cluster_members(0),
                                    merged.cluster_members(1), n);
        });
    CHECK(std::abs(base.pvalue - block.pvalue) <= 1e-12);
    CHECK(std::abs(base.stat - block.stat) <= 1e-12);
    CHECK(std::abs(base.variance - block.variance) <= 1e-12);
    if (std::isfinite(base.bounds.lower))
      CHECK(std::abs(base.bounds.lower - block.bounds.lower) <= 1e-12);
    else
      CHECK(base.bounds.lower == block.bounds.lower);
    if (std::isfinite(base.bounds.upper))
      CHECK(std::abs(base.bounds.upper - block.bounds.upper) <= 1e-12);
    else
      CHECK(base.bounds.upper == block.bounds.upper);
  }
}

TEST_CASE("independent-column shortcut equals the block computation") {
  std::mt19937_64 rng(3141);
  std::normal_distribution<double> gauss;
  int done = 0;
  for (int rep = 0; rep < 60 && done < 20; ++rep) {
    int n = 10, p = 3;
    Eigen::MatrixXd y(n, p);
    for (int j = 0; j < p; ++j)
      for (int i = 0; i < n; ++i) y(i, j) = gauss(rng);
    double lambda = 0.3 * lambda_max(std::vector<double>(
                              y.col(0).data(), y.col(0).data() + n));
    if (lambda <= 0.0) continue;
    Eigen::MatrixXd sigma = random_spd(rng, n);

    ColumnClusterings cc = columnwise_paths(y, lambda);
    AggregatedClustering agg = aggregate(
        rescale_labels(cc), 2, AggregationMethod::HierarchicalEuclidean);
    if (agg.num_clusters < 2) continue;
    int j0 = static_cast<int>(rng() % p);

    SelectiveTestResult shortcut =
        selective_pvalue_independent(y, lambda, sigma, agg, j0, 0, 1);
    GaussianModel model =
        GaussianModel::kronecker(sigma, Eigen::MatrixXd::Identity(p, p));
    SelectiveTestResult block = selective_pvalue_multidim(
        y, lambda, model, [&](const ColumnClusterings& inner) {
          AggregatedClustering agg2 =
              aggregate(rescale_labels(inner), 2,
                        AggregationMethod::HierarchicalEuclidean);
          return build_kappa(agg2, j0, 0, 1, inner.n, inner.p);
        });

    CHECK(std::abs(shortcut.pvalue - block.pvalue) <= 1e-12);
    CHECK(std::abs(shortcut.stat - block.stat) <= 1e-12);
    CHECK(std::abs(shortcut.variance - block.variance) <= 1e-12);
    ++done;
  }
  CHECK(done >= 20);
}
