#include "clustinf/inference.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

#include "clustinf/errors.hpp"
#include "clustinf/normal.hpp"

namespace clustinf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_spd(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols())
    throw FactorizationFailure(std::string(what) + ": matrix not square");
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw FactorizationFailure(std::string(what) + ": matrix not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw FactorizationFailure(std::string(what) +
                               ": matrix not positive definite");
}

}  // namespace

GaussianModel GaussianModel::dense(Eigen::MatrixXd cov) {
  require_spd(cov, "GaussianModel::dense");
  GaussianModel m;
  m.kron_ = false;
  m.dim_ = static_cast<int>(cov.rows());
  m.row_cov_ = std::move(cov);
  return m;
}

GaussianModel GaussianModel::kronecker(Eigen::MatrixXd row_cov,
                                       Eigen::MatrixXd col_cov) {
  require_spd(row_cov, "GaussianModel::kronecker (rows)");
  require_spd(col_cov, "GaussianModel::kronecker (columns)");
  GaussianModel m;
  m.kron_ = true;
  m.dim_ = static_cast<int>(row_cov.rows() * col_cov.rows());
  m.row_cov_ = std::move(row_cov);
  m.col_cov_ = std::move(col_cov);
  return m;
}

GaussianModel GaussianModel::identity(int dim) {
  if (dim < 1) throw InvalidInput("GaussianModel::identity: dim must be >= 1");
  GaussianModel m;
  m.kron_ = false;
  m.dim_ = dim;
  m.row_cov_ = Eigen::MatrixXd::Identity(dim, dim);
  return m;
}

Eigen::VectorXd GaussianModel::cov_times(const Eigen::VectorXd& v) const {
  if (v.size() != dim_)
    throw InvalidInput("GaussianModel::cov_times: dimension mismatch");
  if (!kron_) return row_cov_ * v;
  int n = static_cast<int>(row_cov_.rows());
  int p = static_cast<int>(col_cov_.rows());
  Eigen::Map<const Eigen::MatrixXd> vm(v.data(), n, p);
  Eigen::MatrixXd out = row_cov_ * vm * col_cov_;
  return Eigen::Map<Eigen::VectorXd>(out.data(), dim_);
}

double GaussianModel::quad_form(const Eigen::VectorXd& v) const {
  return v.dot(cov_times(v));
}

TruncationBounds conditional_bounds(const ConstraintSystem& sys,
                                    const GaussianModel& model,
                                    const Eigen::VectorXd& contrast,
                                    const Eigen::VectorXd& obs, double lambda,
                                    bool require_consistent) {
  int dim = sys.total_dim();
  if (model.dim() != dim || contrast.size() != dim || obs.size() != dim)
    throw InvalidInput("conditional_bounds: dimension mismatch");
  double variance = model.quad_form(contrast);
  if (!(variance > 0.0))
    throw UndefinedContrast("conditional_bounds: contrast has zero variance");

  Eigen::VectorXd direction = model.cov_times(contrast) / variance;
  double stat = contrast.dot(obs);
  Eigen::VectorXd residual = obs - direction * stat;

  TruncationBounds bounds;
  bounds.residual = residual;
  int n = sys.block_dim;
  for (int j = 0; j < sys.num_blocks(); ++j) {
    const double* dir_block = direction.data() + j * n;
    const double* res_block = residual.data() + j * n;
    double dir_norm = 0.0;
    for (int i = 0; i < n; ++i) dir_norm += dir_block[i] * dir_block[i];
    dir_norm = std::sqrt(dir_norm);
    const Ordering& order = sys.orders[j];
    sys.blocks[j].visit([&](const SparseRow& row, double bound, bool) {
      double along = row_dot(row, order, dir_block);
      double offset = lambda * bound - row_dot(row, order, res_block);
      double tol = 1e-12 * (1.0 + row.norm() * dir_norm);
      if (std::abs(along) <= tol) {
        bounds.zero_margin = std::min(bounds.zero_margin, offset);
      } else if (along < 0.0) {
        bounds.lower = std::max(bounds.lower, offset / along);
      } else {
        bounds.upper = std::min(bounds.upper, offset / along);
      }
    });
  }

  if (require_consistent) {
    if (bounds.zero_margin < 0.0)
      throw InconsistentConditioning(
          "conditional_bounds: observation violates a constraint orthogonal "
          "to the contrast");
    double scale = std::max({1.0, std::abs(bounds.lower), std::abs(bounds.upper)});
    if (std::isfinite(bounds.lower) && std::isfinite(bounds.upper) &&
        bounds.upper - bounds.lower <= 1e-12 * scale)
      throw DegenerateTruncation(
          "conditional_bounds: truncation interval collapsed");
    double slack = 1e-9 * (1.0 + std::abs(stat));
    if (stat < bounds.lower - slack || stat > bounds.upper + slack)
      throw InconsistentConditioning(
          "conditional_bounds: statistic outside its truncation interval");
  }
  return bounds;
}

Eigen::VectorXd two_group_contrast(const std::vector<int>& g1,
                                   const std::vector<int>& g2, int n) {
  if (g1.empty() || g2.empty())
    throw UndefinedContrast("two_group_contrast: empty group");
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
  for (int i : g1) {
    if (i < 0 || i >= n) throw InvalidInput("two_group_contrast: index out of range");
    eta[i] = 1.0 / static_cast<double>(g1.size());
  }
  for (int i : g2) {
    if (i < 0 || i >= n) throw InvalidInput("two_group_contrast: index out of range");
    if (eta[i] != 0.0)
      throw UndefinedContrast("two_group_contrast: groups overlap");
    eta[i] = -1.0 / static_cast<double>(g2.size());
  }
  return eta;
}

ContrastBuilder balanced_contrast_builder() {
  return [](const SegmentedClustering& c) {
    if (c.num_clusters < 2)
      throw UndefinedContrast(
          "balanced contrast: realized clustering has a single cluster");
    SegmentedClustering merged = balanced_two_merge(c);
    return two_group_contrast(merged.cluster_members(0),
                              merged.cluster_members(1), c.n);
  };
}

ContrastBuilder cluster_pair_contrast_builder(int k1, int k2) {
  return [k1, k2](const SegmentedClustering& c) {
    if (k1 == k2) throw UndefinedContrast("pair contrast: identical clusters");
    if (k1 < 0 || k2 < 0 || k1 >= c.num_clusters || k2 >= c.num_clusters)
      throw UndefinedContrast(
          "pair contrast: cluster index beyond realized clustering");
    return two_group_contrast(c.cluster_members(k1), c.cluster_members(k2),
                              c.n);
  };
}

namespace {

SelectiveTestResult finish_test(const ConstraintSystem& sys,
                                const GaussianModel& model,
                                const Eigen::VectorXd& contrast,
                                const Eigen::VectorXd& obs, double lambda) {
  SelectiveTestResult result;
  result.stat = contrast.dot(obs);
  result.variance = model.quad_form(contrast);
  result.bounds = conditional_bounds(sys, model, contrast, obs, lambda);
  result.invariant_stat = trunc_gauss_cdf(result.stat, 0.0, result.variance,
                                          result.bounds.lower,
                                          result.bounds.upper);
  result.pvalue =
      2.0 * std::min(result.invariant_stat, 1.0 - result.invariant_stat);
  return result;
}

}  // namespace

SelectiveTestResult selective_pvalue_1d(const std::vector<double>& x,
                                        double lambda,
                                        const GaussianModel& model,
                                        const ContrastBuilder& eta_builder) {
  if (!(lambda > 0.0))
    throw InvalidInput("selective_pvalue_1d: lambda must be > 0");
  int n = static_cast<int>(x.size());
  if (model.dim() != n)
    throw InvalidInput("selective_pvalue_1d: covariance dimension mismatch");

  RegularizationPath path = compute_path(x);
  SegmentedClustering clustering = path.clustering_at(lambda);
  Eigen::VectorXd eta = eta_builder(clustering);
  if (eta.size() != n || eta.isZero(0.0))
    throw UndefinedContrast("selective_pvalue_1d: contrast is zero");

  ConstraintSystem sys =
      single_block(build_constraints(clustering), clustering.order);
  Eigen::Map<const Eigen::VectorXd> obs(x.data(), n);
  SelectiveTestResult result = finish_test(sys, model, eta, obs, lambda);
  result.clustering = std::move(clustering);
  return result;
}

SelectiveTestResult selective_pvalue_multidim(
    const Eigen::MatrixXd& y, double lambda, const GaussianModel& model,
    const MultiContrastBuilder& kappa_builder) {
  if (!(lambda > 0.0))
    throw InvalidInput("selective_pvalue_multidim: lambda must be > 0");
  int n = static_cast<int>(y.rows());
  int p = static_cast<int>(y.cols());
  if (model.dim() != n * p)
    throw InvalidInput(
        "selective_pvalue_multidim: covariance dimension mismatch");

  ColumnClusterings cc = columnwise_paths(y, lambda);
  Eigen::VectorXd kappa = kappa_builder(cc);
  if (kappa.size() != n * p || kappa.isZero(0.0))
    throw UndefinedContrast("selective_pvalue_multidim: contrast is zero");

  ConstraintSystem sys = build_block_constraints(cc);
  Eigen::Map<const Eigen::VectorXd> obs(y.data(), n * p);
  return finish_test(sys, model, kappa, obs, lambda);
}

SelectiveTestResult selective_pvalue_independent(
    const Eigen::MatrixXd& y, double lambda, const Eigen::MatrixXd& row_cov,
    const AggregatedClustering& agg, int j0, int k1, int k2) {
  if (!(lambda > 0.0))
    throw InvalidInput("selective_pvalue_independent: lambda must be > 0");
  int n = static_cast<int>(y.rows());
  int p = static_cast<int>(y.cols());
  if (j0 < 0 || j0 >= p)
    throw InvalidInput("selective_pvalue_independent: column out of range");
  if (k1 == k2 || k1 < 0 || k2 < 0 || k1 >= agg.num_clusters ||
      k2 >= agg.num_clusters)
    throw UndefinedContrast("selective_pvalue_independent: missing cluster");

  Eigen::VectorXd eta =
      two_group_contrast(agg.cluster_members(k1), agg.cluster_members(k2), n);

  std::vector<double> column(y.col(j0).data(), y.col(j0).data() + n);
  RegularizationPath path = compute_path(column);
  SegmentedClustering clustering = path.clustering_at(lambda);
  ConstraintSystem sys =
      single_block(build_constraints(clustering), clustering.order);

  GaussianModel model = GaussianModel::dense(row_cov);
  Eigen::Map<const Eigen::VectorXd> obs(column.data(), n);
  SelectiveTestResult result = finish_test(sys, model, eta, obs, lambda);
  result.clustering = std::move(clustering);
  return result;
}

}  // namespace clustinf
