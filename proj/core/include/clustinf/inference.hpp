#ifndef CLUSTINF_INFERENCE_HPP_
#define CLUSTINF_INFERENCE_HPP_

#include <Eigen/Core>
#include <functional>

#include "clustinf/clustering.hpp"
#include "clustinf/multidim.hpp"
#include "clustinf/polyhedron.hpp"

namespace clustinf {

/// Known covariance of the observed Gaussian vector, either as a dense SPD
/// matrix or as a Kronecker pair (col_cov x row_cov) acting on a stacked
/// n*p vector. The Kronecker form is never materialized.
class GaussianModel {
 public:
  static GaussianModel dense(Eigen::MatrixXd cov);
  static GaussianModel kronecker(Eigen::MatrixXd row_cov,
                                 Eigen::MatrixXd col_cov);
  static GaussianModel identity(int dim);

  int dim() const { return dim_; }
  bool is_kronecker() const { return kron_; }
  int rows() const { return static_cast<int>(row_cov_.rows()); }
  int cols() const { return kron_ ? static_cast<int>(col_cov_.rows()) : 1; }
  const Eigen::MatrixXd& row_cov() const { return row_cov_; }
  const Eigen::MatrixXd& col_cov() const { return col_cov_; }

  /// cov * v
  Eigen::VectorXd cov_times(const Eigen::VectorXd& v) const;
  /// v' * cov * v
  double quad_form(const Eigen::VectorXd& v) const;

 private:
  GaussianModel() = default;
  bool kron_ = false;
  int dim_ = 0;
  Eigen::MatrixXd row_cov_;  // dense covariance, or the row factor
  Eigen::MatrixXd col_cov_;  // column factor when kron_
};

/// Interval and slack summarizing the conditioning event for one contrast:
/// on the event, the test statistic lies in [lower, upper] and
/// zero_margin >= 0, with `residual` the component of the observation
/// independent of the statistic.
struct TruncationBounds {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  double zero_margin = std::numeric_limits<double>::infinity();
  Eigen::VectorXd residual;
};

/// Decompose the observation against the contrast direction and fold the
/// constraint system into bounds on the test statistic. Rows are classified
/// by the sign of row.(permuted direction) with tolerance
/// 1e-12 * (1 + |row| |direction|). With `require_consistent` (the default)
/// throws InconsistentConditioning when the observation violates the event
/// it was paired with, and DegenerateTruncation when the interval collapses.
TruncationBounds conditional_bounds(const ConstraintSystem& sys,
                                    const GaussianModel& model,
                                    const Eigen::VectorXd& contrast,
                                    const Eigen::VectorXd& obs, double lambda,
                                    bool require_consistent = true);

struct SelectiveTestResult {
  double stat = 0.0;          // contrast applied to the observation
  double variance = 0.0;      // contrast' cov contrast
  TruncationBounds bounds;
  double invariant_stat = 0.0;  // truncated-Gaussian CDF at the statistic
  double pvalue = 1.0;          // two-sided
  SegmentedClustering clustering;  // realized clustering (1d tests)
};

using ContrastBuilder =
    std::function<Eigen::VectorXd(const SegmentedClustering&)>;
using MultiContrastBuilder =
    std::function<Eigen::VectorXd(const ColumnClusterings&)>;

/// Mean-difference contrast between two index sets: 1/|g1| on g1 and
/// -1/|g2| on g2. Throws UndefinedContrast when a group is empty or the
/// groups overlap.
Eigen::VectorXd two_group_contrast(const std::vector<int>& g1,
                                   const std::vector<int>& g2, int n);

/// Compare the two halves of the balanced coarsening of the realized
/// clustering. Throws UndefinedContrast when only one cluster is realized.
ContrastBuilder balanced_contrast_builder();

/// Compare clusters k1 and k2 (0-based) of the realized clustering.
/// Throws UndefinedContrast when fewer clusters are realized.
ContrastBuilder cluster_pair_contrast_builder(int k1, int k2);

/// Post-clustering two-sided test in dimension one: fit the path, read the
/// clustering at `lambda`, build the contrast from it, and evaluate the
/// conditional p-value.
SelectiveTestResult selective_pvalue_1d(const std::vector<double>& x,
                                        double lambda,
                                        const GaussianModel& model,
                                        const ContrastBuilder& eta_builder);

/// Same test against the stacked per-column constraint system of an n x p
/// observation matrix; `model` covers the stacked n*p vector.
SelectiveTestResult selective_pvalue_multidim(
    const Eigen::MatrixXd& y, double lambda, const GaussianModel& model,
    const MultiContrastBuilder& kappa_builder);

/// Shortcut valid when the columns are independent (identity column
/// covariance): only column j0 and its own constraint block enter; the
/// other columns act through the aggregated clustering alone.
SelectiveTestResult selective_pvalue_independent(
    const Eigen::MatrixXd& y, double lambda, const Eigen::MatrixXd& row_cov,
    const AggregatedClustering& agg, int j0, int k1, int k2);

}  // namespace clustinf

#endif  // CLUSTINF_INFERENCE_HPP_
