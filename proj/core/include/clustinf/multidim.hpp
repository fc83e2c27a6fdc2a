#ifndef CLUSTINF_MULTIDIM_HPP_
#define CLUSTINF_MULTIDIM_HPP_

#include <Eigen/Core>
#include <vector>

#include "clustinf/clustering.hpp"
#include "clustinf/path.hpp"
#include "clustinf/polyhedron.hpp"

namespace clustinf {

/// Per-column paths and clusterings of an n x p observation matrix at a
/// shared penalty level.
struct ColumnClusterings {
  double lambda = 0.0;
  int n = 0;
  int p = 0;
  std::vector<RegularizationPath> paths;
  std::vector<SegmentedClustering> clusterings;
};

/// Solve the p separable column problems at penalty `lambda` > 0.
ColumnClusterings columnwise_paths(const Eigen::MatrixXd& y, double lambda);

/// Class indices rescaled column by column from {1..K} to {0, 1/(K-1),
/// ..., 1}; a single-cluster column becomes all zeros.
Eigen::MatrixXd rescale_labels(const ColumnClusterings& cc);

enum class AggregationMethod {
  HierarchicalEuclidean,
  HierarchicalHamming,
  Unanimity,
};

enum class Linkage { Complete, Average, Single, Ward };

/// A p-dimensional clustering of the rows; a deterministic function of the
/// per-column clusterings only. Labels are 0-based and assigned by the
/// smallest row index in each cluster; `degraded` reports a hierarchical
/// cut that asked for more clusters than there are distinct rows (the
/// distinct-row clustering is returned instead).
struct AggregatedClustering {
  std::vector<int> labels;
  int num_clusters = 0;
  AggregationMethod method = AggregationMethod::HierarchicalEuclidean;
  bool degraded = false;

  std::vector<int> cluster_members(int k) const;
};

/// Cluster the rows of the rescaled label matrix into `num_clusters`
/// groups. Unanimity ignores `num_clusters` and groups identical rows.
AggregatedClustering aggregate(const Eigen::MatrixXd& ytilde, int num_clusters,
                               AggregationMethod method,
                               Linkage linkage = Linkage::Complete);

/// Two-group mean-difference contrast on column j0 (0-based) between
/// clusters k1 and k2 of the aggregated clustering, as a stacked n*p
/// vector. Throws UndefinedContrast for missing or empty clusters.
Eigen::VectorXd build_kappa(const AggregatedClustering& agg, int j0, int k1,
                            int k2, int n, int p);

/// Stack the per-column constraint blocks; applying the system to the
/// stacked observation reproduces the p per-column products.
ConstraintSystem build_block_constraints(const ColumnClusterings& cc);

/// Deterministic agglomerative clustering of the rows of `points`, cut at
/// `num_clusters`. Equal-distance merges prefer lexicographically smaller
/// cluster pairs. Distances are Euclidean or Hamming (count of differing
/// coordinates).
std::vector<int> hierarchical_labels(const Eigen::MatrixXd& points,
                                     int num_clusters, bool hamming,
                                     Linkage linkage);

}  // namespace clustinf

#endif  // CLUSTINF_MULTIDIM_HPP_
