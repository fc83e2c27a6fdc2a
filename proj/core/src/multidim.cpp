#include "clustinf/multidim.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "clustinf/errors.hpp"

namespace clustinf {

ColumnClusterings columnwise_paths(const Eigen::MatrixXd& y, double lambda) {
  if (!(lambda > 0.0))
    throw InvalidInput("columnwise_paths: lambda must be > 0");
  ColumnClusterings cc;
  cc.lambda = lambda;
  cc.n = static_cast<int>(y.rows());
  cc.p = static_cast<int>(y.cols());
  if (cc.n < 1 || cc.p < 1)
    throw InvalidInput("columnwise_paths: empty observation matrix");
  cc.paths.reserve(cc.p);
  cc.clusterings.reserve(cc.p);
  for (int j = 0; j < cc.p; ++j) {
    std::vector<double> column(y.col(j).data(), y.col(j).data() + cc.n);
    cc.paths.push_back(compute_path(column));
    cc.clusterings.push_back(cc.paths.back().clustering_at(lambda));
  }
  return cc;
}

Eigen::MatrixXd rescale_labels(const ColumnClusterings& cc) {
  Eigen::MatrixXd ytilde = Eigen::MatrixXd::Zero(cc.n, cc.p);
  for (int j = 0; j < cc.p; ++j) {
    const SegmentedClustering& c = cc.clusterings[j];
    if (c.num_clusters == 1) continue;  // no between-row information
    std::vector<int> labels = c.labels();
    double denom = c.num_clusters - 1;
    for (int i = 0; i < cc.n; ++i) ytilde(i, j) = labels[i] / denom;
  }
  return ytilde;
}

std::vector<int> AggregatedClustering::cluster_members(int k) const {
  std::vector<int> members;
  for (int i = 0; i < static_cast<int>(labels.size()); ++i)
    if (labels[i] == k) members.push_back(i);
  return members;
}

namespace {

// Group exactly identical rows; labels ordered by smallest row index.
std::vector<int> distinct_row_labels(const Eigen::MatrixXd& points,
                                     int* num_groups) {
  int n = static_cast<int>(points.rows());
  std::map<std::vector<double>, int> seen;
  std::vector<int> labels(n);
  std::vector<double> key(points.cols());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < points.cols(); ++j) key[j] = points(i, j);
    auto [it, inserted] = seen.emplace(key, static_cast<int>(seen.size()));
    labels[i] = it->second;
  }
  *num_groups = static_cast<int>(seen.size());
  return labels;
}

std::vector<int> relabel_by_first_member(const std::vector<int>& raw) {
  std::vector<int> first_seen;
  std::vector<int> remap(raw.size(), -1);
  std::vector<int> labels(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (remap[raw[i]] == -1) {
      remap[raw[i]] = static_cast<int>(first_seen.size());
      first_seen.push_back(raw[i]);
    }
    labels[i] = remap[raw[i]];
  }
  return labels;
}

}  // namespace

AggregatedClustering aggregate(const Eigen::MatrixXd& ytilde, int num_clusters,
                               AggregationMethod method, Linkage linkage) {
  int n = static_cast<int>(ytilde.rows());
  if (n < 1) throw InvalidInput("aggregate: empty matrix");
  AggregatedClustering agg;
  agg.method = method;

  int distinct = 0;
  std::vector<int> distinct_labels = distinct_row_labels(ytilde, &distinct);

  if (method == AggregationMethod::Unanimity) {
    agg.labels = relabel_by_first_member(distinct_labels);
    agg.num_clusters = distinct;
    return agg;
  }

  if (num_clusters < 1 || num_clusters > n)
    throw InvalidInput("aggregate: cluster count out of range");
  if (num_clusters >= distinct) {
    // Cutting below the number of distinct rows would split identical
    // rows arbitrarily; fall back to the distinct-row clustering.
    agg.labels = relabel_by_first_member(distinct_labels);
    agg.num_clusters = distinct;
    agg.degraded = num_clusters > distinct;
    return agg;
  }

  bool hamming = method == AggregationMethod::HierarchicalHamming;
  agg.labels = hierarchical_labels(ytilde, num_clusters, hamming, linkage);
  agg.num_clusters = num_clusters;
  return agg;
}

Eigen::VectorXd build_kappa(const AggregatedClustering& agg, int j0, int k1,
                            int k2, int n, int p) {
  if (static_cast<int>(agg.labels.size()) != n)
    throw InvalidInput("build_kappa: label vector has wrong length");
  if (j0 < 0 || j0 >= p) throw InvalidInput("build_kappa: column out of range");
  if (k1 == k2) throw UndefinedContrast("build_kappa: identical clusters");
  if (k1 < 0 || k2 < 0 || k1 >= agg.num_clusters || k2 >= agg.num_clusters)
    throw UndefinedContrast("build_kappa: cluster index beyond clustering");
  std::vector<int> g1 = agg.cluster_members(k1);
  std::vector<int> g2 = agg.cluster_members(k2);
  if (g1.empty() || g2.empty())
    throw UndefinedContrast("build_kappa: empty cluster");
  Eigen::VectorXd kappa = Eigen::VectorXd::Zero(static_cast<long>(n) * p);
  for (int i : g1) kappa[i + static_cast<long>(j0) * n] = 1.0 / g1.size();
  for (int i : g2) kappa[i + static_cast<long>(j0) * n] = -1.0 / g2.size();
  return kappa;
}

ConstraintSystem build_block_constraints(const ColumnClusterings& cc) {
  ConstraintSystem sys;
  sys.block_dim = cc.n;
  sys.blocks.reserve(cc.p);
  sys.orders.reserve(cc.p);
  for (int j = 0; j < cc.p; ++j) {
    sys.blocks.push_back(build_constraints(cc.clusterings[j]));
    sys.orders.push_back(cc.clusterings[j].order);
  }
  return sys;
}

}  // namespace clustinf
