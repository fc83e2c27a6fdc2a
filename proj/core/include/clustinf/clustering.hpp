#ifndef CLUSTINF_CLUSTERING_HPP_
#define CLUSTINF_CLUSTERING_HPP_

#include <vector>

namespace clustinf {

/// Permutation sending descending rank to original index:
/// x[rank_to_index[0]] >= x[rank_to_index[1]] >= ... Ties are broken by
/// ascending original index so the ordering is a deterministic function
/// of the data.
struct Ordering {
  std::vector<int> rank_to_index;

  int size() const { return static_cast<int>(rank_to_index.size()); }

  /// Inverse permutation: original index -> descending rank.
  std::vector<int> index_to_rank() const;
};

/// Build the descending ordering of x (ties by ascending index).
Ordering sort_descending(const std::vector<double>& x);

/// A clustering of n observations into contiguous runs of the descending
/// order. `boundaries` holds the cumulative right limits
/// 0 = t[0] < t[1] < ... < t[K] = n; cluster k covers descending ranks
/// t[k] .. t[k+1]-1. Cluster 0 has the largest fitted value.
struct SegmentedClustering {
  int n = 0;
  int num_clusters = 0;
  std::vector<int> boundaries;  // size num_clusters + 1
  Ordering order;

  int cluster_size(int k) const { return boundaries[k + 1] - boundaries[k]; }

  /// Cluster index of a descending rank (0-based).
  int cluster_of_rank(int rank) const;

  /// Members of cluster k as original indices.
  std::vector<int> cluster_members(int k) const;

  /// Label vector in original index order; labels are 0..K-1 from the
  /// cluster with the largest values down.
  std::vector<int> labels() const;

  /// Throws InvalidInput if the boundary vector or ordering is malformed.
  void validate() const;
};

/// Collapse a clustering with K >= 2 clusters into two groups
/// {0..q-1} and {q..K-1}, choosing q so the group sizes are as balanced
/// as possible (ties resolved by the smaller q).
/// Throws NotEnoughClusters when K < 2.
SegmentedClustering balanced_two_merge(const SegmentedClustering& c);

}  // namespace clustinf

#endif  // CLUSTINF_CLUSTERING_HPP_
