#include "clustinf/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "clustinf/errors.hpp"

namespace clustinf {

std::vector<int> Ordering::index_to_rank() const {
  std::vector<int> inv(rank_to_index.size());
  for (int r = 0; r < size(); ++r) inv[rank_to_index[r]] = r;
  return inv;
}

Ordering sort_descending(const std::vector<double>& x) {
  Ordering ord;
  ord.rank_to_index.resize(x.size());
  std::iota(ord.rank_to_index.begin(), ord.rank_to_index.end(), 0);
  std::sort(ord.rank_to_index.begin(), ord.rank_to_index.end(),
            [&x](int a, int b) {
              if (x[a] != x[b]) return x[a] > x[b];
              return a < b;
            });
  return ord;
}

int SegmentedClustering::cluster_of_rank(int rank) const {
  auto it = std::upper_bound(boundaries.begin(), boundaries.end(), rank);
  return static_cast<int>(it - boundaries.begin()) - 1;
}

std::vector<int> SegmentedClustering::cluster_members(int k) const {
  std::vector<int> members;
  members.reserve(cluster_size(k));
  for (int r = boundaries[k]; r < boundaries[k + 1]; ++r)
    members.push_back(order.rank_to_index[r]);
  return members;
}

std::vector<int> SegmentedClustering::labels() const {
  std::vector<int> lab(n);
  for (int k = 0; k < num_clusters; ++k)
    for (int r = boundaries[k]; r < boundaries[k + 1]; ++r)
      lab[order.rank_to_index[r]] = k;
  return lab;
}

void SegmentedClustering::validate() const {
  if (n < 1) throw InvalidInput("clustering: n must be >= 1");
  if (num_clusters < 1 || num_clusters > n)
    throw InvalidInput("clustering: K out of range");
  if (static_cast<int>(boundaries.size()) != num_clusters + 1)
    throw InvalidInput("clustering: boundary vector has wrong length");
  if (boundaries.front() != 0 || boundaries.back() != n)
    throw InvalidInput("clustering: boundaries must start at 0 and end at n");
  for (int k = 0; k < num_clusters; ++k)
    if (boundaries[k] >= boundaries[k + 1])
      throw InvalidInput("clustering: boundaries must be strictly increasing");
  if (order.size() != n)
    throw InvalidInput("clustering: ordering has wrong length");
  std::vector<char> seen(n, 0);
  for (int idx : order.rank_to_index) {
    if (idx < 0 || idx >= n || seen[idx])
      throw InvalidInput("clustering: ordering is not a permutation");
    seen[idx] = 1;
  }
}

SegmentedClustering balanced_two_merge(const SegmentedClustering& c) {
  if (c.num_clusters < 2)
    throw NotEnoughClusters("balanced_two_merge: need at least two clusters");
  int best_q = 1;
  int best_imbalance = std::abs(2 * c.boundaries[1] - c.n);
  for (int q = 2; q < c.num_clusters; ++q) {
    int imbalance = std::abs(2 * c.boundaries[q] - c.n);
    if (imbalance < best_imbalance) {
      best_imbalance = imbalance;
      best_q = q;
    }
  }
  SegmentedClustering merged;
  merged.n = c.n;
  merged.num_clusters = 2;
  merged.boundaries = {0, c.boundaries[best_q], c.n};
  merged.order = c.order;
  return merged;
}

}  // namespace clustinf
