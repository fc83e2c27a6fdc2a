#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "clustinf/errors.hpp"
#include "clustinf/multidim.hpp"

/*
  Plain stored-matrix agglomerative clustering with Lance-Williams updates.
  The merge loop scans all active pairs and takes the smallest distance,
  preferring the lexicographically smallest (i, j) on ties, so the result
  is a deterministic function of the input points. Ward distances are kept
  squared; the other linkages operate on the raw metric. Quadratic memory,
  cubic worst-case time: the merged objects are short label profiles, so
  this stays comfortably fast at the row counts aggregation sees.
*/

namespace clustinf {

namespace {

double point_distance(const Eigen::MatrixXd& points, int a, int b,
                      bool hamming) {
  if (hamming) {
    int count = 0;
    for (int j = 0; j < points.cols(); ++j)
      if (points(a, j) != points(b, j)) ++count;
    return static_cast<double>(count);
  }
  return (points.row(a) - points.row(b)).norm();
}

}  // namespace

std::vector<int> hierarchical_labels(const Eigen::MatrixXd& points,
                                     int num_clusters, bool hamming,
                                     Linkage linkage) {
  int n = static_cast<int>(points.rows());
  if (num_clusters < 1 || num_clusters > n)
    throw InvalidInput("hierarchical_labels: cluster count out of range");

  std::vector<double> dist(static_cast<std::size_t>(n) * n, 0.0);
  auto d = [&dist, n](int i, int j) -> double& {
    return dist[static_cast<std::size_t>(i) * n + j];
  };
  bool squared = linkage == Linkage::Ward;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double v = point_distance(points, i, j, hamming);
      if (squared) v *= v;
      d(i, j) = d(j, i) = v;
    }

  std::vector<char> active(n, 1);
  std::vector<double> size(n, 1.0);
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;

  int remaining = n;
  while (remaining > num_clusters) {
    int best_i = -1, best_j = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (int j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        if (d(i, j) < best) {
          best = d(i, j);
          best_i = i;
          best_j = j;
        }
      }
    }
    // Merge j into i (i < j keeps ids lexicographically stable).
    double ni = size[best_i], nj = size[best_j], dij = best;
    for (int w = 0; w < n; ++w) {
      if (!active[w] || w == best_i || w == best_j) continue;
      double diw = d(best_i, w), djw = d(best_j, w);
      double updated;
      switch (linkage) {
        case Linkage::Single:
          updated = std::min(diw, djw);
          break;
        case Linkage::Complete:
          updated = std::max(diw, djw);
          break;
        case Linkage::Average:
          updated = (ni * diw + nj * djw) / (ni + nj);
          break;
        case Linkage::Ward: {
          double nw = size[w];
          updated = ((ni + nw) * diw + (nj + nw) * djw - nw * dij) /
                    (ni + nj + nw);
          break;
        }
      }
      d(best_i, w) = d(w, best_i) = updated;
    }
    size[best_i] += size[best_j];
    active[best_j] = 0;
    parent[best_j] = best_i;
    --remaining;
  }

  auto find_root = [&parent](int i) {
    while (parent[i] != i) i = parent[i];
    return i;
  };
  std::vector<int> remap(n, -1);
  std::vector<int> labels(n);
  int next_label = 0;
  for (int i = 0; i < n; ++i) {
    int root = find_root(i);
    if (remap[root] == -1) remap[root] = next_label++;
    labels[i] = remap[root];
  }
  return labels;
}

}  // namespace clustinf
