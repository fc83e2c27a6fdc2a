#ifndef CLUSTINF_PATH_HPP_
#define CLUSTINF_PATH_HPP_

#include <cstdint>
#include <vector>

#include "clustinf/clustering.hpp"

namespace clustinf {

/// Fusion of two adjacent clusters along the path. `boundary` is the
/// cumulative position (1..n-1, in the descending order) that disappears;
/// `left_cluster`/`right_cluster` are the 0-based positions of the fused
/// clusters in the clustering active just before this step.
struct MergeEvent {
  double lambda = 0.0;
  int step = 0;  // index of the breakpoint this merge creates
  int boundary = 0;
  int left_cluster = 0;
  int right_cluster = 0;
};

/// Counters reported by the path solver, used to check the linear-memory
/// contract of the heap engine.
struct PathStats {
  std::size_t heap_pushes = 0;
  std::size_t max_heap_size = 0;
  std::size_t pair_evaluations = 0;
};

/// Full history of the penalized fits for every penalty level at once:
/// breakpoints where adjacent clusters fuse, the fusion tree, and enough
/// precomputed state (descending values, prefix sums) to rebuild the
/// solution at any penalty in O(n).
struct RegularizationPath {
  int n = 0;
  Ordering order;                       // descending order of the input
  std::vector<double> sorted_values;    // x in descending order
  std::vector<double> prefix_sums;      // size n+1, prefix_sums[i] = sum of first i sorted values
  std::vector<double> initial_centers;  // distinct values, descending
  SegmentedClustering initial;          // groups of exactly equal inputs
  std::vector<double> breakpoints;      // lambda(0)=0 < lambda(1) < ...
  std::vector<MergeEvent> merges;       // one per removed boundary
  std::vector<int> boundary_removal_step;  // per initial boundary, the step that removed it
  PathStats stats;

  int num_steps() const { return static_cast<int>(breakpoints.size()) - 1; }
  double final_breakpoint() const { return breakpoints.back(); }

  /// Index r of the segment [lambda(r), lambda(r+1)) containing `lambda`.
  int step_at(double lambda) const;

  /// Clustering active on the segment containing `lambda` (O(n)).
  SegmentedClustering clustering_at(double lambda) const;
};

/// Mean of the descending-rank range [lo, hi) taken from the path's prefix
/// sums. Shared by both engines so they produce bit-identical merge levels.
double segment_mean(const RegularizationPath& path, int lo, int hi);

enum class PathEngine {
  Heap,   // min-heap over adjacent fusion levels, O(n log n)
  Naive,  // rescan all adjacent pairs each step, O(n^2) worst case
};

/// Solve the clustering problem for all penalty levels at once.
/// Throws InvalidInput on empty or non-finite input.
RegularizationPath compute_path(const std::vector<double>& x,
                                PathEngine engine = PathEngine::Heap);

/// Solution of the penalized problem at one penalty level.
struct FittedSolution {
  double lambda = 0.0;
  std::vector<double> fitted;   // per original index
  std::vector<double> centers;  // strictly decreasing, one per cluster
  SegmentedClustering clustering;
};

/// Reconstruct the exact solution at `lambda` >= 0 from a computed path.
/// Beyond the final breakpoint every observation is fitted to the grand
/// mean. Throws InvalidInput for negative lambda.
FittedSolution solution_at(const RegularizationPath& path, double lambda);

/// Smallest penalty producing a single cluster, computed directly from the
/// sorted input in O(n). Equals the last breakpoint of compute_path.
/// Throws InvalidInput when n < 2.
double lambda_max(const std::vector<double>& x);

/// Value of the penalized objective at a fitted vector expressed as cluster
/// centers over a segmentation of the descending order.
double clustering_objective(const std::vector<double>& sorted_values,
                            const std::vector<int>& boundaries,
                            const std::vector<double>& centers, double lambda);

/// Exhaustive minimizer over all contiguous segmentations of the sorted
/// values (2^(n-1) candidates); the independent oracle for the path.
/// Throws OracleSizeExceeded when n > 20.
FittedSolution brute_force_solve(const std::vector<double>& x, double lambda);

}  // namespace clustinf

#endif  // CLUSTINF_PATH_HPP_
