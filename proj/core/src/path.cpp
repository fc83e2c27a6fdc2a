#include "clustinf/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "clustinf/errors.hpp"

/*
  Exact path of the one-dimensional fused clustering problem

      min_B  1/2 ||B - x||^2 + lambda * sum_{i<i'} |B_i - B_{i'}|.

  On the segment between two fusion events the fitted value of a cluster
  occupying descending ranks [lo, hi) is affine in lambda:

      b(lambda) = mean(x[lo..hi)) + lambda * (lo - (n - hi)),

  i.e. the cluster drifts toward the data it has above and away from the
  data below, at a speed set only by how many points sit on each side.
  Consequently two adjacent clusters u (above) and v (below) meet at

      lambda(u, v) = (mean_u - mean_v) / (|u| + |v|),

  a quantity that does not change when unrelated clusters fuse. Each
  adjacent pair therefore gets a single fusion level, computed once from
  prefix sums; the solver just replays these levels in increasing order.
  The heap engine keeps them in a min-heap and lazily discards entries
  whose clusters have since been consumed, giving O(n log n) time and
  O(n) memory after the initial sort. The naive engine rescans all pairs
  at every step and is kept as a reference.

  Pairs whose fusion levels agree to within a relative tolerance of 1e-12
  are fused in a single step, so exact ties (which occur for symmetric
  inputs) produce one breakpoint rather than several.
*/

namespace clustinf {

namespace {

constexpr double kTieRelTol = 1e-12;

// Fenwick tree counting boundaries still alive, used to translate a
// boundary position into the 0-based index of the cluster to its left.
class BoundaryCounter {
 public:
  explicit BoundaryCounter(int n) : tree_(n + 1, 0), n_(n) {}

  void add(int pos, int delta) {
    for (int i = pos; i <= n_; i += i & -i) tree_[i] += delta;
  }

  int count_up_to(int pos) const {
    int s = 0;
    for (int i = pos; i > 0; i -= i & -i) s += tree_[i];
    return s;
  }

 private:
  std::vector<int> tree_;
  int n_;
};

struct PairEntry {
  double lambda;
  int left;
  int right;
};

struct PairEntryGreater {
  const std::vector<int>* hi;
  bool operator()(const PairEntry& a, const PairEntry& b) const {
    if (a.lambda != b.lambda) return a.lambda > b.lambda;
    return (*hi)[a.left] > (*hi)[b.left];
  }
};

// Mutable cluster registry shared by both engines. Clusters are identified
// by creation order; a fusion retires its operands and appends a new one.
class PathBuilder {
 public:
  explicit PathBuilder(const std::vector<double>& x) : counter_(std::max(1, static_cast<int>(x.size()) - 1)) {
    if (x.empty()) throw InvalidInput("compute_path: empty input");
    for (double v : x)
      if (!std::isfinite(v)) throw InvalidInput("compute_path: non-finite input");

    path_.n = static_cast<int>(x.size());
    path_.order = sort_descending(x);
    path_.sorted_values.resize(path_.n);
    for (int r = 0; r < path_.n; ++r)
      path_.sorted_values[r] = x[path_.order.rank_to_index[r]];
    path_.prefix_sums.assign(path_.n + 1, 0.0);
    for (int r = 0; r < path_.n; ++r)
      path_.prefix_sums[r + 1] = path_.prefix_sums[r] + path_.sorted_values[r];

    // Groups of exactly equal values form the lambda = 0 clustering.
    path_.initial.n = path_.n;
    path_.initial.order = path_.order;
    path_.initial.boundaries.push_back(0);
    for (int r = 1; r < path_.n; ++r)
      if (path_.sorted_values[r] != path_.sorted_values[r - 1])
        path_.initial.boundaries.push_back(r);
    path_.initial.boundaries.push_back(path_.n);
    path_.initial.num_clusters =
        static_cast<int>(path_.initial.boundaries.size()) - 1;

    int k0 = path_.initial.num_clusters;
    path_.initial_centers.resize(k0);
    pos_to_initial_.assign(path_.n + 1, -1);
    path_.boundary_removal_step.assign(k0 - 1, std::numeric_limits<int>::max());
    for (int k = 0; k < k0; ++k) {
      int lo = path_.initial.boundaries[k];
      int hi = path_.initial.boundaries[k + 1];
      path_.initial_centers[k] = path_.sorted_values[lo];
      make_cluster(lo, hi, k > 0 ? k - 1 : -1, k + 1 < k0 ? k + 1 : -1);
      if (k + 1 < k0) {
        pos_to_initial_[hi] = k;
        counter_.add(hi, 1);
      }
    }
    head_ = 0;
    live_ = k0;
    path_.breakpoints.push_back(0.0);
  }

  int live_clusters() const { return live_; }
  int head() const { return head_; }
  int next_of(int id) const { return next_[id]; }
  int prev_of(int id) const { return prev_[id]; }
  bool pair_alive(int left, int right) const {
    return alive_[left] && next_[left] == right;
  }
  int boundary_of(int left) const { return hi_[left]; }
  const std::vector<int>& hi() const { return hi_; }

  double mean_of(int id) const {
    return (path_.prefix_sums[hi_[id]] - path_.prefix_sums[lo_[id]]) /
           (hi_[id] - lo_[id]);
  }

  // Fusion level of the adjacent pair (left, right), right = next of left.
  double fusion_level(int left, int right) {
    ++path_.stats.pair_evaluations;
    double gap = mean_of(left) - mean_of(right);
    return gap / ((hi_[left] - lo_[left]) + (hi_[right] - lo_[right]));
  }

  // Fuse the chains described by `lefts` (each entry: a cluster fusing with
  // its right neighbor) at level `lambda_star`, recording one breakpoint and
  // one merge event per removed boundary. Returns the ids of the clusters
  // created by this step.
  std::vector<int> fuse_batch(std::vector<int> lefts, double lambda_star) {
    // Strictly increasing breakpoints even if rounding made a later fusion
    // level land a hair below the previous one.
    double prev_bp = path_.breakpoints.back();
    if (lambda_star <= prev_bp)
      lambda_star = std::nextafter(prev_bp, std::numeric_limits<double>::infinity());
    path_.breakpoints.push_back(lambda_star);
    int step = static_cast<int>(path_.breakpoints.size()) - 1;

    std::sort(lefts.begin(), lefts.end(),
              [this](int a, int b) { return hi_[a] < hi_[b]; });

    // Cluster indices in the pre-step clustering, all computed before any
    // boundary is dropped so simultaneous fusions report consistent ranks.
    for (int a : lefts) {
      int pos = hi_[a];
      int right_index = counter_.count_up_to(pos);
      MergeEvent ev;
      ev.lambda = lambda_star;
      ev.step = step;
      ev.boundary = pos;
      ev.left_cluster = right_index - 1;
      ev.right_cluster = right_index;
      path_.merges.push_back(ev);
    }
    for (int a : lefts) {
      int pos = hi_[a];
      counter_.add(pos, -1);
      path_.boundary_removal_step[pos_to_initial_[pos]] = step;
      fusing_right_[a] = 1;
    }

    std::vector<int> created;
    for (int a : lefts) {
      if (!alive_[a]) continue;  // already consumed by a chain to its left
      int start = a;
      while (prev_[start] != -1 && fusing_right_[prev_[start]]) start = prev_[start];
      int end = start;
      while (fusing_right_[end]) end = next_[end];
      int left_neighbor = prev_[start];
      int right_neighbor = next_[end];
      int merged = make_cluster(lo_[start], hi_[end], left_neighbor, right_neighbor);
      for (int c = start;;) {
        int nx = next_[c];
        alive_[c] = 0;
        --live_;
        if (c == end) break;
        c = nx;
      }
      ++live_;
      if (left_neighbor != -1) next_[left_neighbor] = merged;
      else head_ = merged;
      if (right_neighbor != -1) prev_[right_neighbor] = merged;
      created.push_back(merged);
    }
    for (int a : lefts) fusing_right_[a] = 0;
    return created;
  }

  RegularizationPath take() { return std::move(path_); }

 private:
  int make_cluster(int lo, int hi, int prev, int next) {
    lo_.push_back(lo);
    hi_.push_back(hi);
    prev_.push_back(prev);
    next_.push_back(next);
    alive_.push_back(1);
    fusing_right_.push_back(0);
    return static_cast<int>(lo_.size()) - 1;
  }

  RegularizationPath path_;
  std::vector<int> lo_, hi_, prev_, next_;
  std::vector<char> alive_, fusing_right_;
  BoundaryCounter counter_;
  std::vector<int> pos_to_initial_;
  int head_ = -1;
  int live_ = 0;
};

RegularizationPath run_heap(PathBuilder& b) {
  std::priority_queue<PairEntry, std::vector<PairEntry>, PairEntryGreater> heap{
      PairEntryGreater{&b.hi()}};
  std::size_t pushes = 0, max_size = 0;
  auto push_pair = [&](int left, int right) {
    heap.push({b.fusion_level(left, right), left, right});
    ++pushes;
    max_size = std::max(max_size, heap.size());
  };
  for (int id = b.head(); b.next_of(id) != -1; id = b.next_of(id))
    push_pair(id, b.next_of(id));

  while (b.live_clusters() > 1) {
    PairEntry first{};
    for (;;) {
      first = heap.top();
      heap.pop();
      if (b.pair_alive(first.left, first.right)) break;
    }
    double threshold = first.lambda * (1.0 + kTieRelTol);
    std::vector<int> lefts{first.left};
    while (!heap.empty()) {
      const PairEntry& top = heap.top();
      if (!b.pair_alive(top.left, top.right)) {
        heap.pop();
        continue;
      }
      if (top.lambda <= threshold) {
        lefts.push_back(top.left);
        heap.pop();
        continue;
      }
      break;
    }
    std::vector<int> created = b.fuse_batch(std::move(lefts), first.lambda);
    int first_new = created.empty() ? 0 : created.front();
    for (int w : created) {
      if (b.prev_of(w) != -1) push_pair(b.prev_of(w), w);
      if (b.next_of(w) != -1 && b.next_of(w) < first_new) push_pair(w, b.next_of(w));
    }
  }
  RegularizationPath path = b.take();
  path.stats.heap_pushes = pushes;
  path.stats.max_heap_size = max_size;
  return path;
}

RegularizationPath run_naive(PathBuilder& b) {
  while (b.live_clusters() > 1) {
    double best = std::numeric_limits<double>::infinity();
    for (int id = b.head(); b.next_of(id) != -1; id = b.next_of(id))
      best = std::min(best, b.fusion_level(id, b.next_of(id)));
    double threshold = best * (1.0 + kTieRelTol);
    std::vector<int> lefts;
    for (int id = b.head(); b.next_of(id) != -1; id = b.next_of(id))
      if (b.fusion_level(id, b.next_of(id)) <= threshold) lefts.push_back(id);
    b.fuse_batch(std::move(lefts), best);
  }
  return b.take();
}

}  // namespace

RegularizationPath compute_path(const std::vector<double>& x, PathEngine engine) {
  PathBuilder builder(x);
  return engine == PathEngine::Heap ? run_heap(builder) : run_naive(builder);
}

double segment_mean(const RegularizationPath& path, int lo, int hi) {
  return (path.prefix_sums[hi] - path.prefix_sums[lo]) / (hi - lo);
}

int RegularizationPath::step_at(double lambda) const {
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), lambda);
  if (it == breakpoints.begin()) return 0;
  return static_cast<int>(it - breakpoints.begin()) - 1;
}

SegmentedClustering RegularizationPath::clustering_at(double lambda) const {
  int step = step_at(lambda);
  SegmentedClustering c;
  c.n = n;
  c.order = order;
  c.boundaries.push_back(0);
  for (std::size_t k = 0; k < boundary_removal_step.size(); ++k)
    if (boundary_removal_step[k] > step)
      c.boundaries.push_back(initial.boundaries[k + 1]);
  c.boundaries.push_back(n);
  c.num_clusters = static_cast<int>(c.boundaries.size()) - 1;
  return c;
}

FittedSolution solution_at(const RegularizationPath& path, double lambda) {
  if (lambda < 0.0 || !std::isfinite(lambda))
    throw InvalidInput("solution_at: lambda must be finite and >= 0");
  FittedSolution sol;
  sol.lambda = lambda;
  sol.clustering = path.clustering_at(lambda);
  const auto& t = sol.clustering.boundaries;
  int k_count = sol.clustering.num_clusters;
  sol.centers.resize(k_count);
  sol.fitted.resize(path.n);
  for (int k = 0; k < k_count; ++k) {
    int lo = t[k], hi = t[k + 1];
    double slope = static_cast<double>(lo) - static_cast<double>(path.n - hi);
    double center = segment_mean(path, lo, hi) + lambda * slope;
    sol.centers[k] = center;
    for (int r = lo; r < hi; ++r)
      sol.fitted[path.order.rank_to_index[r]] = center;
  }
  return sol;
}

double lambda_max(const std::vector<double>& x) {
  if (x.size() < 2) throw InvalidInput("lambda_max: need n >= 2");
  for (double v : x)
    if (!std::isfinite(v)) throw InvalidInput("lambda_max: non-finite input");
  std::vector<double> sorted(x);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  int n = static_cast<int>(sorted.size());
  double total = 0.0;
  for (double v : sorted) total += v;
  double grand_mean = total / n;
  double best = 0.0;
  double prefix = 0.0;
  for (int i = 1; i < n; ++i) {
    prefix += sorted[i - 1];
    best = std::max(best, (prefix / i - grand_mean) / (n - i));
  }
  return best;
}

double clustering_objective(const std::vector<double>& sorted_values,
                            const std::vector<int>& boundaries,
                            const std::vector<double>& centers, double lambda) {
  int k_count = static_cast<int>(centers.size());
  double quad = 0.0;
  for (int k = 0; k < k_count; ++k)
    for (int r = boundaries[k]; r < boundaries[k + 1]; ++r) {
      double d = centers[k] - sorted_values[r];
      quad += d * d;
    }
  double pen = 0.0;
  for (int k = 0; k < k_count; ++k)
    for (int k2 = k + 1; k2 < k_count; ++k2) {
      double size_k = boundaries[k + 1] - boundaries[k];
      double size_k2 = boundaries[k2 + 1] - boundaries[k2];
      pen += size_k * size_k2 * std::abs(centers[k] - centers[k2]);
    }
  return 0.5 * quad + lambda * pen;
}

FittedSolution brute_force_solve(const std::vector<double>& x, double lambda) {
  int n = static_cast<int>(x.size());
  if (n < 1) throw InvalidInput("brute_force_solve: empty input");
  if (n > 20)
    throw OracleSizeExceeded("brute_force_solve: enumeration capped at n = 20");
  if (lambda < 0.0 || !std::isfinite(lambda))
    throw InvalidInput("brute_force_solve: lambda must be finite and >= 0");

  Ordering order = sort_descending(x);
  std::vector<double> sorted(n);
  for (int r = 0; r < n; ++r) sorted[r] = x[order.rank_to_index[r]];
  std::vector<double> prefix(n + 1, 0.0);
  for (int r = 0; r < n; ++r) prefix[r + 1] = prefix[r] + sorted[r];

  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<int> best_boundaries;
  std::vector<double> best_centers;
  std::vector<int> boundaries;
  std::vector<double> centers;

  std::uint64_t masks = std::uint64_t{1} << (n - 1);
  for (std::uint64_t mask = 0; mask < masks; ++mask) {
    boundaries.clear();
    boundaries.push_back(0);
    for (int b = 1; b < n; ++b)
      if (mask & (std::uint64_t{1} << (b - 1))) boundaries.push_back(b);
    boundaries.push_back(n);
    int k_count = static_cast<int>(boundaries.size()) - 1;
    centers.resize(k_count);
    for (int k = 0; k < k_count; ++k) {
      int lo = boundaries[k], hi = boundaries[k + 1];
      double mean = (prefix[hi] - prefix[lo]) / (hi - lo);
      centers[k] = mean + lambda * (static_cast<double>(lo) -
                                    static_cast<double>(n - hi));
    }
    double obj = clustering_objective(sorted, boundaries, centers, lambda);
    if (obj < best_obj) {
      best_obj = obj;
      best_boundaries = boundaries;
      best_centers = centers;
    }
  }

  // Canonicalize: a segmentation finer than the optimal clustering can
  // reproduce the same fitted vector at a breakpoint; equal adjacent
  // centers are one cluster.
  FittedSolution sol;
  sol.lambda = lambda;
  sol.clustering.n = n;
  sol.clustering.order = order;
  sol.clustering.boundaries.push_back(0);
  for (std::size_t k = 1; k + 1 < best_boundaries.size(); ++k) {
    if (best_centers[k] != best_centers[k - 1]) {
      sol.clustering.boundaries.push_back(best_boundaries[k]);
      sol.centers.push_back(best_centers[k - 1]);
    }
  }
  sol.clustering.boundaries.push_back(n);
  sol.centers.push_back(best_centers.back());
  sol.clustering.num_clusters = static_cast<int>(sol.centers.size());
  sol.fitted.resize(n);
  for (int k = 0; k < sol.clustering.num_clusters; ++k)
    for (int r = sol.clustering.boundaries[k]; r < sol.clustering.boundaries[k + 1]; ++r)
      sol.fitted[order.rank_to_index[r]] = sol.centers[k];
  return sol;
}

}  // namespace clustinf
