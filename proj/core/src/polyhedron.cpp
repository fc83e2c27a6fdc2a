#include "clustinf/polyhedron.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "clustinf/errors.hpp"
#include "clustinf/path.hpp"

namespace clustinf {

double SparseRow::norm() const {
  double s = 0.0;
  for (double v : vals) s += v * v;
  return std::sqrt(s);
}

double row_dot(const SparseRow& row, const Ordering& order, const double* x) {
  double s = 0.0;
  for (std::size_t i = 0; i < row.cols.size(); ++i)
    s += row.vals[i] * x[order.rank_to_index[row.cols[i]]];
  return s;
}

PolyhedralConstraint build_constraints(const SegmentedClustering& c) {
  c.validate();
  PolyhedralConstraint pc;
  pc.n = c.n;
  pc.num_clusters = c.num_clusters;
  const auto& t = c.boundaries;
  int n = c.n, k_count = c.num_clusters;

  pc.order_rows.reserve(n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    SparseRow row;
    row.cols = {i, i + 1};
    row.vals = {-1.0, 1.0};
    pc.order_rows.push_back(std::move(row));
  }

  pc.separation_rows.reserve(k_count - 1);
  pc.separation_bounds.reserve(k_count - 1);
  for (int k = 0; k + 1 < k_count; ++k) {
    SparseRow row;
    int size_k = t[k + 1] - t[k];
    int size_next = t[k + 2] - t[k + 1];
    for (int r = t[k]; r < t[k + 1]; ++r) {
      row.cols.push_back(r);
      row.vals.push_back(-1.0 / size_k);
    }
    for (int r = t[k + 1]; r < t[k + 2]; ++r) {
      row.cols.push_back(r);
      row.vals.push_back(1.0 / size_next);
    }
    pc.separation_rows.push_back(std::move(row));
    pc.separation_bounds.push_back(-static_cast<double>(t[k + 2] - t[k]));
  }

  for (int k = 0; k < k_count; ++k) {
    int size_k = t[k + 1] - t[k];
    for (int len = 1; len < size_k; ++len) {
      SparseRow row;
      for (int j = 0; j < size_k; ++j) {
        double v = -1.0 / size_k;
        if (j < len) v += 1.0 / len;
        row.cols.push_back(t[k] + j);
        row.vals.push_back(v);
      }
      pc.cohesion_rows.push_back(std::move(row));
      pc.cohesion_bounds.push_back(static_cast<double>(size_k - len));
    }
  }
  return pc;
}

MembershipReport check_membership(const PolyhedralConstraint& pc,
                                  const Ordering& order,
                                  const std::vector<double>& x, double lambda,
                                  double tol) {
  if (order.size() != pc.n || static_cast<int>(x.size()) != pc.n)
    throw InvalidInput("check_membership: dimension mismatch");
  constexpr double inf = std::numeric_limits<double>::infinity();
  MembershipReport report;
  report.member = true;
  report.worst_order_slack = inf;
  report.worst_separation_slack = inf;
  report.worst_cohesion_slack = inf;

  auto slack_of = [&](const SparseRow& row, double bound) {
    return lambda * bound - row_dot(row, order, x.data());
  };
  for (const auto& row : pc.order_rows) {
    double s = slack_of(row, 0.0);
    report.worst_order_slack = std::min(report.worst_order_slack, s);
    if (s < -tol) report.member = false;
  }
  for (std::size_t i = 0; i < pc.separation_rows.size(); ++i) {
    double s = slack_of(pc.separation_rows[i], pc.separation_bounds[i]);
    report.worst_separation_slack = std::min(report.worst_separation_slack, s);
    if (!(s > 0.0)) report.member = false;
  }
  for (std::size_t i = 0; i < pc.cohesion_rows.size(); ++i) {
    double s = slack_of(pc.cohesion_rows[i], pc.cohesion_bounds[i]);
    double bound_scale = 1.0 + std::abs(lambda * pc.cohesion_bounds[i]);
    report.worst_cohesion_slack = std::min(report.worst_cohesion_slack, s);
    if (s < -tol * bound_scale) report.member = false;
  }
  return report;
}

namespace {

std::uint64_t hash_input(const std::vector<double>& x, double lambda) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    h ^= bits;
    h *= 1099511628211ull;
  };
  for (double v : x) mix(v);
  mix(lambda);
  return h;
}

}  // namespace

bool verify_equivalence(const std::vector<double>& x, double lambda) {
  if (x.empty()) throw InvalidInput("verify_equivalence: empty input");
  RegularizationPath path = compute_path(x);
  SegmentedClustering realized = path.clustering_at(lambda);
  PolyhedralConstraint pc = build_constraints(realized);
  if (!check_membership(pc, realized.order, x, lambda).member) return false;

  int n = realized.n;
  if (n == 1) return true;
  std::mt19937_64 rng(hash_input(x, lambda));

  // Swapping two adjacent, non-tied ranks breaks the order block.
  for (int r = 0; r + 1 < n; ++r) {
    if (path.sorted_values[r] == path.sorted_values[r + 1]) continue;
    Ordering perturbed = realized.order;
    std::swap(perturbed.rank_to_index[r], perturbed.rank_to_index[r + 1]);
    if (check_membership(pc, perturbed, x, lambda).member) return false;
  }

  // A different segmentation at the same penalty must fail: the fitted
  // clustering is unique. Try removing and inserting boundaries.
  const auto& t = realized.boundaries;
  int k_count = realized.num_clusters;
  for (int trial = 0; trial < 8; ++trial) {
    SegmentedClustering other = realized;
    if (k_count >= 2 && (trial % 2 == 0 || k_count == n)) {
      int drop = 1 + static_cast<int>(rng() % (k_count - 1));
      other.boundaries.erase(other.boundaries.begin() + drop);
    } else {
      std::vector<int> missing;
      for (int pos = 1; pos < n; ++pos)
        if (!std::binary_search(t.begin(), t.end(), pos)) missing.push_back(pos);
      if (missing.empty()) continue;
      int pos = missing[rng() % missing.size()];
      other.boundaries.insert(
          std::upper_bound(other.boundaries.begin(), other.boundaries.end(), pos),
          pos);
    }
    other.num_clusters = static_cast<int>(other.boundaries.size()) - 1;
    PolyhedralConstraint other_pc = build_constraints(other);
    if (check_membership(other_pc, other.order, x, lambda).member) return false;
  }
  return true;
}

int ConstraintSystem::total_rows() const {
  int rows = 0;
  for (const auto& b : blocks) rows += b.total_rows();
  return rows;
}

ConstraintSystem single_block(PolyhedralConstraint pc, Ordering order) {
  ConstraintSystem sys;
  sys.block_dim = pc.n;
  sys.blocks.push_back(std::move(pc));
  sys.orders.push_back(std::move(order));
  return sys;
}

}  // namespace clustinf
