#ifndef CLUSTINF_POLYHEDRON_HPP_
#define CLUSTINF_POLYHEDRON_HPP_

#include <vector>

#include "clustinf/clustering.hpp"

namespace clustinf {

/// One constraint row stored sparsely. Columns index the descending-rank
/// coordinates, i.e. the row acts on the permuted vector (x[order[0]],
/// x[order[1]], ...).
struct SparseRow {
  std::vector<int> cols;
  std::vector<double> vals;

  double norm() const;
};

/// The clustering-and-ordering event written as linear inequalities
/// row . (permuted x) <= lambda * bound, split into its three blocks:
///   order rows      - adjacent observations are in descending order
///   separation rows - adjacent clusters stay apart (strict inequality)
///   cohesion rows   - no prefix of a cluster breaks away
/// For n observations and K clusters the blocks have n-1, K-1 and n-K
/// rows; the stack always has 2(n-1) rows. Order rows have bound zero.
struct PolyhedralConstraint {
  int n = 0;
  int num_clusters = 0;
  std::vector<SparseRow> order_rows;
  std::vector<SparseRow> separation_rows;
  std::vector<SparseRow> cohesion_rows;
  std::vector<double> separation_bounds;
  std::vector<double> cohesion_bounds;

  int total_rows() const {
    return static_cast<int>(order_rows.size() + separation_rows.size() +
                            cohesion_rows.size());
  }

  /// Visit every row in block order as f(row, bound, strict).
  template <typename F>
  void visit(F&& f) const {
    for (const auto& r : order_rows) f(r, 0.0, false);
    for (std::size_t i = 0; i < separation_rows.size(); ++i)
      f(separation_rows[i], separation_bounds[i], true);
    for (std::size_t i = 0; i < cohesion_rows.size(); ++i)
      f(cohesion_rows[i], cohesion_bounds[i], false);
  }
};

/// Build the constraint stack for a clustering of the descending order.
PolyhedralConstraint build_constraints(const SegmentedClustering& c);

/// Row dot product against a vector given in original index order.
double row_dot(const SparseRow& row, const Ordering& order, const double* x);

struct MembershipReport {
  bool member = false;
  // Worst (smallest) slack lambda*bound - row.(permuted x) per block;
  // +infinity for an empty block.
  double worst_order_slack = 0.0;
  double worst_separation_slack = 0.0;
  double worst_cohesion_slack = 0.0;
};

/// Test whether x lies in the constraint set at penalty `lambda`.
/// Non-strict rows accept slack >= -tol * (1 + |lambda * bound|); strict
/// (separation) rows require slack > 0 exactly. Throws InvalidInput on
/// dimension mismatch.
MembershipReport check_membership(const PolyhedralConstraint& pc,
                                  const Ordering& order,
                                  const std::vector<double>& x, double lambda,
                                  double tol = 1e-9);

/// Property-test harness for the event characterization: the clustering
/// realized by the path at `lambda` must satisfy membership, and a sample
/// of perturbed clustering/ordering pairs must all violate it. Perturbation
/// choices are a deterministic function of (x, lambda).
bool verify_equivalence(const std::vector<double>& x, double lambda);

/// One or more constraint blocks acting on a stacked vector; block j
/// applies to coordinates [j*block_dim, (j+1)*block_dim).
struct ConstraintSystem {
  std::vector<PolyhedralConstraint> blocks;
  std::vector<Ordering> orders;
  int block_dim = 0;

  int num_blocks() const { return static_cast<int>(blocks.size()); }
  int total_dim() const { return block_dim * num_blocks(); }
  int total_rows() const;
};

ConstraintSystem single_block(PolyhedralConstraint pc, Ordering order);

}  // namespace clustinf

#endif  // CLUSTINF_POLYHEDRON_HPP_
