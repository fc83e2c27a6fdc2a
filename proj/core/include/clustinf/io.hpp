#ifndef CLUSTINF_IO_HPP_
#define CLUSTINF_IO_HPP_

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

#include "clustinf/inference.hpp"
#include "clustinf/multidim.hpp"
#include "clustinf/path.hpp"
#include "clustinf/polyhedron.hpp"
#include "clustinf/simstats.hpp"

namespace clustinf {

/// One value per line (single column, no header). Blank lines are skipped.
std::vector<double> read_vector(std::istream& in);
std::vector<double> read_vector_file(const std::string& path);

/// Comma-separated numeric matrix; a non-numeric first line is treated as
/// a header and skipped.
Eigen::MatrixXd read_matrix(std::istream& in);
Eigen::MatrixXd read_matrix_file(const std::string& path);

/// Square covariance matrix from CSV; throws InvalidInput if not square.
Eigen::MatrixXd read_covariance_file(const std::string& path, int expected_dim);

/// {"breakpoints": [...], "merges": [{"lambda", "left_cluster",
///  "right_cluster"}...], "sigma": [...]} with 1-based clusters and sigma.
std::string path_to_json(const RegularizationPath& path);

/// CSV with header: index,x,B_hat,cluster_id (1-based index and cluster).
void write_solution_csv(std::ostream& out, const FittedSolution& sol,
                        const std::vector<double>& x);

/// {"stat", "variance", "v_minus", "v_plus", "v_zero", "T", "pvalue",
///  "lambda", "clustering": {"t": [...], "sigma": [...]}}.
/// Infinite bounds are emitted as null.
std::string test_result_to_json(const SelectiveTestResult& result,
                                double lambda);

/// Debug dump: {"M1": [[[col, val]...]...], "M2": ..., "M3": ...,
///  "m": [...], "strict": [...]} with 1-based columns.
std::string constraints_to_json(const PolyhedralConstraint& pc);

/// CSV with header: row_index,label (both 1-based).
void write_labels_csv(std::ostream& out, const AggregatedClustering& agg);

/// Tidy simulation CSV, one row per evaluated test:
/// seed,nu,rho,variable,cluster_a,cluster_b,pvalue,method,signal.
/// A leading "# seed=..." comment records the master seed; rejection
/// counts are appended as "# rejected nu=.. rho=.. count=.." comments.
void write_simulation_csv(std::ostream& out, const ExperimentResult& result,
                          std::uint64_t seed);

/// Shortest-exact formatting helper used by every CSV writer.
std::string format_double(double v);

}  // namespace clustinf

#endif  // CLUSTINF_IO_HPP_
