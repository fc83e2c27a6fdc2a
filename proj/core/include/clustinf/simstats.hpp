#ifndef CLUSTINF_SIMSTATS_HPP_
#define CLUSTINF_SIMSTATS_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "clustinf/multidim.hpp"

namespace clustinf {

/// Generator for one replicate: a fixed function of (seed, stream), so
/// serial and parallel execution produce identical simulations.
std::mt19937_64 replicate_rng(std::uint64_t seed, std::uint64_t stream);

/// Draw mean + L_row * G * L_col' with G i.i.d. standard normal, so the
/// stacked sample has covariance col_cov (x) row_cov.
/// Throws FactorizationFailure when a factor is not SPD.
Eigen::MatrixXd sample_matrix_normal(const Eigen::MatrixXd& mean,
                                     const Eigen::MatrixXd& row_cov,
                                     const Eigen::MatrixXd& col_cov,
                                     std::mt19937_64& rng);

/// Pick a penalty that yields at least two clusters with high probability
/// under the null: draw `num_draws` centered Gaussian vectors, take the
/// single-cluster threshold of each, and return its first percentile minus
/// one standard deviation.
double calibrate_lambda(int n, const Eigen::MatrixXd& sigma,
                        int num_draws = 10000, std::uint64_t seed = 0);

/// Two-sided rank-sum test. Exact enumeration when the pooled sample has
/// at most 20 values and no ties; otherwise the normal approximation with
/// tie and continuity corrections.
double wilcoxon_rank_sum(const std::vector<double>& a,
                         const std::vector<double>& b);

/// Sup distance between the empirical CDF of `pvals` and Uniform[0,1].
double ks_uniformity(const std::vector<double>& pvals);

/// Asymptotic critical value of the one-sample KS statistic.
double ks_critical_value(std::size_t n, double alpha = 0.01);

struct ExperimentConfig {
  int n = 100;
  int p = 1;
  std::vector<double> nu_values{0.0};   // signal levels
  std::vector<double> rho_values{0.0};  // column correlation (p >= 3)
  double lambda = 0.0;
  int replicates = 1000;  // accepted replicates to collect per setting
  std::uint64_t seed = 0;
  // 1d protocol: 0 = balanced two-group contrast after coarsening;
  // k0 >= 2 = keep runs with at least k0 clusters and test all pairs
  // among the first k0.
  int all_pairs_min_clusters = 0;
  AggregationMethod aggregation = AggregationMethod::HierarchicalEuclidean;
  Linkage linkage = Linkage::Complete;
  int num_aggregated_clusters = 2;
  int threads = 1;
  // Resampling guard: abort after replicates * this many attempts.
  int max_attempt_factor = 200;
};

/// One test evaluation within one replicate.
struct SimulationRow {
  std::uint64_t stream = 0;  // replicate stream id
  double nu = 0.0;
  double rho = 0.0;
  int variable = 1;     // 1-based column
  int cluster_a = 1;    // 1-based compared clusters
  int cluster_b = 2;
  double pvalue = 1.0;
  std::string method;   // "selective" or "wilcoxon"
  double signal = 0.0;  // contrast applied to the true mean
};

struct RejectionCount {
  double nu = 0.0;
  double rho = 0.0;
  long rejected = 0;  // attempts discarded because the contrast was undefined
};

struct ExperimentResult {
  std::vector<SimulationRow> rows;
  std::vector<RejectionCount> rejections;
};

/// Empirical CDF of a p-value sample plus the acceptance bookkeeping.
struct EcdfTable {
  std::vector<double> values;     // sorted
  std::vector<double> fractions;  // (i+1)/m
  long accepted = 0;
  long rejected_undefined = 0;
};

EcdfTable make_ecdf(std::vector<double> values, long rejected_undefined = 0);

/// Select the p-values of one (nu, rho, variable, method) cell.
std::vector<double> pvalues_for(const ExperimentResult& result, double nu,
                                double rho, int variable,
                                const std::string& method);

/// Histogram of the realized signal values (one row of counts per bin).
struct HistogramTable {
  double bin_width = 0.0;
  std::vector<double> bin_left;
  std::vector<long> counts;
};
HistogramTable signal_histogram(const ExperimentResult& result, double nu,
                                double bin_width = 0.05);

/// Null/alternative protocol in dimension one: Gaussian vectors with mean
/// (nu on the first half, 0 on the second), identity covariance, clustering
/// at the configured penalty, selective p-values for the configured
/// contrast. Collects `replicates` accepted runs per signal level,
/// resampling (and counting) runs whose clustering leaves the contrast
/// undefined.
ExperimentResult run_experiment_1d(const ExperimentConfig& cfg);

/// Matrix protocol: column 1 carries a +/-nu two-block mean, columns are
/// correlated through rho between the first and third variable; clusters
/// come from aggregated column clusterings and every variable is tested
/// with both the selective procedure and the rank-sum baseline.
ExperimentResult run_experiment_multidim(const ExperimentConfig& cfg);

}  // namespace clustinf

#endif  // CLUSTINF_SIMSTATS_HPP_
