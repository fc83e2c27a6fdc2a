#include "clustinf/simstats.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "clustinf/errors.hpp"
#include "clustinf/inference.hpp"
#include "clustinf/normal.hpp"

namespace clustinf {

namespace {

std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

std::mt19937_64 replicate_rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed ^ (0x632BE59BD9B4E019ull * (stream + 1));
  std::uint64_t w0 = splitmix64_next(state);
  std::uint64_t w1 = splitmix64_next(state);
  std::uint64_t w2 = splitmix64_next(state);
  std::uint64_t w3 = splitmix64_next(state);
  std::seed_seq seq{static_cast<std::uint32_t>(w0),
                    static_cast<std::uint32_t>(w0 >> 32),
                    static_cast<std::uint32_t>(w1),
                    static_cast<std::uint32_t>(w1 >> 32),
                    static_cast<std::uint32_t>(w2),
                    static_cast<std::uint32_t>(w2 >> 32),
                    static_cast<std::uint32_t>(w3),
                    static_cast<std::uint32_t>(w3 >> 32)};
  return std::mt19937_64(seq);
}

Eigen::MatrixXd sample_matrix_normal(const Eigen::MatrixXd& mean,
                                     const Eigen::MatrixXd& row_cov,
                                     const Eigen::MatrixXd& col_cov,
                                     std::mt19937_64& rng) {
  int n = static_cast<int>(mean.rows());
  int p = static_cast<int>(mean.cols());
  if (row_cov.rows() != n || row_cov.cols() != n || col_cov.rows() != p ||
      col_cov.cols() != p)
    throw InvalidInput("sample_matrix_normal: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> row_llt(row_cov);
  if (row_llt.info() != Eigen::Success)
    throw FactorizationFailure("sample_matrix_normal: row covariance not SPD");
  Eigen::LLT<Eigen::MatrixXd> col_llt(col_cov);
  if (col_llt.info() != Eigen::Success)
    throw FactorizationFailure(
        "sample_matrix_normal: column covariance not SPD");
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd g(n, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = gauss(rng);
  return mean + row_llt.matrixL() * g * col_llt.matrixL().transpose();
}

double calibrate_lambda(int n, const Eigen::MatrixXd& sigma, int num_draws,
                        std::uint64_t seed) {
  if (n < 2) throw InvalidInput("calibrate_lambda: need n >= 2");
  if (num_draws < 2) throw InvalidInput("calibrate_lambda: need >= 2 draws");
  if (sigma.rows() != n || sigma.cols() != n)
    throw InvalidInput("calibrate_lambda: covariance dimension mismatch");
  bool identity_cov = sigma.isIdentity(0.0);
  Eigen::MatrixXd chol;
  if (!identity_cov) {
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
      throw FactorizationFailure("calibrate_lambda: covariance not SPD");
    chol = llt.matrixL();
  }

  std::vector<double> thresholds(num_draws);
  std::vector<double> z(n);
  Eigen::VectorXd g(n);
  for (int b = 0; b < num_draws; ++b) {
    std::mt19937_64 rng = replicate_rng(seed, static_cast<std::uint64_t>(b));
    std::normal_distribution<double> gauss;
    for (int i = 0; i < n; ++i) g[i] = gauss(rng);
    if (identity_cov) {
      for (int i = 0; i < n; ++i) z[i] = g[i];
    } else {
      Eigen::VectorXd correlated = chol * g;
      for (int i = 0; i < n; ++i) z[i] = correlated[i];
    }
    thresholds[b] = lambda_max(z);
  }

  std::sort(thresholds.begin(), thresholds.end());
  double h = 0.01 * (num_draws - 1);
  int lo = static_cast<int>(std::floor(h));
  int hi = std::min(lo + 1, num_draws - 1);
  double quantile = thresholds[lo] + (h - lo) * (thresholds[hi] - thresholds[lo]);

  double mean = std::accumulate(thresholds.begin(), thresholds.end(), 0.0) /
                num_draws;
  double ss = 0.0;
  for (double v : thresholds) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / (num_draws - 1));
  return quantile - sd;
}

double wilcoxon_rank_sum(const std::vector<double>& a,
                         const std::vector<double>& b) {
  if (a.empty() || b.empty())
    throw InvalidInput("wilcoxon_rank_sum: empty group");
  int m = static_cast<int>(a.size());
  int nb = static_cast<int>(b.size());
  int total = m + nb;
  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(total);
  for (double v : a) {
    if (!std::isfinite(v)) throw InvalidInput("wilcoxon_rank_sum: non-finite");
    pooled.emplace_back(v, 0);
  }
  for (double v : b) {
    if (!std::isfinite(v)) throw InvalidInput("wilcoxon_rank_sum: non-finite");
    pooled.emplace_back(v, 1);
  }
  std::sort(pooled.begin(), pooled.end());

  // Average ranks across tie groups; collect the tie correction term.
  std::vector<double> ranks(total);
  bool has_ties = false;
  double tie_term = 0.0;
  for (int i = 0; i < total;) {
    int j = i;
    while (j < total && pooled[j].first == pooled[i].first) ++j;
    double avg_rank = 0.5 * (i + j + 1);  // ranks are 1-based
    for (int k = i; k < j; ++k) ranks[k] = avg_rank;
    int t = j - i;
    if (t > 1) {
      has_ties = true;
      tie_term += static_cast<double>(t) * t * t - t;
    }
    i = j;
  }
  double rank_sum = 0.0;
  for (int i = 0; i < total; ++i)
    if (pooled[i].second == 0) rank_sum += ranks[i];

  if (total <= 20 && !has_ties) {
    // Exact distribution of the rank sum by subset-sum counting.
    int max_sum = total * (total + 1) / 2;
    std::vector<std::vector<double>> count(
        m + 1, std::vector<double>(max_sum + 1, 0.0));
    count[0][0] = 1.0;
    for (int r = 1; r <= total; ++r)
      for (int k = std::min(m, r); k >= 1; --k)
        for (int s = max_sum; s >= r; --s)
          if (count[k - 1][s - r] != 0.0) count[k][s] += count[k - 1][s - r];
    double all = 0.0, le = 0.0, ge = 0.0;
    int w = static_cast<int>(std::llround(rank_sum));
    for (int s = 0; s <= max_sum; ++s) {
      all += count[m][s];
      if (s <= w) le += count[m][s];
      if (s >= w) ge += count[m][s];
    }
    return std::min(1.0, 2.0 * std::min(le, ge) / all);
  }

  double u = rank_sum - 0.5 * m * (m + 1);
  double mean_u = 0.5 * m * nb;
  double var_u = (static_cast<double>(m) * nb / 12.0) *
                 ((total + 1) - tie_term / (static_cast<double>(total) *
                                            (total - 1)));
  if (var_u <= 0.0) return 1.0;
  double z = u - mean_u;
  if (z > 0.0)
    z -= 0.5;
  else if (z < 0.0)
    z += 0.5;
  z /= std::sqrt(var_u);
  return std::min(1.0, 2.0 * norm_sf(std::abs(z)));
}

double ks_uniformity(const std::vector<double>& pvals) {
  if (pvals.empty()) throw InvalidInput("ks_uniformity: empty sample");
  std::vector<double> sorted(pvals);
  std::sort(sorted.begin(), sorted.end());
  double m = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    d = std::max(d, (i + 1) / m - sorted[i]);
    d = std::max(d, sorted[i] - i / m);
  }
  return d;
}

double ks_critical_value(std::size_t n, double alpha) {
  if (n == 0 || alpha <= 0.0 || alpha >= 1.0)
    throw InvalidInput("ks_critical_value: bad arguments");
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) /
         std::sqrt(static_cast<double>(n));
}

EcdfTable make_ecdf(std::vector<double> values, long rejected_undefined) {
  EcdfTable table;
  std::sort(values.begin(), values.end());
  table.accepted = static_cast<long>(values.size());
  table.rejected_undefined = rejected_undefined;
  table.fractions.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    table.fractions[i] = (i + 1) / static_cast<double>(values.size());
  table.values = std::move(values);
  return table;
}

std::vector<double> pvalues_for(const ExperimentResult& result, double nu,
                                double rho, int variable,
                                const std::string& method) {
  std::vector<double> out;
  for (const auto& row : result.rows)
    if (row.nu == nu && row.rho == rho && row.variable == variable &&
        row.method == method)
      out.push_back(row.pvalue);
  return out;
}

HistogramTable signal_histogram(const ExperimentResult& result, double nu,
                                double bin_width) {
  HistogramTable table;
  table.bin_width = bin_width;
  std::vector<double> signals;
  for (const auto& row : result.rows)
    if (row.nu == nu && row.method == "selective")
      signals.push_back(row.signal);
  if (signals.empty()) return table;
  double lo = *std::min_element(signals.begin(), signals.end());
  double hi = *std::max_element(signals.begin(), signals.end());
  int bins = std::max(1, static_cast<int>(std::floor((hi - lo) / bin_width)) + 1);
  table.bin_left.resize(bins);
  table.counts.assign(bins, 0);
  for (int b = 0; b < bins; ++b) table.bin_left[b] = lo + b * bin_width;
  for (double s : signals) {
    int b = std::min(bins - 1, static_cast<int>((s - lo) / bin_width));
    ++table.counts[b];
  }
  return table;
}

namespace {

struct AttemptOutcome {
  bool accepted = false;
  std::vector<SimulationRow> rows;
};

// Run attempts in stream order, keeping the first `cfg.replicates` accepted
// ones. The outcome of an attempt depends only on its stream id, so any
// thread count produces the same rows in the same order.
template <typename AttemptFn>
void collect_accepted(const ExperimentConfig& cfg, std::uint64_t stream_base,
                      const AttemptFn& attempt,
                      std::vector<SimulationRow>* rows, long* rejected) {
  const long want = cfg.replicates;
  const std::uint64_t max_attempts =
      static_cast<std::uint64_t>(cfg.replicates) *
      std::max(1, cfg.max_attempt_factor);
  int threads = std::max(1, cfg.threads);
  long accepted = 0;
  std::uint64_t next = 0;
  while (accepted < want) {
    if (next >= max_attempts)
      throw Error(
          "experiment: too many rejected replicates; the contrast is almost "
          "never defined at this penalty");
    std::size_t batch = threads == 1
                            ? 1
                            : std::min<std::uint64_t>(
                                  static_cast<std::uint64_t>(threads) * 16,
                                  max_attempts - next);
    std::vector<AttemptOutcome> outcomes(batch);
    if (threads == 1) {
      outcomes[0] = attempt(stream_base + next);
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(threads);
      for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t]() {
          try {
            for (std::size_t i = t; i < batch; i += threads)
              outcomes[i] = attempt(stream_base + next + i);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    }
    for (std::size_t i = 0; i < batch && accepted < want; ++i) {
      if (outcomes[i].accepted) {
        rows->insert(rows->end(), outcomes[i].rows.begin(),
                     outcomes[i].rows.end());
        ++accepted;
      } else {
        ++*rejected;
      }
    }
    next += batch;
  }
}

double contrast_mean(const Eigen::VectorXd& contrast,
                     const Eigen::VectorXd& mean) {
  return contrast.dot(mean);
}

}  // namespace

ExperimentResult run_experiment_1d(const ExperimentConfig& cfg) {
  if (!(cfg.lambda > 0.0))
    throw InvalidInput("run_experiment_1d: lambda must be > 0");
  if (cfg.n < 2 || cfg.n % 2 != 0)
    throw InvalidInput("run_experiment_1d: n must be even and >= 2");
  if (cfg.replicates < 1)
    throw InvalidInput("run_experiment_1d: need at least one replicate");
  int min_clusters = cfg.all_pairs_min_clusters;
  if (min_clusters == 1)
    throw InvalidInput("run_experiment_1d: all-pairs mode needs >= 2 clusters");

  ExperimentResult result;
  const GaussianModel model = GaussianModel::identity(cfg.n);
  for (std::size_t nu_idx = 0; nu_idx < cfg.nu_values.size(); ++nu_idx) {
    double nu = cfg.nu_values[nu_idx];
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(cfg.n);
    mu.head(cfg.n / 2).setConstant(nu);

    auto attempt = [&](std::uint64_t stream) {
      AttemptOutcome out;
      std::mt19937_64 rng = replicate_rng(cfg.seed, stream);
      std::normal_distribution<double> gauss;
      std::vector<double> x(cfg.n);
      for (int i = 0; i < cfg.n; ++i) x[i] = mu[i] + gauss(rng);

      RegularizationPath path = compute_path(x);
      SegmentedClustering clustering = path.clustering_at(cfg.lambda);
      int needed = min_clusters > 0 ? min_clusters : 2;
      if (clustering.num_clusters < needed) return out;

      ConstraintSystem sys =
          single_block(build_constraints(clustering), clustering.order);
      Eigen::Map<const Eigen::VectorXd> obs(x.data(), cfg.n);

      auto evaluate = [&](const Eigen::VectorXd& eta, int ka, int kb) {
        TruncationBounds bounds =
            conditional_bounds(sys, model, eta, obs, cfg.lambda);
        double variance = model.quad_form(eta);
        double t = trunc_gauss_cdf(eta.dot(obs), 0.0, variance, bounds.lower,
                                   bounds.upper);
        SimulationRow row;
        row.stream = stream;
        row.nu = nu;
        row.rho = 0.0;
        row.variable = 1;
        row.cluster_a = ka + 1;
        row.cluster_b = kb + 1;
        row.pvalue = 2.0 * std::min(t, 1.0 - t);
        row.method = "selective";
        row.signal = contrast_mean(eta, mu);
        out.rows.push_back(std::move(row));
      };

      if (min_clusters > 0) {
        for (int ka = 0; ka < min_clusters; ++ka)
          for (int kb = ka + 1; kb < min_clusters; ++kb)
            evaluate(two_group_contrast(clustering.cluster_members(ka),
                                        clustering.cluster_members(kb), cfg.n),
                     ka, kb);
      } else {
        SegmentedClustering merged = balanced_two_merge(clustering);
        evaluate(two_group_contrast(merged.cluster_members(0),
                                    merged.cluster_members(1), cfg.n),
                 0, 1);
      }
      out.accepted = true;
      return out;
    };

    long rejected = 0;
    collect_accepted(cfg, static_cast<std::uint64_t>(nu_idx) << 32, attempt,
                     &result.rows, &rejected);
    result.rejections.push_back({nu, 0.0, rejected});
  }
  return result;
}

ExperimentResult run_experiment_multidim(const ExperimentConfig& cfg) {
  if (!(cfg.lambda > 0.0))
    throw InvalidInput("run_experiment_multidim: lambda must be > 0");
  if (cfg.n < 2 || cfg.n % 2 != 0)
    throw InvalidInput("run_experiment_multidim: n must be even and >= 2");
  if (cfg.p < 1) throw InvalidInput("run_experiment_multidim: p must be >= 1");
  if (cfg.replicates < 1)
    throw InvalidInput("run_experiment_multidim: need at least one replicate");
  if (cfg.num_aggregated_clusters < 2)
    throw InvalidInput("run_experiment_multidim: need a cut at >= 2 clusters");

  ExperimentResult result;
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(cfg.n, cfg.p);
  // Mean signal lives in the first variable only, split into +/- blocks.

  for (std::size_t rho_idx = 0; rho_idx < cfg.rho_values.size(); ++rho_idx) {
    double rho = cfg.rho_values[rho_idx];
    Eigen::MatrixXd delta = Eigen::MatrixXd::Identity(cfg.p, cfg.p);
    if (cfg.p >= 3) {
      delta(0, 2) = delta(2, 0) = rho;
    } else if (cfg.p == 2) {
      delta(0, 1) = delta(1, 0) = rho;
    }
    Eigen::LLT<Eigen::MatrixXd> delta_llt(delta);
    if (delta_llt.info() != Eigen::Success)
      throw FactorizationFailure(
          "run_experiment_multidim: column covariance not SPD");
    const Eigen::MatrixXd delta_chol = delta_llt.matrixL();
    const GaussianModel model = GaussianModel::kronecker(
        Eigen::MatrixXd::Identity(cfg.n, cfg.n), delta);

    for (std::size_t nu_idx = 0; nu_idx < cfg.nu_values.size(); ++nu_idx) {
      double nu = cfg.nu_values[nu_idx];
      u.col(0).head(cfg.n / 2).setConstant(nu);
      u.col(0).tail(cfg.n / 2).setConstant(-nu);
      const Eigen::MatrixXd mean = u;
      Eigen::Map<const Eigen::VectorXd> beta(mean.data(),
                                             static_cast<long>(cfg.n) * cfg.p);

      auto attempt = [&, rho, nu](std::uint64_t stream) {
        AttemptOutcome out;
        std::mt19937_64 rng = replicate_rng(cfg.seed, stream);
        std::normal_distribution<double> gauss;
        Eigen::MatrixXd g(cfg.n, cfg.p);
        for (int j = 0; j < cfg.p; ++j)
          for (int i = 0; i < cfg.n; ++i) g(i, j) = gauss(rng);
        Eigen::MatrixXd y = mean + g * delta_chol.transpose();

        ColumnClusterings cc = columnwise_paths(y, cfg.lambda);
        AggregatedClustering agg =
            aggregate(rescale_labels(cc), cfg.num_aggregated_clusters,
                      cfg.aggregation, cfg.linkage);
        if (agg.num_clusters < 2) return out;

        ConstraintSystem sys = build_block_constraints(cc);
        Eigen::Map<const Eigen::VectorXd> obs(y.data(),
                                              static_cast<long>(cfg.n) * cfg.p);
        std::vector<int> group_a = agg.cluster_members(0);
        std::vector<int> group_b = agg.cluster_members(1);

        for (int j = 0; j < cfg.p; ++j) {
          Eigen::VectorXd kappa = build_kappa(agg, j, 0, 1, cfg.n, cfg.p);
          TruncationBounds bounds =
              conditional_bounds(sys, model, kappa, obs, cfg.lambda);
          double variance = model.quad_form(kappa);
          double t = trunc_gauss_cdf(kappa.dot(obs), 0.0, variance,
                                     bounds.lower, bounds.upper);
          SimulationRow row;
          row.stream = stream;
          row.nu = nu;
          row.rho = rho;
          row.variable = j + 1;
          row.cluster_a = 1;
          row.cluster_b = 2;
          row.pvalue = 2.0 * std::min(t, 1.0 - t);
          row.method = "selective";
          row.signal = contrast_mean(kappa, beta);
          out.rows.push_back(row);

          std::vector<double> va, vb;
          va.reserve(group_a.size());
          vb.reserve(group_b.size());
          for (int i : group_a) va.push_back(y(i, j));
          for (int i : group_b) vb.push_back(y(i, j));
          row.method = "wilcoxon";
          row.pvalue = wilcoxon_rank_sum(va, vb);
          out.rows.push_back(std::move(row));
        }
        out.accepted = true;
        return out;
      };

      long rejected = 0;
      std::uint64_t stream_base =
          static_cast<std::uint64_t>(rho_idx * cfg.nu_values.size() + nu_idx)
          << 32;
      collect_accepted(cfg, stream_base, attempt, &result.rows, &rejected);
      result.rejections.push_back({nu, rho, rejected});
    }
  }
  return result;
}

}  // namespace clustinf
