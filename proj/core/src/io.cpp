#include "clustinf/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "clustinf/errors.hpp"

namespace clustinf {

namespace {

using nlohmann::json;

bool parse_double(const std::string& token, double* out) {
  char* end = nullptr;
  const char* begin = token.c_str();
  double v = std::strtod(begin, &end);
  while (end && *end == ' ') ++end;
  if (end == begin || (end && *end != '\0')) return false;
  *out = v;
  return true;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  return fields;
}

json finite_or_null(double v) {
  if (std::isfinite(v)) return json(v);
  return json();
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open file: " + path);
  return in;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> read_vector(std::istream& in) {
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty()) continue;
    double v;
    if (!parse_double(t, &v))
      throw InvalidInput("read_vector: not a number: '" + t + "'");
    values.push_back(v);
  }
  if (values.empty()) throw InvalidInput("read_vector: no values");
  return values;
}

std::vector<double> read_vector_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_vector(in);
}

Eigen::MatrixXd read_matrix(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty()) continue;
    std::vector<std::string> fields = split_csv(t);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t j = 0; j < fields.size(); ++j)
      if (!parse_double(fields[j], &row[j])) {
        numeric = false;
        break;
      }
    if (!numeric) {
      if (first) {
        first = false;
        continue;  // header line
      }
      throw InvalidInput("read_matrix: non-numeric row: '" + t + "'");
    }
    first = false;
    if (!rows.empty() && rows.back().size() != row.size())
      throw InvalidInput("read_matrix: ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidInput("read_matrix: no rows");
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

Eigen::MatrixXd read_matrix_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_matrix(in);
}

Eigen::MatrixXd read_covariance_file(const std::string& path,
                                     int expected_dim) {
  Eigen::MatrixXd m = read_matrix_file(path);
  if (m.rows() != m.cols())
    throw InvalidInput("covariance file is not square: " + path);
  if (expected_dim > 0 && m.rows() != expected_dim)
    throw InvalidInput("covariance dimension mismatch: " + path);
  return m;
}

std::string path_to_json(const RegularizationPath& path) {
  json j;
  j["breakpoints"] = path.breakpoints;
  j["merges"] = json::array();
  for (const auto& ev : path.merges) {
    json m;
    m["lambda"] = ev.lambda;
    m["left_cluster"] = ev.left_cluster + 1;
    m["right_cluster"] = ev.right_cluster + 1;
    j["merges"].push_back(std::move(m));
  }
  std::vector<int> sigma(path.order.rank_to_index.size());
  for (std::size_t r = 0; r < sigma.size(); ++r)
    sigma[r] = path.order.rank_to_index[r] + 1;
  j["sigma"] = sigma;
  return j.dump(2);
}

void write_solution_csv(std::ostream& out, const FittedSolution& sol,
                        const std::vector<double>& x) {
  std::vector<int> labels = sol.clustering.labels();
  out << "index,x,B_hat,cluster_id\n";
  for (std::size_t i = 0; i < x.size(); ++i)
    out << (i + 1) << ',' << format_double(x[i]) << ','
        << format_double(sol.fitted[i]) << ',' << (labels[i] + 1) << '\n';
}

std::string test_result_to_json(const SelectiveTestResult& result,
                                double lambda) {
  json j;
  j["stat"] = result.stat;
  j["variance"] = result.variance;
  j["v_minus"] = finite_or_null(result.bounds.lower);
  j["v_plus"] = finite_or_null(result.bounds.upper);
  j["v_zero"] = finite_or_null(result.bounds.zero_margin);
  j["T"] = result.invariant_stat;
  j["pvalue"] = result.pvalue;
  j["lambda"] = lambda;
  if (result.clustering.n > 0) {
    json c;
    c["t"] = result.clustering.boundaries;
    std::vector<int> sigma(result.clustering.order.rank_to_index.size());
    for (std::size_t r = 0; r < sigma.size(); ++r)
      sigma[r] = result.clustering.order.rank_to_index[r] + 1;
    c["sigma"] = sigma;
    j["clustering"] = std::move(c);
  }
  return j.dump(2);
}

std::string constraints_to_json(const PolyhedralConstraint& pc) {
  json j;
  auto rows_to_json = [](const std::vector<SparseRow>& rows) {
    json out = json::array();
    for (const auto& row : rows) {
      json r = json::array();
      for (std::size_t i = 0; i < row.cols.size(); ++i)
        r.push_back(json::array({row.cols[i] + 1, row.vals[i]}));
      out.push_back(std::move(r));
    }
    return out;
  };
  j["M1"] = rows_to_json(pc.order_rows);
  j["M2"] = rows_to_json(pc.separation_rows);
  j["M3"] = rows_to_json(pc.cohesion_rows);
  std::vector<double> m;
  std::vector<bool> strict;
  pc.visit([&](const SparseRow&, double bound, bool is_strict) {
    m.push_back(bound);
    strict.push_back(is_strict);
  });
  j["m"] = m;
  j["strict"] = strict;
  return j.dump(2);
}

void write_labels_csv(std::ostream& out, const AggregatedClustering& agg) {
  out << "row_index,label\n";
  for (std::size_t i = 0; i < agg.labels.size(); ++i)
    out << (i + 1) << ',' << (agg.labels[i] + 1) << '\n';
}

void write_simulation_csv(std::ostream& out, const ExperimentResult& result,
                          std::uint64_t seed) {
  out << "# seed=" << seed << '\n';
  out << "seed,nu,rho,variable,cluster_a,cluster_b,pvalue,method,signal\n";
  for (const auto& row : result.rows) {
    out << row.stream << ',' << format_double(row.nu) << ','
        << format_double(row.rho) << ',' << row.variable << ','
        << row.cluster_a << ',' << row.cluster_b << ','
        << format_double(row.pvalue) << ',' << row.method << ','
        << format_double(row.signal) << '\n';
  }
  for (const auto& rej : result.rejections)
    out << "# rejected nu=" << format_double(rej.nu)
        << " rho=" << format_double(rej.rho) << " count=" << rej.rejected
        << '\n';
}

}  // namespace clustinf
