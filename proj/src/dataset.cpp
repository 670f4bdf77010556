#include "spagg/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace spagg {

namespace {

// Gram matrices above this column count are computed on demand instead.
constexpr int kGramCacheLimit = 1024;

}  // namespace

Dataset::Dataset(Eigen::VectorXd y, Eigen::MatrixXd x, std::optional<double> sigma2)
    : y_(std::move(y)), x_(std::move(x)), sigma2_(sigma2) {
  if (y_.size() != x_.rows()) {
    throw std::invalid_argument("response length does not match design row count");
  }
  if (x_.rows() < 1 || x_.cols() < 1) {
    throw std::invalid_argument("design must have at least one row and one column");
  }
  if (sigma2_ && *sigma2_ <= 0.0) {
    throw std::invalid_argument("known noise variance must be positive");
  }
  yty_ = y_.squaredNorm();
  xty_ = x_.transpose() * y_;
  col_sqnorm_ = x_.colwise().squaredNorm();
  if (m() <= kGramCacheLimit) {
    gram_ = x_.transpose() * x_;
  }
}

std::pair<Dataset, NormalizeReport> normalize_columns(const Dataset& data) {
  NormalizeReport report;
  report.scales.resize(static_cast<std::size_t>(data.m()), 1.0);
  Eigen::MatrixXd x = data.x();
  for (int j = 0; j < data.m(); ++j) {
    const double norm = x.col(j).norm();
    const double scale = std::max(1.0, norm);
    report.scales[static_cast<std::size_t>(j)] = scale;
    if (scale > 1.0) x.col(j) /= scale;
  }
  return {Dataset(data.y(), std::move(x), data.sigma2()), std::move(report)};
}

Eigen::VectorXd rescale_coefficients(const Eigen::VectorXd& beta, const NormalizeReport& report) {
  if (static_cast<std::size_t>(beta.size()) != report.scales.size()) {
    throw std::invalid_argument("coefficient length does not match scale report");
  }
  Eigen::VectorXd out = beta;
  for (int i = 0; i < out.size(); ++i) out[i] /= report.scales[static_cast<std::size_t>(i)];
  return out;
}

int design_rank(const Dataset& data) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(data.x());
  return static_cast<int>(cod.rank());
}

namespace {

bool parse_double(const std::string& token, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(token, &pos);
    while (pos < token.size() && std::isspace(static_cast<unsigned char>(token[pos]))) ++pos;
    return pos == token.size();
  } catch (const std::exception&) {
    return false;
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto begin = field.find_first_not_of(" \t\r");
    const auto end = field.find_last_not_of(" \t\r");
    fields.push_back(begin == std::string::npos ? "" : field.substr(begin, end - begin + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back("");
  return fields;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& response_column,
                 std::optional<double> sigma2) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file: " + path);

  std::vector<std::vector<double>> rows;
  std::vector<std::string> header;
  bool has_header = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_csv_line(line);
    if (rows.empty() && !has_header) {
      // first non-empty line: header iff any field fails to parse as a number
      bool numeric = true;
      double tmp;
      for (const auto& f : fields) {
        if (!parse_double(f, tmp)) {
          numeric = false;
          break;
        }
      }
      if (!numeric) {
        header = fields;
        has_header = true;
        continue;
      }
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      double v;
      if (!parse_double(f, v)) {
        throw ConfigError(path + ":" + std::to_string(line_no) + ": not a number: '" + f + "'");
      }
      if (!std::isfinite(v)) {
        throw ConfigError(path + ":" + std::to_string(line_no) + ": NaN/Inf values are rejected");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": inconsistent column count");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("no data rows in " + path);
  const int cols = static_cast<int>(rows.front().size());
  if (cols < 2) throw ConfigError(path + ": need at least one covariate and a response column");

  int response_idx = cols - 1;
  if (!response_column.empty()) {
    if (!has_header) {
      throw ConfigError(path + ": response column named '" + response_column +
                        "' but the file has no header row");
    }
    auto it = std::find(header.begin(), header.end(), response_column);
    if (it == header.end()) {
      throw ConfigError(path + ": no column named '" + response_column + "'");
    }
    response_idx = static_cast<int>(it - header.begin());
  }

  const int n = static_cast<int>(rows.size());
  Eigen::VectorXd y(n);
  Eigen::MatrixXd x(n, cols - 1);
  for (int i = 0; i < n; ++i) {
    int k = 0;
    for (int j = 0; j < cols; ++j) {
      if (j == response_idx) {
        y[i] = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      } else {
        x(i, k++) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
    }
  }
  return Dataset(std::move(y), std::move(x), sigma2);
}

}  // namespace spagg
