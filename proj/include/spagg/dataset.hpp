#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spagg {

// Raised for unreadable or malformed inputs (files, configs, specs).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Regression data y = X beta + eps. Immutable after construction and safe to
// share across threads. X'y and the column squared norms are always
// precomputed; the full Gram matrix is cached for moderate M so sequential
// fits can reuse inner products instead of touching the n-vectors.
class Dataset {
 public:
  Dataset(Eigen::VectorXd y, Eigen::MatrixXd x, std::optional<double> sigma2 = {});

  int n() const { return static_cast<int>(x_.rows()); }
  int m() const { return static_cast<int>(x_.cols()); }
  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::MatrixXd& x() const { return x_; }
  std::optional<double> sigma2() const { return sigma2_; }

  double yty() const { return yty_; }
  const Eigen::VectorXd& xty() const { return xty_; }
  const Eigen::VectorXd& col_sqnorm() const { return col_sqnorm_; }

  bool has_gram() const { return gram_.size() > 0; }
  // x_i . x_j, from the cache when present
  double gram_entry(int i, int j) const {
    if (has_gram()) return gram_(i, j);
    return x_.col(i).dot(x_.col(j));
  }

 private:
  Eigen::VectorXd y_;
  Eigen::MatrixXd x_;
  std::optional<double> sigma2_;
  double yty_ = 0.0;
  Eigen::VectorXd xty_;
  Eigen::VectorXd col_sqnorm_;
  Eigen::MatrixXd gram_;  // empty when M is too large to cache
};

// Scales applied by normalize_columns; scales[i] = max(1, ||x_i||_2).
struct NormalizeReport {
  std::vector<double> scales;
};

// Divides every column by max(1, ||x_i||_2), so sub-unit columns pass
// through unchanged and afterwards ||x_i||_2^2 <= 1 for all i.
std::pair<Dataset, NormalizeReport> normalize_columns(const Dataset& data);

// Maps coefficients fitted on normalized columns back to original units.
Eigen::VectorXd rescale_coefficients(const Eigen::VectorXd& beta, const NormalizeReport& report);

// Numerical rank of X.
int design_rank(const Dataset& data);

// CSV ingestion. Header row optional (detected); the response column is
// selected by name when given, otherwise the last column is used. Values are
// parsed as 64-bit floats; NaN/Inf are rejected.
Dataset load_csv(const std::string& path, const std::string& response_column = "",
                 std::optional<double> sigma2 = {});

}  // namespace spagg
