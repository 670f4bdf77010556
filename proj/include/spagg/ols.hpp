#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "spagg/dataset.hpp"
#include "spagg/pattern.hpp"

namespace spagg {

// Least squares restricted to a sparsity pattern.
struct RestrictedFit {
  Eigen::VectorXd beta;     // length M, zero off the support
  double error = 0.0;       // ||y - X beta||_2^2, raw sum of squares
  SparsityPattern pattern;
  int rank = 0;             // numerical rank of the selected submatrix
};

// Minimum-norm least squares over supp(beta) <= supp(p). Rank deficiency is
// handled, not an error: the returned beta is the minimum-l2-norm minimizer.
RestrictedFit restricted_ols(const Dataset& data, const SparsityPattern& p);

// Sequential restricted fits under single-covariate flips.
//
// Maintains the upper Cholesky factor R of the selected Gram matrix together
// with z = R^{-T} X_S' y, so Error = y'y - ||z||^2. Adding a covariate
// extends the factor; removing one deletes its column and re-triangularizes
// with Givens rotations. A full refactorization runs every refit_interval
// commits, or immediately when a diagonal falls below 1e-10. Selections the
// factorization cannot represent (rank-deficient Gram) fall back to full
// minimum-norm solves until the pattern is well posed again.
class IncrementalOls {
 public:
  explicit IncrementalOls(const Dataset& data, int refit_interval = 1000);
  IncrementalOls(const Dataset& data, const SparsityPattern& start, int refit_interval = 1000);

  const SparsityPattern& pattern() const { return pattern_; }
  int selected() const { return static_cast<int>(sel_.size()); }
  bool degenerate() const { return degenerate_; }

  double error() const;
  // Error of the pattern with bit i toggled; no state change.
  double error_if_flipped(int i) const;
  // Commit one toggle.
  void flip(int i);

  Eigen::VectorXd beta() const;
  RestrictedFit fit() const;

  // Full refactorization from the Gram matrix of the current selection.
  void refit();

 private:
  void add_column(int j);
  void remove_position(int t);
  bool rebuild();                       // returns false when Gram is not PD
  const RestrictedFit& fallback_fit() const;

  const Dataset* data_;
  SparsityPattern pattern_;
  std::vector<int> sel_;                // selected covariates, insertion order
  Eigen::MatrixXd rfac_;                // upper-triangular factor, top-left k x k
  Eigen::VectorXd z_;                   // transformed rhs, length k
  bool degenerate_ = false;
  int refit_interval_ = 1000;
  int commits_since_refit_ = 0;
  mutable std::optional<RestrictedFit> fallback_;  // memoized full solve
};

// One incremental step: toggles `flip` on the engine state and returns the
// refreshed fit. Matches restricted_ols on the flipped pattern.
RestrictedFit ols_update(IncrementalOls& state, int flip);

}  // namespace spagg
