#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "spagg/pattern.hpp"

namespace spagg {

// Pairwise covariate distances d(i,j): either an explicit symmetric
// nonnegative matrix, or one point per covariate with Euclidean distance
// computed on demand (keeps memory at O(M k) for geometric layouts).
class DistanceSpec {
 public:
  DistanceSpec() = default;  // empty placeholder; build through the factories

  static DistanceSpec from_matrix(Eigen::MatrixXd d);
  static DistanceSpec from_positions(Eigen::MatrixXd points);  // M x k
  static DistanceSpec line_positions(int m);                   // points 1..M on a line

  int size() const { return size_; }

  double operator()(int i, int j) const {
    if (matrix_.size() > 0) return matrix_(i, j);
    return (points_.row(i) - points_.row(j)).norm();
  }

 private:
  int size_ = 0;
  Eigen::MatrixXd matrix_;  // explicit mode
  Eigen::MatrixXd points_;  // positions mode
};

// Directed acyclic graph over the covariates; edges run parent -> child.
class Dag {
 public:
  Dag(int nodes, const std::vector<std::pair<int, int>>& edges);

  int nodes() const { return static_cast<int>(parents_.size()); }
  const std::vector<std::vector<int>>& parents() const { return parents_; }
  const std::vector<std::vector<int>>& children() const { return children_; }

  // Union of the strict ancestors of every support node.
  std::vector<int> support_ancestors(const SparsityPattern& p) const;
  // True when every selected node has all of its ancestors selected.
  bool obeys_strong_hierarchy(const SparsityPattern& p) const;

 private:
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<int>> children_;
};

enum class PenaltyVariant { weights, dag_ancestors, cut, clusters };

std::string penalty_variant_name(PenaltyVariant v);

// ||p||_c = sum of c_i over the support; requires c_i > 0 and sum c_i < M.
double penalty_weights(const SparsityPattern& p, const std::vector<double>& c);

// ||p||_c = |union of strict ancestors of the support|. Support nodes are
// not counted unless they are themselves ancestors of another support node.
double penalty_dag_ancestors(const SparsityPattern& p, const Dag& dag);

// ||p||_c = sum over i in supp, j not in supp of d(i,j).
double penalty_cut(const SparsityPattern& p, const DistanceSpec& dist);

// Number of connected components of the support after dropping all edges
// with d(i,j) strictly greater than h; single linkage at cut h.
int penalty_clusters(const SparsityPattern& p, const DistanceSpec& dist, double h);

// Constructor-time audit: whether ||p||_c <= M can be guaranteed for every
// pattern (the sufficient condition of the penalized-prior assumption).
struct PenaltyAudit {
  bool bounded_by_m = false;
  std::string note;
};

// A structural penalty ||.||_c over sparsity patterns.
class PenaltySpec {
 public:
  static PenaltySpec weights(int m, std::vector<double> c);
  static PenaltySpec dag_ancestors(Dag dag, bool strong_hierarchy = false);
  static PenaltySpec cut(DistanceSpec dist);
  static PenaltySpec clusters(DistanceSpec dist, double h);

  PenaltyVariant variant() const { return variant_; }
  int size() const { return m_; }
  bool strong_hierarchy() const { return strong_hierarchy_; }
  const Dag& dag() const { return *dag_; }
  const std::vector<double>& weight_vector() const { return weights_; }
  const DistanceSpec& distance() const { return dist_; }
  double threshold() const { return h_; }
  const PenaltyAudit& audit() const { return audit_; }

  // ||p||_c
  double operator()(const SparsityPattern& p) const;

 private:
  PenaltySpec() = default;
  PenaltyVariant variant_ = PenaltyVariant::weights;
  int m_ = 0;
  std::vector<double> weights_;
  std::shared_ptr<const Dag> dag_;
  bool strong_hierarchy_ = false;
  DistanceSpec dist_;
  double h_ = 0.0;
  PenaltyAudit audit_;
};

// ||p||_{0,c} = ||p||_0 + ||p||_c.
double penalized_norm(const SparsityPattern& p, const PenaltySpec& spec);

// A valid gamma with ||p||_0 <= ||p||_{0,c} <= gamma ||p||_0 for all nonempty
// patterns; conservative for the cut and DAG variants.
double penalty_gamma(const PenaltySpec& spec);

}  // namespace spagg
