#pragma once

#include <Eigen/Dense>
#include <vector>

#include "spagg/pattern.hpp"

namespace spagg {

// A collection of covariate index sets, possibly overlapping, whose union
// must cover {0,...,M-1}.
class GroupStructure {
 public:
  GroupStructure(int m, std::vector<std::vector<int>> groups);

  int m() const { return m_; }
  int group_count() const { return static_cast<int>(groups_.size()); }
  const std::vector<std::vector<int>>& groups() const { return groups_; }
  const std::vector<int>& group(int g) const { return groups_[g]; }
  bool disjoint() const { return disjoint_; }
  // groups containing covariate i
  const std::vector<int>& covering(int i) const { return covering_[i]; }
  int max_group_size() const { return max_group_size_; }

 private:
  int m_ = 0;
  std::vector<std::vector<int>> groups_;
  std::vector<std::vector<int>> covering_;
  bool disjoint_ = true;
  int max_group_size_ = 0;
};

// Largest usable-group count for which the minimum cover is solved exactly.
inline constexpr int kExactCoverBudget = 24;

struct GroupCoverResult {
  bool feasible = false;  // false: supp(p) is not a union of groups
  int value = 0;          // minimum cover size, or greedy upper bound
  bool exact = true;      // false when the greedy fallback produced the value
};

// ||p||_{0,G}: minimum number of groups whose union equals supp(p). Only
// groups fully inside the support are usable; exact branch and bound up to
// kExactCoverBudget usable groups, greedy upper bound beyond that.
GroupCoverResult grouped_l0(const SparsityPattern& p, const GroupStructure& g);

// ||beta||_{1,G}: sum of per-group l2 norms for disjoint structures; for
// overlapping groups the minimum of sum_g ||v_g||_2 over G-decompositions
// sum_g v_g = beta with supp(v_g) <= g. The overlapping case alternates
// exact per-block shrinkage with an averaging projection onto the
// decomposition constraint (Douglas-Rachford on the product space) and
// returns the value of the best feasible decomposition found.
double grouped_l1(const Eigen::VectorXd& beta, const GroupStructure& g, double tol = 1e-8);

// Decomposition behind grouped_l1: one part per group, supp(v_g) <= g,
// parts summing to beta.
std::vector<Eigen::VectorXd> grouped_l1_decomposition(const Eigen::VectorXd& beta,
                                                      const GroupStructure& g,
                                                      double tol = 1e-8);

// Pattern whose support is the union of the selected groups.
SparsityPattern group_union_pattern(const std::vector<int>& selected, const GroupStructure& g);

}  // namespace spagg
