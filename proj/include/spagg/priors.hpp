#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "spagg/groups.hpp"
#include "spagg/pattern.hpp"
#include "spagg/structure.hpp"

namespace spagg {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

enum class PriorVariant { spa, ssa, gsa };

std::string prior_variant_name(PriorVariant v);
PriorVariant prior_variant_from_name(const std::string& name);

// Prior over sparsity patterns, evaluated up to its normalizing constant.
// Consumers only ever need log ratios or relative log weights, so the
// constants H, H_c, H_G are never materialized.
struct PriorSpec {
  PriorVariant variant = PriorVariant::spa;
  int m = 0;        // number of candidate covariates
  int rank = 0;     // rank of the design; ||p||_0 > rank gets zero mass
  int scale = 0;    // C in the exponent base: M for spa/ssa, |G| for gsa
  bool simplified = true;  // drop the 1/2 mass at ||p||_0 = M
  std::shared_ptr<const PenaltySpec> penalty;    // ssa only
  std::shared_ptr<const GroupStructure> groups;  // gsa only

  static PriorSpec spa(int m, int rank, bool simplified = true);
  static PriorSpec ssa(int m, int rank, PenaltySpec penalty, bool simplified = true);
  static PriorSpec gsa(int m, int rank, GroupStructure groups, bool simplified = true);
};

struct Complexity {
  bool feasible = true;
  double value = 0.0;
  bool exact = true;  // false when a grouped min cover fell back to greedy
};

// k(p): ||p||_0 (spa), ||p||_{0,c} (ssa) or ||p||_{0,G} (gsa).
Complexity complexity(const SparsityPattern& p, const PriorSpec& spec);

// log pi_p up to the normalizing constant, with the convention
// 0 log 0 = 0 at k = 0. -inf encodes zero prior mass: ||p||_0 > rank,
// grouped infeasibility, or a strong-hierarchy violation. The
// non-simplified form returns log(1/2) at ||p||_0 = M.
double log_prior_unnormalized(const SparsityPattern& p, const PriorSpec& spec);

// Same, with the complexity supplied by the caller (a group walk passes its
// own selected-group count when the exact cover is out of budget).
double log_prior_unnormalized_with_complexity(const SparsityPattern& p, const PriorSpec& spec,
                                              const Complexity& k);

// log pi_q - log pi_p. Defined as -inf whenever q has zero mass, including
// the case where both patterns are infeasible.
double log_prior_ratio(const SparsityPattern& q, const SparsityPattern& p, const PriorSpec& spec);

// Closed form of the spa prior ratio; requires count_p >= 1.
double spa_log_prior_ratio_closed_form(int count_q, int count_p, int m);

struct AssumptionReport {
  bool assumption_holds = true;       // the prior-mass inequality itself
  bool sufficient_condition = true;
  std::vector<SparsityPattern> assumption_violators;
  std::vector<SparsityPattern> sufficient_violators;  // penalized variant only
  int patterns_checked = 0;
  std::string note;
};

// Penalized-prior assumption: ||p||_0 / ||p||_{0,c} <=
// log(1 + e M / max(||p||_{0,c}, 1)) for rank > ||p||_0 > 0, plus the
// sufficient condition ||p||_c <= M, both evaluated per supplied pattern.
AssumptionReport check_assumption_penalized(const PriorSpec& spec,
                                            const std::vector<SparsityPattern>& patterns);
// Exhaustive scan over all 2^M patterns; m <= 20.
AssumptionReport check_assumption_penalized_exhaustive(const PriorSpec& spec);

// Grouped-prior assumption. Evaluates the sufficient condition
// max_g |g| <= log(1 + e|G|/R) and, for |G| <= 20, exhaustively checks the
// assumption inequality over all patterns expressible as group unions.
AssumptionReport check_assumption_grouped(const PriorSpec& spec);

}  // namespace spagg
