#include "spagg/priors.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace spagg {

namespace {

constexpr double kE = 2.718281828459045235360287;
constexpr double kLogHalf = -0.6931471805599453094172321;

}  // namespace

std::string prior_variant_name(PriorVariant v) {
  switch (v) {
    case PriorVariant::spa: return "spa";
    case PriorVariant::ssa: return "ssa";
    case PriorVariant::gsa: return "gsa";
  }
  return "?";
}

PriorVariant prior_variant_from_name(const std::string& name) {
  if (name == "spa") return PriorVariant::spa;
  if (name == "ssa") return PriorVariant::ssa;
  if (name == "gsa") return PriorVariant::gsa;
  throw std::invalid_argument("unknown prior variant: " + name);
}

namespace {

void check_common(const PriorSpec& spec) {
  if (spec.m < 1) throw std::invalid_argument("prior needs M >= 1");
  if (spec.rank < 1 || spec.rank > spec.m) {
    throw std::invalid_argument("prior rank must satisfy 1 <= R <= M");
  }
  if (spec.scale < 1) throw std::invalid_argument("prior scale constant must be >= 1");
}

}  // namespace

PriorSpec PriorSpec::spa(int m, int rank, bool simplified) {
  PriorSpec spec;
  spec.variant = PriorVariant::spa;
  spec.m = m;
  spec.rank = rank;
  spec.scale = m;
  spec.simplified = simplified;
  check_common(spec);
  return spec;
}

PriorSpec PriorSpec::ssa(int m, int rank, PenaltySpec penalty, bool simplified) {
  if (penalty.size() != m) throw std::invalid_argument("penalty size does not match M");
  PriorSpec spec;
  spec.variant = PriorVariant::ssa;
  spec.m = m;
  spec.rank = rank;
  spec.scale = m;
  spec.simplified = simplified;
  spec.penalty = std::make_shared<const PenaltySpec>(std::move(penalty));
  check_common(spec);
  return spec;
}

PriorSpec PriorSpec::gsa(int m, int rank, GroupStructure groups, bool simplified) {
  if (groups.m() != m) throw std::invalid_argument("group structure does not match M");
  PriorSpec spec;
  spec.variant = PriorVariant::gsa;
  spec.m = m;
  spec.rank = rank;
  spec.scale = groups.group_count();
  spec.simplified = simplified;
  spec.groups = std::make_shared<const GroupStructure>(std::move(groups));
  check_common(spec);
  return spec;
}

Complexity complexity(const SparsityPattern& p, const PriorSpec& spec) {
  Complexity k;
  switch (spec.variant) {
    case PriorVariant::spa:
      k.value = static_cast<double>(p.count());
      break;
    case PriorVariant::ssa:
      k.value = penalized_norm(p, *spec.penalty);
      break;
    case PriorVariant::gsa: {
      const GroupCoverResult cover = grouped_l0(p, *spec.groups);
      k.feasible = cover.feasible;
      k.value = static_cast<double>(cover.value);
      k.exact = cover.exact;
      break;
    }
  }
  return k;
}

double log_prior_unnormalized_with_complexity(const SparsityPattern& p, const PriorSpec& spec,
                                              const Complexity& k) {
  if (spec.variant == PriorVariant::ssa && spec.penalty->strong_hierarchy() &&
      !spec.penalty->dag().obeys_strong_hierarchy(p)) {
    return kNegInf;
  }
  if (!spec.simplified && p.count() == spec.m) return kLogHalf;
  if (p.count() > spec.rank) return kNegInf;
  if (!k.feasible) return kNegInf;
  if (k.value <= 0.0) return 0.0;  // 0 log 0 = 0
  return k.value * std::log(k.value / (2.0 * kE * static_cast<double>(spec.scale)));
}

double log_prior_unnormalized(const SparsityPattern& p, const PriorSpec& spec) {
  return log_prior_unnormalized_with_complexity(p, spec, complexity(p, spec));
}

double log_prior_ratio(const SparsityPattern& q, const SparsityPattern& p, const PriorSpec& spec) {
  const double lq = log_prior_unnormalized(q, spec);
  if (lq == kNegInf) return kNegInf;
  const double lp = log_prior_unnormalized(p, spec);
  if (lp == kNegInf) return std::numeric_limits<double>::infinity();
  return lq - lp;
}

double spa_log_prior_ratio_closed_form(int count_q, int count_p, int m) {
  if (count_p < 1) throw std::invalid_argument("closed-form ratio needs ||p||_0 >= 1");
  const double kq = static_cast<double>(count_q);
  const double kp = static_cast<double>(count_p);
  const double base = std::log(kp / (2.0 * kE * static_cast<double>(m)));
  if (count_q == 0) return -kp * base;  // (1 + (0-kp)/kp)^0 = 1
  return kq * std::log1p((kq - kp) / kp) + (kq - kp) * base;
}

namespace {

void check_one_penalized(const SparsityPattern& p, const PriorSpec& spec,
                         AssumptionReport& report) {
  const double penalty = (*spec.penalty)(p);
  ++report.patterns_checked;
  if (penalty > static_cast<double>(spec.m)) {
    report.sufficient_condition = false;
    report.sufficient_violators.push_back(p);
  }
  if (p.count() <= 0 || p.count() >= spec.rank) return;  // inequality quantifier: R > ||p||_0 > 0
  const double k0c = static_cast<double>(p.count()) + penalty;
  const double lhs = static_cast<double>(p.count()) / k0c;
  const double rhs = std::log1p(kE * static_cast<double>(spec.m) / std::max(k0c, 1.0));
  if (lhs > rhs + 1e-12) {
    report.assumption_holds = false;
    report.assumption_violators.push_back(p);
  }
}

}  // namespace

AssumptionReport check_assumption_penalized(const PriorSpec& spec,
                                            const std::vector<SparsityPattern>& patterns) {
  if (spec.variant != PriorVariant::ssa) {
    throw std::invalid_argument("penalized assumption check needs an ssa prior");
  }
  AssumptionReport report;
  for (const auto& p : patterns) check_one_penalized(p, spec, report);
  report.note = report.sufficient_condition
                    ? "structural penalty stayed within [0, M] on all checked patterns"
                    : "structural penalty exceeds M on some patterns";
  return report;
}

AssumptionReport check_assumption_penalized_exhaustive(const PriorSpec& spec) {
  if (spec.variant != PriorVariant::ssa) {
    throw std::invalid_argument("penalized assumption check needs an ssa prior");
  }
  if (spec.m > 20) throw std::invalid_argument("exhaustive scan limited to M <= 20");
  AssumptionReport report;
  const std::uint64_t total = std::uint64_t{1} << spec.m;
  for (std::uint64_t bits = 0; bits < total; ++bits) {
    SparsityPattern p(spec.m);
    for (int i = 0; i < spec.m; ++i) {
      if ((bits >> i) & 1u) p.set(i, true);
    }
    check_one_penalized(p, spec, report);
  }
  report.note = report.sufficient_condition
                    ? "structural penalty stayed within [0, M] on all patterns"
                    : "structural penalty exceeds M on some patterns";
  return report;
}

AssumptionReport check_assumption_grouped(const PriorSpec& spec) {
  if (spec.variant != PriorVariant::gsa) {
    throw std::invalid_argument("grouped assumption check needs a gsa prior");
  }
  AssumptionReport report;
  const auto& groups = *spec.groups;
  const double g_count = static_cast<double>(groups.group_count());
  const double bound = std::log1p(kE * g_count / static_cast<double>(spec.rank));
  report.sufficient_condition = static_cast<double>(groups.max_group_size()) <= bound;
  report.note = report.sufficient_condition
                    ? "max group size <= log(1 + e|G|/R): assumption guaranteed"
                    : "max group size exceeds log(1 + e|G|/R): assumption not guaranteed";

  if (groups.group_count() > 20) return report;

  // exhaustive scan over patterns expressible as group unions
  std::unordered_set<SparsityPattern, PatternHash> seen;
  const std::uint64_t total = std::uint64_t{1} << groups.group_count();
  for (std::uint64_t bits = 0; bits < total; ++bits) {
    std::vector<int> selected;
    for (int gi = 0; gi < groups.group_count(); ++gi) {
      if ((bits >> gi) & 1u) selected.push_back(gi);
    }
    SparsityPattern p = group_union_pattern(selected, groups);
    if (!seen.insert(p).second) continue;
    ++report.patterns_checked;
    if (p.count() <= 0 || p.count() >= spec.rank) continue;
    const GroupCoverResult cover = grouped_l0(p, groups);
    const double k0g = std::max(static_cast<double>(cover.value), 1.0);
    const double lhs = static_cast<double>(p.count()) / k0g;
    const double rhs = std::log1p(kE * g_count / k0g);
    if (lhs > rhs + 1e-12) {
      report.assumption_holds = false;
      report.assumption_violators.push_back(p);
    }
  }
  return report;
}

}  // namespace spagg
