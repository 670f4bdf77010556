#include "spagg/groups.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace spagg {

GroupStructure::GroupStructure(int m, std::vector<std::vector<int>> groups)
    : m_(m), groups_(std::move(groups)), covering_(static_cast<std::size_t>(m)) {
  if (m <= 0) throw std::invalid_argument("group structure needs M >= 1");
  if (groups_.empty()) throw std::invalid_argument("group structure needs at least one group");
  std::vector<char> hit(static_cast<std::size_t>(m), 0);
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    auto& grp = groups_[g];
    if (grp.empty()) throw std::invalid_argument("empty group");
    std::sort(grp.begin(), grp.end());
    grp.erase(std::unique(grp.begin(), grp.end()), grp.end());
    for (int i : grp) {
      if (i < 0 || i >= m) throw std::invalid_argument("group index out of range");
      if (hit[static_cast<std::size_t>(i)]) disjoint_ = false;
      hit[static_cast<std::size_t>(i)] = 1;
      covering_[static_cast<std::size_t>(i)].push_back(static_cast<int>(g));
    }
    max_group_size_ = std::max(max_group_size_, static_cast<int>(grp.size()));
  }
  for (int i = 0; i < m; ++i) {
    if (!hit[static_cast<std::size_t>(i)]) {
      throw std::invalid_argument("groups must cover every covariate; index " +
                                  std::to_string(i + 1) + " is uncovered");
    }
  }
  // disjoint_ starts true and is cleared on the first overlap
}

namespace {

using Mask = std::vector<std::uint64_t>;

Mask make_mask(int bits) { return Mask(static_cast<std::size_t>((bits + 63) / 64), 0); }

void mask_set(Mask& m, int i) { m[static_cast<std::size_t>(i) / 64] |= std::uint64_t{1} << (i % 64); }

bool mask_subset(const Mask& a, const Mask& b) {  // a subset of b
  for (std::size_t w = 0; w < a.size(); ++w) {
    if (a[w] & ~b[w]) return false;
  }
  return true;
}

void mask_or(Mask& a, const Mask& b) {
  for (std::size_t w = 0; w < a.size(); ++w) a[w] |= b[w];
}

bool mask_eq(const Mask& a, const Mask& b) { return a == b; }

int mask_count_new(const Mask& covered, const Mask& g) {
  int c = 0;
  for (std::size_t w = 0; w < covered.size(); ++w) c += __builtin_popcountll(g[w] & ~covered[w]);
  return c;
}

int first_uncovered(const Mask& covered, const Mask& universe) {
  for (std::size_t w = 0; w < covered.size(); ++w) {
    const std::uint64_t rest = universe[w] & ~covered[w];
    if (rest) return static_cast<int>(w * 64) + __builtin_ctzll(rest);
  }
  return -1;
}

struct CoverSearch {
  const std::vector<Mask>& sets;
  const Mask& universe;
  int max_set_size;
  int best;

  void run(const Mask& covered, int used) {
    const int pick = first_uncovered(covered, universe);
    if (pick < 0) {
      best = std::min(best, used);
      return;
    }
    if (used + 1 >= best) return;  // even one more set cannot improve
    const int remaining = mask_count_new(covered, universe);
    if (used + (remaining + max_set_size - 1) / max_set_size >= best) return;
    for (std::size_t s = 0; s < sets.size(); ++s) {
      if (!((sets[s][static_cast<std::size_t>(pick) / 64] >> (pick % 64)) & 1u)) continue;
      Mask next = covered;
      mask_or(next, sets[s]);
      run(next, used + 1);
    }
  }
};

}  // namespace

GroupCoverResult grouped_l0(const SparsityPattern& p, const GroupStructure& g) {
  if (p.size() != g.m()) throw std::invalid_argument("pattern size does not match group structure");
  GroupCoverResult result;
  if (p.empty()) {
    result.feasible = true;
    result.value = 0;
    return result;
  }
  Mask universe = make_mask(p.size());
  for (int i : p.support()) mask_set(universe, i);

  // usable groups sit fully inside the support
  std::vector<Mask> usable;
  Mask reach = make_mask(p.size());
  for (const auto& grp : g.groups()) {
    Mask gm = make_mask(p.size());
    bool inside = true;
    for (int i : grp) {
      if (!p.test(i)) {
        inside = false;
        break;
      }
      mask_set(gm, i);
    }
    if (!inside) continue;
    mask_or(reach, gm);
    usable.push_back(std::move(gm));
  }
  if (!mask_eq(reach, universe)) return result;  // infeasible
  result.feasible = true;

  // drop groups dominated by a superset
  std::vector<Mask> kept;
  for (std::size_t a = 0; a < usable.size(); ++a) {
    bool dominated = false;
    for (std::size_t b = 0; b < usable.size() && !dominated; ++b) {
      if (a == b) continue;
      if (mask_subset(usable[a], usable[b]) &&
          (!mask_subset(usable[b], usable[a]) || b < a)) {
        dominated = true;
      }
    }
    if (!dominated) kept.push_back(usable[a]);
  }

  int max_size = 1;
  for (const auto& s : kept) {
    int c = 0;
    for (std::uint64_t w : s) c += __builtin_popcountll(w);
    max_size = std::max(max_size, c);
  }

  if (static_cast<int>(kept.size()) <= kExactCoverBudget) {
    CoverSearch search{kept, universe, max_size, static_cast<int>(kept.size()) + 1};
    search.run(make_mask(p.size()), 0);
    result.value = search.best;
    result.exact = true;
    return result;
  }

  // greedy upper bound, flagged
  Mask covered = make_mask(p.size());
  int used = 0;
  while (!mask_eq(covered, universe)) {
    int best_set = -1;
    int best_gain = 0;
    for (std::size_t s = 0; s < kept.size(); ++s) {
      const int gain = mask_count_new(covered, kept[s]);
      if (gain > best_gain) {
        best_gain = gain;
        best_set = static_cast<int>(s);
      }
    }
    mask_or(covered, kept[static_cast<std::size_t>(best_set)]);
    ++used;
  }
  result.value = used;
  result.exact = false;
  return result;
}

SparsityPattern group_union_pattern(const std::vector<int>& selected, const GroupStructure& g) {
  SparsityPattern p(g.m());
  for (int gi : selected) {
    if (gi < 0 || gi >= g.group_count()) throw std::invalid_argument("group index out of range");
    for (int i : g.group(gi)) p.set(i, true);
  }
  return p;
}

namespace {

// Feasible decomposition value: the block iterate plus the constraint
// residual spread evenly over the groups covering each coordinate.
double repaired_value(const std::vector<Eigen::VectorXd>& parts, const Eigen::VectorXd& beta,
                      const GroupStructure& g, std::vector<Eigen::VectorXd>* out) {
  const int n_groups = g.group_count();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(beta.size());
  for (int gi = 0; gi < n_groups; ++gi) {
    const auto& grp = g.group(gi);
    for (std::size_t t = 0; t < grp.size(); ++t) sum[grp[t]] += parts[static_cast<std::size_t>(gi)][static_cast<Eigen::Index>(t)];
  }
  const Eigen::VectorXd residual = beta - sum;
  double value = 0.0;
  for (int gi = 0; gi < n_groups; ++gi) {
    const auto& grp = g.group(gi);
    Eigen::VectorXd v = parts[static_cast<std::size_t>(gi)];
    for (std::size_t t = 0; t < grp.size(); ++t) {
      const int i = grp[t];
      v[static_cast<Eigen::Index>(t)] += residual[i] / static_cast<double>(g.covering(i).size());
    }
    value += v.norm();
    if (out) (*out)[static_cast<std::size_t>(gi)] = std::move(v);
  }
  return value;
}

}  // namespace

std::vector<Eigen::VectorXd> grouped_l1_decomposition(const Eigen::VectorXd& beta,
                                                      const GroupStructure& g, double tol) {
  if (beta.size() != g.m()) throw std::invalid_argument("beta length does not match group structure");
  const int n_groups = g.group_count();
  std::vector<Eigen::VectorXd> parts(static_cast<std::size_t>(n_groups));

  if (g.disjoint()) {
    for (int gi = 0; gi < n_groups; ++gi) {
      const auto& grp = g.group(gi);
      Eigen::VectorXd v(static_cast<Eigen::Index>(grp.size()));
      for (std::size_t t = 0; t < grp.size(); ++t) v[static_cast<Eigen::Index>(t)] = beta[grp[t]];
      parts[static_cast<std::size_t>(gi)] = std::move(v);
    }
    return parts;
  }

  // Douglas-Rachford on the product space: alternate the exact per-block
  // shrinkage prox of sum_g ||v_g||_2 with the averaging projection onto
  // {sum_g v_g = beta}; deterministic sweep order.
  const double scale = std::max(1.0, beta.lpNorm<Eigen::Infinity>());
  const double step = 0.25 * scale;
  std::vector<Eigen::VectorXd> w(static_cast<std::size_t>(n_groups));
  std::vector<Eigen::VectorXd> prox(static_cast<std::size_t>(n_groups));
  std::vector<Eigen::VectorXd> proj(static_cast<std::size_t>(n_groups));
  for (int gi = 0; gi < n_groups; ++gi) {
    const auto sz = static_cast<Eigen::Index>(g.group(gi).size());
    w[static_cast<std::size_t>(gi)] = Eigen::VectorXd::Zero(sz);
    prox[static_cast<std::size_t>(gi)] = Eigen::VectorXd::Zero(sz);
    proj[static_cast<std::size_t>(gi)] = Eigen::VectorXd::Zero(sz);
  }

  double best_value = std::numeric_limits<double>::infinity();
  std::vector<Eigen::VectorXd> best(static_cast<std::size_t>(n_groups));
  std::vector<Eigen::VectorXd> candidate(static_cast<std::size_t>(n_groups));
  int stable_iters = 0;
  const int max_iters = 200000;
  for (int iter = 0; iter < max_iters; ++iter) {
    // prox step: block soft threshold of w_g by `step`
    for (int gi = 0; gi < n_groups; ++gi) {
      const double norm = w[static_cast<std::size_t>(gi)].norm();
      const double shrink = norm > step ? 1.0 - step / norm : 0.0;
      prox[static_cast<std::size_t>(gi)] = shrink * w[static_cast<std::size_t>(gi)];
    }
    // reflected projection onto the constraint
    Eigen::VectorXd deficit = beta;
    for (int gi = 0; gi < n_groups; ++gi) {
      const auto& grp = g.group(gi);
      for (std::size_t t = 0; t < grp.size(); ++t) {
        deficit[grp[t]] -= 2.0 * prox[static_cast<std::size_t>(gi)][static_cast<Eigen::Index>(t)] -
                           w[static_cast<std::size_t>(gi)][static_cast<Eigen::Index>(t)];
      }
    }
    for (int gi = 0; gi < n_groups; ++gi) {
      const auto& grp = g.group(gi);
      for (std::size_t t = 0; t < grp.size(); ++t) {
        const int i = grp[t];
        proj[static_cast<std::size_t>(gi)][static_cast<Eigen::Index>(t)] =
            2.0 * prox[static_cast<std::size_t>(gi)][static_cast<Eigen::Index>(t)] -
            w[static_cast<std::size_t>(gi)][static_cast<Eigen::Index>(t)] +
            deficit[i] / static_cast<double>(g.covering(i).size());
      }
    }
    for (int gi = 0; gi < n_groups; ++gi) {
      w[static_cast<std::size_t>(gi)] += proj[static_cast<std::size_t>(gi)] - prox[static_cast<std::size_t>(gi)];
    }

    if (iter % 5 == 0) {
      const double value = repaired_value(prox, beta, g, &candidate);
      if (value < best_value - tol * std::max(1.0, best_value)) {
        best_value = value;
        best.swap(candidate);
        stable_iters = 0;
      } else {
        if (value < best_value) {
          best_value = value;
          best.swap(candidate);
        }
        if (++stable_iters >= 40) break;
      }
    }
  }
  if (!std::isfinite(best_value)) repaired_value(prox, beta, g, &best);
  return best;
}

double grouped_l1(const Eigen::VectorXd& beta, const GroupStructure& g, double tol) {
  if (beta.isZero(0.0)) return 0.0;
  const auto parts = grouped_l1_decomposition(beta, g, tol);
  double value = 0.0;
  for (const auto& v : parts) value += v.norm();
  return value;
}

}  // namespace spagg
