#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "spagg/groups.hpp"

using namespace spagg;
namespace oracle = spagg::testing;

namespace {

GroupStructure chain_groups() {
  // {{1,2},{2,3},{3,4}} in file terms
  return GroupStructure(4, {{0, 1}, {1, 2}, {2, 3}});
}

}  // namespace

TEST_CASE("group structure validates the cover") {
  CHECK_THROWS_AS(GroupStructure(4, {{0, 1}, {1, 2}}), std::invalid_argument);  // 3 uncovered
  CHECK_THROWS_AS(GroupStructure(3, {{0, 1}, {5}}), std::invalid_argument);     // out of range
  CHECK_THROWS_AS(GroupStructure(2, {{0}, {}, {1}}), std::invalid_argument);    // empty group
  const GroupStructure g = chain_groups();
  CHECK_FALSE(g.disjoint());
  CHECK(g.max_group_size() == 2);
  CHECK(GroupStructure(4, {{0, 1}, {2, 3}}).disjoint());
}

TEST_CASE("grouped l0: examples") {
  const GroupStructure g = chain_groups();

  const GroupCoverResult empty = grouped_l0(SparsityPattern(4), g);
  CHECK(empty.feasible);
  CHECK(empty.value == 0);

  const GroupCoverResult all = grouped_l0(SparsityPattern::from_indices(4, {0, 1, 2, 3}), g);
  CHECK(all.feasible);
  CHECK(all.exact);
  CHECK(all.value == 2);  // {1,2} and {3,4}

  const GroupCoverResult odd = grouped_l0(SparsityPattern::from_indices(4, {0, 2}), g);
  CHECK_FALSE(odd.feasible);  // no usable group at all
}

TEST_CASE("grouped l0 matches exhaustive min cover on random structures") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 4 + uniform_int(rng, 7);          // 4..10 covariates
    const int n_groups = 2 + uniform_int(rng, 9);   // 2..10 random groups
    std::vector<std::vector<int>> groups;
    for (int g = 0; g < n_groups; ++g) {
      std::vector<int> grp;
      for (int i = 0; i < m; ++i) {
        if (uniform01(rng) < 0.35) grp.push_back(i);
      }
      if (grp.empty()) grp.push_back(uniform_int(rng, m));
      groups.push_back(std::move(grp));
    }
    // two half-covers guarantee the structure covers every index
    std::vector<int> lo, hi;
    for (int i = 0; i < m; ++i) (i < m / 2 ? lo : hi).push_back(i);
    groups.push_back(lo);
    groups.push_back(hi);
    const GroupStructure structure(m, groups);
    const SparsityPattern p = oracle::random_pattern(rng, m, 0.45);

    const GroupCoverResult got = grouped_l0(p, structure);
    const int expected = oracle::min_cover_bruteforce(p.support(), groups);
    if (expected < 0) {
      CHECK_FALSE(got.feasible);
    } else {
      REQUIRE(got.feasible);
      CHECK(got.exact);
      CHECK(got.value == expected);
    }
  }
}

TEST_CASE("grouped l0 disjoint semantics") {
  const GroupStructure g(6, {{0, 1}, {2, 3}, {4, 5}});
  // support equals a union of groups: count of touched groups
  const GroupCoverResult hit = grouped_l0(SparsityPattern::from_indices(6, {0, 1, 4, 5}), g);
  CHECK(hit.feasible);
  CHECK(hit.value == 2);
  // partially covered group: infeasible
  CHECK_FALSE(grouped_l0(SparsityPattern::from_indices(6, {0, 2, 3}), g).feasible);
}

TEST_CASE("grouped l0 greedy fallback is flagged") {
  const int m = 30;
  std::vector<std::vector<int>> groups;
  for (int i = 0; i < m; ++i) groups.push_back({i});  // 30 singletons
  const GroupStructure structure(m, groups);
  SparsityPattern p(m);
  for (int i = 0; i < 26; ++i) p.set(i, true);  // 26 usable singletons > budget
  const GroupCoverResult res = grouped_l0(p, structure);
  CHECK(res.feasible);
  CHECK_FALSE(res.exact);
  CHECK(res.value == 26);
}

TEST_CASE("grouped l1: closed forms and the two-group oracle") {
  CHECK(grouped_l1(Eigen::VectorXd::Zero(4), chain_groups()) == 0.0);

  // disjoint {{1,2},{3}}, beta (3,4,5) -> 5 + 5
  const GroupStructure disj(3, {{0, 1}, {2}});
  Eigen::VectorXd beta(3);
  beta << 3, 4, 5;
  CHECK(grouped_l1(beta, disj) == doctest::Approx(10.0));

  // overlapping chain {{1,2},{2,3}}, beta (1,1,0) -> sqrt(2)
  const GroupStructure chain2(3, {{0, 1}, {1, 2}});
  Eigen::VectorXd b2(3);
  b2 << 1, 1, 0;
  CHECK(grouped_l1(b2, chain2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));

  // random two-group chains against the 1-D grid oracle
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 5;
    const GroupStructure g(m, {{0, 1, 2}, {2, 3, 4}});
    Eigen::VectorXd v(m);
    for (int i = 0; i < m; ++i) v[i] = normal(rng);
    const double expected = oracle::grouped_l1_two_group_oracle(v, {0, 1, 2}, {2, 3, 4}, 2);
    CHECK(grouped_l1(v, g) == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("grouped l1 decomposition is valid") {
  std::mt19937_64 rng(13);
  const GroupStructure g(6, {{0, 1, 2}, {2, 3}, {3, 4, 5}});
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd beta(6);
    for (int i = 0; i < 6; ++i) beta[i] = normal(rng);
    const auto parts = grouped_l1_decomposition(beta, g);
    REQUIRE(parts.size() == 3);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(6);
    for (int gi = 0; gi < 3; ++gi) {
      const auto& grp = g.group(gi);
      for (std::size_t t = 0; t < grp.size(); ++t) {
        sum[grp[t]] += parts[static_cast<std::size_t>(gi)][static_cast<Eigen::Index>(t)];
      }
    }
    CHECK((sum - beta).lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

TEST_CASE("grouped l1 is a norm: homogeneity, triangle, l1 reduction") {
  std::mt19937_64 rng(55);
  const GroupStructure g(5, {{0, 1}, {1, 2, 3}, {3, 4}});
  for (int trial = 0; trial < 15; ++trial) {
    Eigen::VectorXd a(5), b(5);
    for (int i = 0; i < 5; ++i) {
      a[i] = normal(rng);
      b[i] = normal(rng);
    }
    const double na = grouped_l1(a, g);
    const double nb = grouped_l1(b, g);
    const double scale = -2.5;
    CHECK(grouped_l1(scale * a, g) == doctest::Approx(std::abs(scale) * na).epsilon(1e-6));
    CHECK(grouped_l1(a + b, g) <= na + nb + 1e-6);
  }

  // singleton groups give back the l1 norm exactly
  const GroupStructure singles(4, {{0}, {1}, {2}, {3}});
  Eigen::VectorXd v(4);
  v << 1.5, -2.0, 0.0, 3.25;
  CHECK(grouped_l1(v, singles) == doctest::Approx(v.lpNorm<1>()));
}

TEST_CASE("group union pattern") {
  const GroupStructure g = chain_groups();
  CHECK(group_union_pattern({}, g).empty());
  const SparsityPattern both = group_union_pattern({0, 1}, g);
  CHECK(both.support() == std::vector<int>{0, 1, 2});
  const SparsityPattern tail = group_union_pattern({1, 2}, g);
  CHECK(tail.support() == std::vector<int>{1, 2, 3});
  CHECK_THROWS_AS(group_union_pattern({7}, g), std::invalid_argument);
}
