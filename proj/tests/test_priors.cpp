#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "spagg/priors.hpp"

using namespace spagg;
namespace oracle = spagg::testing;

namespace {

PriorSpec ssa_clusters_line10(int rank = 10) {
  return PriorSpec::ssa(10, rank, PenaltySpec::clusters(DistanceSpec::line_positions(10), 3.0));
}

PriorSpec gsa_chain4(int rank = 4) {
  return PriorSpec::gsa(4, rank, GroupStructure(4, {{0, 1}, {1, 2}, {2, 3}}));
}

}  // namespace

TEST_CASE("complexity per variant") {
  const PriorSpec spa = PriorSpec::spa(10, 10);
  CHECK(complexity(SparsityPattern::from_indices(10, {1, 4, 7}), spa).value == 3.0);

  const PriorSpec ssa = ssa_clusters_line10();
  const Complexity kc = complexity(SparsityPattern::from_indices(10, {0, 1, 2, 7, 8}), ssa);
  CHECK(kc.feasible);
  CHECK(kc.value == doctest::Approx(7.0));  // 5 + 2 clusters

  const PriorSpec gsa = gsa_chain4();
  const Complexity kg = complexity(SparsityPattern::from_indices(4, {0, 1, 2, 3}), gsa);
  CHECK(kg.feasible);
  CHECK(kg.value == 2.0);
  CHECK_FALSE(complexity(SparsityPattern::from_indices(4, {0, 2}), gsa).feasible);
}

TEST_CASE("log prior values") {
  const PriorSpec spa10 = PriorSpec::spa(10, 10);
  CHECK(log_prior_unnormalized(SparsityPattern(10), spa10) == 0.0);

  // k = 2, M = 10: 2 log(2 / 20e) = 2(log 2 - log 20 - 1)
  const double expected = 2.0 * (std::log(2.0) - std::log(20.0) - 1.0);
  CHECK(expected == doctest::Approx(-6.60517).epsilon(1e-5));
  CHECK(log_prior_unnormalized(SparsityPattern::from_indices(10, {3, 6}), spa10) ==
        doctest::Approx(expected).epsilon(1e-12));

  // ||p||_0 = R + 1 <= M - 1 has zero mass under the simplified prior
  const PriorSpec low_rank = PriorSpec::spa(10, 3);
  CHECK(log_prior_unnormalized(SparsityPattern::from_indices(10, {0, 1, 2, 3}), low_rank) ==
        kNegInf);

  // non-simplified: 1/2 mass at the full model even beyond the rank
  const PriorSpec full_form = PriorSpec::spa(10, 3, false);
  SparsityPattern all10(10);
  for (int i = 0; i < 10; ++i) all10.set(i, true);
  CHECK(log_prior_unnormalized(all10, full_form) == doctest::Approx(std::log(0.5)));
  // and the M-branch takes priority when R == M
  const PriorSpec overlap = PriorSpec::spa(10, 10, false);
  CHECK(log_prior_unnormalized(all10, overlap) == doctest::Approx(std::log(0.5)));
}

TEST_CASE("log prior ratio: examples and closed form") {
  const PriorSpec spa10 = PriorSpec::spa(10, 10);
  const SparsityPattern p1 = SparsityPattern::from_indices(10, {2});
  CHECK(log_prior_ratio(p1, p1, spa10) == 0.0);

  const SparsityPattern p2 = SparsityPattern::from_indices(10, {2, 5});
  const double expected = std::log(4.0) - std::log(20.0) - 1.0;  // log(4 / 20e)
  CHECK(expected == doctest::Approx(-2.60944).epsilon(1e-5));
  CHECK(log_prior_ratio(p2, p1, spa10) == doctest::Approx(expected).epsilon(1e-10));
  CHECK(spa_log_prior_ratio_closed_form(2, 1, 10) == doctest::Approx(expected).epsilon(1e-12));

  // transition into an infeasible grouped pattern has zero mass
  const PriorSpec gsa = gsa_chain4();
  CHECK(log_prior_ratio(SparsityPattern::from_indices(4, {0, 2}),
                        SparsityPattern::from_indices(4, {0, 1}), gsa) == kNegInf);

  // closed form equals the direct difference over many random pairs
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 1000; ++trial) {
    const int kp = 1 + uniform_int(rng, 10);
    const int kq = 1 + uniform_int(rng, 10);
    const SparsityPattern p = oracle::pattern_from_bits((std::uint64_t{1} << kp) - 1, 10);
    const SparsityPattern q = oracle::pattern_from_bits((std::uint64_t{1} << kq) - 1, 10);
    const double direct = log_prior_ratio(q, p, spa10);
    const double closed = spa_log_prior_ratio_closed_form(kq, kp, 10);
    CHECK(std::abs(direct - closed) < 1e-10);
  }
}

TEST_CASE("log prior ratio antisymmetry across variants") {
  std::mt19937_64 rng(14);
  const PriorSpec specs[] = {PriorSpec::spa(10, 10), ssa_clusters_line10(),
                             PriorSpec::gsa(4, 4, GroupStructure(4, {{0, 1}, {1, 2}, {2, 3}}))};
  for (const auto& spec : specs) {
    for (int trial = 0; trial < 200; ++trial) {
      const SparsityPattern p = oracle::random_pattern(rng, spec.m);
      const SparsityPattern q = oracle::random_pattern(rng, spec.m);
      const double pq = log_prior_ratio(q, p, spec);
      const double qp = log_prior_ratio(p, q, spec);
      if (std::isfinite(pq) && std::isfinite(qp)) {
        CHECK(std::abs(pq + qp) < 1e-12);
      }
    }
  }
}

TEST_CASE("log prior is strictly decreasing in the complexity") {
  const PriorSpec spa12 = PriorSpec::spa(12, 12);
  double prev = log_prior_unnormalized(SparsityPattern::from_indices(12, {0}), spa12);
  for (int k = 2; k <= 12; ++k) {
    const SparsityPattern p = oracle::pattern_from_bits((std::uint64_t{1} << k) - 1, 12);
    const double cur = log_prior_unnormalized(p, spa12);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("strong hierarchy zeroes violating patterns") {
  const Dag chain(4, {{0, 1}, {1, 2}, {2, 3}});
  const PriorSpec strict =
      PriorSpec::ssa(4, 4, PenaltySpec::dag_ancestors(chain, /*strong_hierarchy=*/true));
  CHECK(log_prior_unnormalized(SparsityPattern::from_indices(4, {0, 1}), strict) >
        -std::numeric_limits<double>::infinity());
  CHECK(log_prior_unnormalized(SparsityPattern::from_indices(4, {1}), strict) == kNegInf);
  CHECK(log_prior_unnormalized(SparsityPattern::from_indices(4, {0, 2}), strict) == kNegInf);

  const PriorSpec loose = PriorSpec::ssa(4, 4, PenaltySpec::dag_ancestors(chain, false));
  CHECK(log_prior_unnormalized(SparsityPattern::from_indices(4, {1}), loose) != kNegInf);
}

TEST_CASE("penalized assumption checker") {
  // weights with sum < M pass everything
  const PriorSpec weights =
      PriorSpec::ssa(8, 8, PenaltySpec::weights(8, std::vector<double>(8, 0.4)));
  const AssumptionReport wr = check_assumption_penalized_exhaustive(weights);
  CHECK(wr.assumption_holds);
  CHECK(wr.sufficient_condition);
  CHECK(wr.patterns_checked == 256);

  // clusters always pass: component count <= ||p||_0 <= M
  const PriorSpec clusters =
      PriorSpec::ssa(8, 8, PenaltySpec::clusters(DistanceSpec::line_positions(8), 3.0));
  const AssumptionReport cr = check_assumption_penalized_exhaustive(clusters);
  CHECK(cr.assumption_holds);
  CHECK(cr.sufficient_condition);

  // an oversized cut penalty violates the sufficient condition
  Eigen::MatrixXd d = Eigen::MatrixXd::Constant(8, 8, 9.0);
  d.diagonal().setZero();
  const PriorSpec cut = PriorSpec::ssa(8, 8, PenaltySpec::cut(DistanceSpec::from_matrix(d)));
  const AssumptionReport xr = check_assumption_penalized_exhaustive(cut);
  CHECK_FALSE(xr.sufficient_condition);
  CHECK_FALSE(xr.sufficient_violators.empty());
}

TEST_CASE("grouped assumption checker") {
  // singleton groups reduce to the plain sparse case and pass
  const PriorSpec singles = PriorSpec::gsa(8, 8, GroupStructure(8, {{0}, {1}, {2}, {3}, {4}, {5}, {6}, {7}}));
  const AssumptionReport sr = check_assumption_grouped(singles);
  CHECK(sr.sufficient_condition);
  CHECK(sr.assumption_holds);

  // max |g| = 5, |G| = 10, R = 10: log(1 + e) < 5, not guaranteed
  std::vector<std::vector<int>> big;
  for (int g = 0; g < 10; ++g) {
    std::vector<int> grp;
    for (int t = 0; t < 5; ++t) grp.push_back((g * 2 + t) % 20);
    big.push_back(std::move(grp));
  }
  const PriorSpec wide = PriorSpec::gsa(20, 10, GroupStructure(20, big));
  const AssumptionReport br = check_assumption_grouped(wide);
  CHECK_FALSE(br.sufficient_condition);
  CHECK(br.note.find("not guaranteed") != std::string::npos);

  // hand-built |G| = 6 exhaustive scan enumerates every distinct union
  const PriorSpec six =
      PriorSpec::gsa(6, 6, GroupStructure(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}}));
  const AssumptionReport er = check_assumption_grouped(six);
  CHECK(er.patterns_checked > 6);
  CHECK(er.patterns_checked <= 64);
}
