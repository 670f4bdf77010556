#include <doctest.h>

#include <cmath>
#include <cstring>

#include "oracles.hpp"
#include "spagg/experiments.hpp"

using namespace spagg;
namespace oracle = spagg::testing;

namespace {

SimSpec table1_row1_spec() {
  SimSpec spec;
  spec.n = 100;
  spec.m = 100;
  spec.clusters = 1;
  spec.cluster_size = 9;
  spec.geometry = Geometry::line;
  spec.seed = 1234;
  return spec;
}

}  // namespace

TEST_CASE("generate_trial: line clusters") {
  const SimSpec spec = table1_row1_spec();
  CHECK(spec.noise_sd() == doctest::Approx(1.0));  // ||beta||_0 / 9 = 1

  const TrialData trial = generate_trial(spec, 0);
  CHECK(trial.train.n() == 100);
  CHECK(trial.train.m() == 100);
  CHECK(trial.train.sigma2().value() == doctest::Approx(1.0));

  // one contiguous run of 9 entries, all +/-1
  std::vector<int> support;
  for (int i = 0; i < 100; ++i) {
    if (trial.beta_true[i] != 0.0) {
      support.push_back(i);
      CHECK(std::abs(trial.beta_true[i]) == 1.0);
    }
  }
  REQUIRE(support.size() == 9);
  CHECK(support.back() - support.front() == 8);

  const DistanceSpec dist = trial_distance(spec);
  SparsityPattern p(100);
  for (int i : support) p.set(i, true);
  CHECK(penalty_clusters(p, dist, spec.h) == 1);

  // bit-identical reproduction per (seed, rep)
  const TrialData again = generate_trial(spec, 0);
  CHECK(std::memcmp(trial.train.x().data(), again.train.x().data(),
                    sizeof(double) * 100 * 100) == 0);
  CHECK(std::memcmp(trial.beta_true.data(), again.beta_true.data(), sizeof(double) * 100) == 0);
  const TrialData other = generate_trial(spec, 1);
  CHECK(std::memcmp(trial.train.x().data(), other.train.x().data(),
                    sizeof(double) * 100 * 100) != 0);
}

TEST_CASE("generate_trial: lattice blocks never touch") {
  SimSpec spec;
  spec.n = 50;
  spec.m = 400;
  spec.clusters = 2;
  spec.cluster_size = 9;
  spec.geometry = Geometry::lattice;
  spec.seed = 77;
  CHECK(spec.width() == 20);
  CHECK(spec.noise_sd() == doctest::Approx(2.0));  // 18/9

  const DistanceSpec dist = trial_distance(spec);
  for (int rep = 0; rep < 5; ++rep) {
    const TrialData trial = generate_trial(spec, rep);
    SparsityPattern p(400);
    int on = 0;
    for (int i = 0; i < 400; ++i) {
      if (trial.beta_true[i] != 0.0) {
        p.set(i, true);
        ++on;
      }
    }
    CHECK(on == 18);
    // exactly two clusters at h = 3 implies blocks more than distance 3 apart
    CHECK(penalty_clusters(p, dist, spec.h) == 2);
    // each block is a 3x3 square: internally connected at h = 1
    CHECK(penalty_clusters(p, dist, 1.0) == 2);
  }

  SimSpec bad = spec;
  bad.cluster_size = 8;  // not a square
  CHECK_THROWS_AS(generate_trial(bad, 0), std::invalid_argument);

  SimSpec too_many = spec;
  too_many.clusters = 50;  // 50 * 9 > 400
  CHECK_THROWS_AS(generate_trial(too_many, 0), std::invalid_argument);
}

TEST_CASE("metrics") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd x_test = oracle::random_matrix(rng, 40, 6);
  Eigen::VectorXd beta_true(6);
  beta_true << 1, -1, 0, 2, 0, 0;

  CHECK(metric_prediction(beta_true, beta_true, x_test) == 0.0);
  CHECK(metric_recovery(beta_true, beta_true) == 0.0);
  CHECK(metric_recovery(Eigen::VectorXd::Zero(6), beta_true) == doctest::Approx(1.0));
  CHECK(metric_recovery(2.0 * beta_true, beta_true) == doctest::Approx(1.0));

  // single-coordinate error delta e_j
  Eigen::VectorXd off = beta_true;
  const double delta = 0.37;
  off[2] += delta;
  CHECK(metric_prediction(off, beta_true, x_test) ==
        doctest::Approx(delta * delta * x_test.col(2).squaredNorm() / 40.0).epsilon(1e-12));

  CHECK_THROWS_AS(metric_recovery(beta_true, Eigen::VectorXd::Zero(6)), std::invalid_argument);

  // simultaneous permutation leaves both metrics unchanged
  const std::vector<int> perm = {2, 0, 5, 1, 3, 4};
  Eigen::MatrixXd xp(40, 6);
  Eigen::VectorXd bp(6), op(6);
  for (int j = 0; j < 6; ++j) {
    xp.col(j) = x_test.col(perm[j]);
    bp[j] = beta_true[perm[j]];
    op[j] = off[perm[j]];
  }
  CHECK(metric_prediction(op, bp, xp) ==
        doctest::Approx(metric_prediction(off, beta_true, x_test)).epsilon(1e-12));
  CHECK(metric_recovery(op, bp) == doctest::Approx(metric_recovery(off, beta_true)).epsilon(1e-12));
}

TEST_CASE("forward stepwise") {
  // y exactly equals the first covariate
  std::mt19937_64 rng(8);
  Eigen::MatrixXd x = oracle::random_matrix(rng, 30, 5);
  const Eigen::VectorXd y = x.col(0);
  const Dataset data(y, x);
  const Eigen::VectorXd beta = forward_stepwise(data, 5);
  CHECK(beta[0] == doctest::Approx(1.0).epsilon(1e-8));
  for (int j = 1; j < 5; ++j) CHECK(std::abs(beta[j]) < 1e-8);

  // orthogonal design: selection follows the marginal correlation order
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(6, 6);
  Eigen::VectorXd strengths(6);
  strengths << 0.1, 5.0, 0.2, 4.0, 0.0, 3.0;
  const Dataset ortho(strengths, eye);
  for (int steps = 1; steps <= 3; ++steps) {
    const Eigen::VectorXd b = forward_stepwise(ortho, steps);
    // the top `steps` magnitudes are 5.0 (j=1), 4.0 (j=3), 3.0 (j=5)
    const std::vector<int> order = {1, 3, 5};
    for (int s = 0; s < steps; ++s) CHECK(b[order[static_cast<std::size_t>(s)]] != 0.0);
    for (int j : {0, 2, 4}) CHECK(b[j] == 0.0);
  }

  // pure noise: BIC keeps the model empty most of the time
  int selected_any = 0;
  const int reps = 60;
  for (int rep = 0; rep < reps; ++rep) {
    std::mt19937_64 gen(derive_seed(900, static_cast<std::uint64_t>(rep)));
    const Eigen::MatrixXd xn = oracle::random_matrix(gen, 200, 10);
    const Eigen::VectorXd yn = oracle::random_vector(gen, 200);
    const Eigen::VectorXd bn = forward_stepwise(Dataset(yn, xn), 10);
    if (!bn.isZero(0.0)) ++selected_any;
  }
  CHECK(static_cast<double>(selected_any) / reps < 0.3);
}

TEST_CASE("run_comparison smoke: schema and determinism") {
  SimSpec spec = table1_row1_spec();
  spec.n = 40;
  spec.m = 20;
  spec.cluster_size = 5;
  spec.reps = 2;
  spec.iterations = 800;
  spec.burn_in = 300;

  const ComparisonSummary summary =
      run_comparison(spec, {Method::spa, Method::ssa, Method::stepwise}, 2);
  REQUIRE(summary.methods.size() == 3);
  CHECK(summary.reps == 2);
  for (const auto& ms : summary.methods) {
    CHECK(ms.pred_mean >= 0.0);
    CHECK(ms.rec_mean >= 0.0);
  }
  const std::string csv = summary_csv(summary);
  CHECK(csv.find("method,pred_mean,pred_se,rec_mean,rec_se,paired_win") == 0);
  CHECK(csv.find("\nspa,") != std::string::npos);
  CHECK(csv.find("\nssa,") != std::string::npos);
  CHECK(csv.find("\nstepwise,") != std::string::npos);

  // identical methods tie on every rep: win rate is exactly one half
  const ComparisonSummary ties = run_comparison(spec, {Method::spa, Method::spa}, 1);
  CHECK(ties.methods[1].paired_win_pred == 0.5);
  CHECK(ties.methods[1].paired_win_rec == 0.5);

  // jobs do not change the result
  const ComparisonSummary seq = run_comparison(spec, {Method::spa, Method::ssa, Method::stepwise}, 1);
  for (std::size_t mi = 0; mi < 3; ++mi) {
    CHECK(seq.methods[mi].pred_mean == summary.methods[mi].pred_mean);
    CHECK(seq.methods[mi].rec_mean == summary.methods[mi].rec_mean);
  }
}
