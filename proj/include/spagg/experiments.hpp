#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "spagg/aggregate.hpp"
#include "spagg/dataset.hpp"
#include "spagg/structure.hpp"

namespace spagg {

enum class Geometry { line, lattice };

Geometry geometry_from_name(const std::string& name);
std::string geometry_name(Geometry g);

// Simulation protocol: iid standard normal train/test designs, a true
// coefficient vector supported on non-overlapping +/-1 clusters, Gaussian
// noise with sd sigma (default ||beta||_0 / 9).
struct SimSpec {
  int n = 100;
  int m = 100;
  int clusters = 1;       // C
  int cluster_size = 9;   // C_on; must be a perfect square on the lattice
  double sigma = -1.0;    // noise sd; negative -> default clusters*cluster_size/9
  Geometry geometry = Geometry::line;
  int lattice_width = 0;  // 0 -> sqrt(m) when square
  int reps = 250;
  std::uint64_t seed = 0;
  long iterations = 7000;
  long burn_in = 3000;
  double h = 3.0;         // cluster-counting threshold

  double noise_sd() const { return sigma >= 0.0 ? sigma : clusters * cluster_size / 9.0; }
  int width() const;
};

// Covariate geometry used both for placement checks and the SSA penalty.
DistanceSpec trial_distance(const SimSpec& spec);

struct TrialData {
  Dataset train;
  Dataset test;
  Eigen::VectorXd beta_true;
};

// Deterministic per (spec.seed, rep). Cluster placements are drawn
// uniformly and rejected until the supports are disjoint and the
// cluster-counting penalty at threshold h sees exactly C clusters.
TrialData generate_trial(const SimSpec& spec, int rep);

// ||X_test (beta_true - beta_hat)||_2^2 / n.
double metric_prediction(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_true,
                         const Eigen::MatrixXd& x_test);

// ||beta_true - beta_hat||_2^2 / ||beta_true||_2^2; beta_true must be nonzero.
double metric_recovery(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_true);

// Greedy forward selection with a BIC stop, refit by OLS on the chosen set.
Eigen::VectorXd forward_stepwise(const Dataset& data, int max_steps);

enum class Method { spa, ssa, stepwise };

std::string method_name(Method m);

struct MethodSummary {
  Method method = Method::spa;
  double pred_mean = 0.0, pred_se = 0.0;
  double rec_mean = 0.0, rec_se = 0.0;
  // paired win rate of this method against the first method in the list;
  // exact ties count as half a win
  double paired_win_pred = 0.5;
  double paired_win_rec = 0.5;
  double wall_time_sec = 0.0;
};

struct ComparisonSummary {
  std::vector<MethodSummary> methods;
  int reps = 0;
  // raw per-method, per-rep metric values
  std::vector<std::vector<double>> prediction;
  std::vector<std::vector<double>> recovery;
};

// Runs every method on the same generated data, rep by rep (reps are
// independent parallel jobs merged by index). Chains see the normalized
// design and known sigma^2 = spec.noise_sd()^2; coefficients are mapped
// back to original units before scoring.
ComparisonSummary run_comparison(const SimSpec& spec,
                                 const std::vector<Method>& methods = {Method::spa, Method::ssa,
                                                                       Method::stepwise},
                                 int jobs = 1);

std::string summary_csv(const ComparisonSummary& summary);
std::string summary_table(const ComparisonSummary& summary);

}  // namespace spagg
