#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "spagg/dataset.hpp"
#include "spagg/ols.hpp"
#include "spagg/pattern.hpp"
#include "spagg/priors.hpp"

namespace spagg {

enum class WalkKind { covariate, group };

struct ChainConfig {
  long iterations = 7000;    // T
  long burn_in = 3000;       // T0, with 0 <= T0 < T
  std::uint64_t seed = 0;
  double sigma2 = 1.0;       // working noise variance
  WalkKind walk = WalkKind::covariate;
  PriorSpec prior;
  // Optional sparse readout: zero coefficients whose selection frequency
  // falls below this cutoff. 0 disables.
  double selection_threshold = 0.0;
  int refit_interval = 1000;
};

struct AggregateFit {
  Eigen::VectorXd beta;            // aggregated coefficients
  Eigen::VectorXd selection_freq;  // per-covariate inclusion frequency / probability
  double acceptance_rate = 1.0;
  long visited = 0;                // distinct patterns touched
  // exact mode: normalized log weight per pattern
  std::unordered_map<SparsityPattern, double, PatternHash> log_weights;
  // chain mode: post-burn-in visit counts per pattern
  std::unordered_map<SparsityPattern, long, PatternHash> visit_counts;
  // group walks only: whether every prior evaluation used an exact min cover
  bool gsa_complexity_exact = true;
};

// Exact aggregation by enumeration: every pattern with nonzero prior mass
// contributes weight exp(-Error/(4 sigma2) - ||p||_0/2) pi_p, normalized by
// log-sum-exp. Budget: M <= 20 for the spa/ssa priors, |G| <= 20 for gsa
// (whose mass lives on unions of groups).
AggregateFit exact_aggregate(const Dataset& data, const PriorSpec& prior, double sigma2);

struct ChainTraceRow {
  long iteration = 0;
  int count = 0;        // ||p||_0
  double error = 0.0;   // training error of the current state
  bool accepted = false;
};

// Metropolis walk over the pattern hypercube (or the group hypercube),
// started at the empty model. Proposals with zero prior mass are rejected
// without consuming an acceptance draw. The aggregate is the mean of the
// per-state restricted fits over iterations T0 < t <= T. Deterministic
// given the seed.
AggregateFit metropolis_run(const Dataset& data, const ChainConfig& config,
                            std::vector<ChainTraceRow>* trace = nullptr);

struct Sigma2Estimate {
  double sigma2 = 0.0;
  bool converged = true;  // false -> fallback to the closest grid point
  struct Evaluation {
    double delta = 0.0;
    double s_value = 0.0;  // ||y - X beta_delta||^2 / (n - M_n(beta_delta))
    bool usable = true;    // false when n - M_n <= 0
  };
  std::vector<Evaluation> evaluations;
};

// Grid scheme: runs the chain at each delta and returns the first delta
// (in grid order, large to small) with |s(delta) - delta| <= alpha; falls
// back to the delta minimizing |s(delta) - delta| when none qualifies.
Sigma2Estimate estimate_sigma2(const Dataset& data, const ChainConfig& config_template,
                               double alpha, const std::vector<double>& grid, int jobs = 1);

struct TwoStageResult {
  double sigma2 = 0.0;   // s(pilot), the variance used for the final run
  double pilot = 0.0;    // delta_0
  bool usable = true;    // false when a run had n - M_n <= 0
  AggregateFit fit;      // chain rerun at sigma2
};

// Two-stage scheme: one run at the pilot variance (sample variance of y by
// default), then a rerun at the residual-based estimate from the first run.
TwoStageResult estimate_sigma2_two_stage(const Dataset& data, const ChainConfig& config_template,
                                         std::optional<double> pilot = {});

}  // namespace spagg
