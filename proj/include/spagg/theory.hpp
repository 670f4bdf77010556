#pragma once

#include <Eigen/Dense>

#include "spagg/dataset.hpp"
#include "spagg/groups.hpp"
#include "spagg/structure.hpp"

namespace spagg {

// Numeric evaluation of the oracle-inequality bounds.
//
// The estimator code keeps raw sums of squares; every squared norm here is
// empirical (scaled by 1/n), matching the aggregation literature these
// bounds come from, so fit_term = ||X beta - y||_2^2 / n and the sigma^2
// remainder terms carry the same 1/n.
struct BoundInputs {
  double fit_term = 0.0;    // ||X beta - y||^2_n for the comparator beta
  double sigma2 = 0.0;
  int n = 1;
  int m = 1;                // number of candidate covariates
  int rank = 1;             // R = rank(X)
  int scale = 1;            // C: M for the penalized bounds, |G| for grouped
  double gamma = 1.0;       // >= 1, penalized l1 bound only
  double complexity = 0.0;  // M_c(beta) or M_G(beta)
  double norm1 = 0.0;       // ||beta||_1 or ||beta||_{1,G}
};

// Complexity-adaptive bound:
// fit + min(sigma2 R / n, 9 sigma2 (k/n) log(1 + eC/max(k,1))) + (8 sigma2/n) log 2.
double bound_prop1(const BoundInputs& in);
// Same form with C = |G| and k = M_G(beta).
double bound_prop3(const BoundInputs& in);

// Convex-norm bound: fit + phi + (sigma2/n)(9 log(1+eC) + 8 log 2), with
// phi(0) = 0 and otherwise the three-way min over
//   sigma2/n,
//   9 sigma2 (k/n) log(1 + eC/max(k,1)),
//   11 sigma sqrt(gamma) ||beta||_1 / sqrt(n) *
//       sqrt(log(1 + 3 e C sigma / (||beta||_1 sqrt(gamma n)))).
double bound_prop2(const BoundInputs& in);
// Grouped form: C = |G|, gamma = 1, norm = ||beta||_{1,G}.
double bound_prop4(const BoundInputs& in);

// Input builders for a comparator beta on a given dataset. complexity and
// norm1 are the sparse, penalized, or grouped versions respectively.
BoundInputs make_bound_inputs_spa(const Dataset& data, const Eigen::VectorXd& beta, double sigma2);
BoundInputs make_bound_inputs_ssa(const Dataset& data, const Eigen::VectorXd& beta, double sigma2,
                                  const PenaltySpec& penalty, double gamma);
BoundInputs make_bound_inputs_gsa(const Dataset& data, const Eigen::VectorXd& beta, double sigma2,
                                  const GroupStructure& groups);

}  // namespace spagg
