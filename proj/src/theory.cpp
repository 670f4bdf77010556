#include "spagg/theory.hpp"

#include <cmath>
#include <stdexcept>

namespace spagg {

namespace {

constexpr double kE = 2.718281828459045235360287;
constexpr double kLog2 = 0.6931471805599453094172321;

void check(const BoundInputs& in) {
  if (in.n < 1 || in.m < 1 || in.rank < 1 || in.scale < 1) {
    throw std::invalid_argument("bound inputs need n, M, R, C >= 1");
  }
  if (in.sigma2 < 0.0) throw std::invalid_argument("sigma2 must be nonnegative");
  if (in.gamma < 1.0) throw std::invalid_argument("gamma must be >= 1");
  if (in.complexity < 0.0) throw std::invalid_argument("complexity must be nonnegative");
}

double complexity_term(const BoundInputs& in) {
  const double n = static_cast<double>(in.n);
  return 9.0 * in.sigma2 * (in.complexity / n) *
         std::log1p(kE * static_cast<double>(in.scale) / std::max(in.complexity, 1.0));
}

double adaptive_bound(const BoundInputs& in) {
  check(in);
  const double n = static_cast<double>(in.n);
  const double rank_term = in.sigma2 * static_cast<double>(in.rank) / n;
  return in.fit_term + std::min(rank_term, complexity_term(in)) + 8.0 * in.sigma2 / n * kLog2;
}

double convex_bound(const BoundInputs& in) {
  check(in);
  const double n = static_cast<double>(in.n);
  const double sigma = std::sqrt(in.sigma2);
  double phi = 0.0;
  if (in.norm1 > 0.0 || in.complexity > 0.0) {
    phi = std::min(in.sigma2 / n, complexity_term(in));
    if (in.norm1 > 0.0) {
      const double norm_term =
          11.0 * sigma * std::sqrt(in.gamma) * in.norm1 / std::sqrt(n) *
          std::sqrt(std::log1p(3.0 * kE * static_cast<double>(in.scale) * sigma /
                               (in.norm1 * std::sqrt(in.gamma * n))));
      phi = std::min(phi, norm_term);
    }
  }
  const double tail =
      in.sigma2 / n * (9.0 * std::log1p(kE * static_cast<double>(in.scale)) + 8.0 * kLog2);
  return in.fit_term + phi + tail;
}

}  // namespace

double bound_prop1(const BoundInputs& in) { return adaptive_bound(in); }
double bound_prop3(const BoundInputs& in) { return adaptive_bound(in); }
double bound_prop2(const BoundInputs& in) { return convex_bound(in); }
double bound_prop4(const BoundInputs& in) { return convex_bound(in); }

namespace {

BoundInputs base_inputs(const Dataset& data, const Eigen::VectorXd& beta, double sigma2) {
  if (beta.size() != data.m()) throw std::invalid_argument("comparator length does not match M");
  BoundInputs in;
  in.fit_term = (data.x() * beta - data.y()).squaredNorm() / static_cast<double>(data.n());
  in.sigma2 = sigma2;
  in.n = data.n();
  in.m = data.m();
  in.rank = design_rank(data);
  return in;
}

SparsityPattern support_pattern(const Eigen::VectorXd& beta) {
  SparsityPattern p(static_cast<int>(beta.size()));
  for (int i = 0; i < beta.size(); ++i) {
    if (beta[i] != 0.0) p.set(i, true);
  }
  return p;
}

}  // namespace

BoundInputs make_bound_inputs_spa(const Dataset& data, const Eigen::VectorXd& beta, double sigma2) {
  BoundInputs in = base_inputs(data, beta, sigma2);
  in.scale = data.m();
  in.gamma = 1.0;
  in.complexity = static_cast<double>(support_pattern(beta).count());
  in.norm1 = beta.lpNorm<1>();
  return in;
}

BoundInputs make_bound_inputs_ssa(const Dataset& data, const Eigen::VectorXd& beta, double sigma2,
                                  const PenaltySpec& penalty, double gamma) {
  BoundInputs in = base_inputs(data, beta, sigma2);
  in.scale = data.m();
  in.gamma = gamma;
  in.complexity = penalized_norm(support_pattern(beta), penalty);
  in.norm1 = beta.lpNorm<1>();
  return in;
}

BoundInputs make_bound_inputs_gsa(const Dataset& data, const Eigen::VectorXd& beta, double sigma2,
                                  const GroupStructure& groups) {
  BoundInputs in = base_inputs(data, beta, sigma2);
  in.scale = groups.group_count();
  in.gamma = 1.0;
  const GroupCoverResult cover = grouped_l0(support_pattern(beta), groups);
  if (!cover.feasible) {
    throw std::invalid_argument("comparator support is not a union of groups");
  }
  in.complexity = static_cast<double>(cover.value);
  in.norm1 = grouped_l1(beta, groups);
  return in;
}

}  // namespace spagg
