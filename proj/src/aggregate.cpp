#include "spagg/aggregate.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "spagg/parallel.hpp"
#include "spagg/rng.hpp"

namespace spagg {

namespace {

void check_config(const Dataset& data, const ChainConfig& config) {
  if (config.iterations < 1) throw std::invalid_argument("chain needs at least one iteration");
  if (config.burn_in < 0 || config.burn_in >= config.iterations) {
    throw std::invalid_argument("burn-in must satisfy 0 <= T0 < T");
  }
  if (config.sigma2 <= 0.0) throw std::invalid_argument("working noise variance must be positive");
  if (config.prior.m != data.m()) throw std::invalid_argument("prior M does not match data");
  if (config.walk == WalkKind::group && !config.prior.groups) {
    throw std::invalid_argument("group walk needs a gsa prior with groups");
  }
}

double log_fit_weight(double error, int count, double sigma2) {
  return -error / (4.0 * sigma2) - static_cast<double>(count) / 2.0;
}

}  // namespace

AggregateFit exact_aggregate(const Dataset& data, const PriorSpec& prior, double sigma2) {
  if (sigma2 <= 0.0) throw std::invalid_argument("sigma2 must be positive");
  if (prior.m != data.m()) throw std::invalid_argument("prior M does not match data");

  // Enumerate the prior's support: all patterns for spa/ssa, unions of
  // groups for gsa (everything else has zero mass).
  std::vector<SparsityPattern> patterns;
  if (prior.variant == PriorVariant::gsa) {
    const auto& groups = *prior.groups;
    if (groups.group_count() > 20) {
      throw std::invalid_argument("exact aggregation budget exceeded: |G| > 20");
    }
    std::unordered_map<SparsityPattern, char, PatternHash> seen;
    const std::uint64_t total = std::uint64_t{1} << groups.group_count();
    for (std::uint64_t bits = 0; bits < total; ++bits) {
      std::vector<int> selected;
      for (int gi = 0; gi < groups.group_count(); ++gi) {
        if ((bits >> gi) & 1u) selected.push_back(gi);
      }
      SparsityPattern p = group_union_pattern(selected, groups);
      if (seen.emplace(p, 1).second) patterns.push_back(std::move(p));
    }
  } else {
    if (data.m() > 20) {
      throw std::invalid_argument("exact aggregation budget exceeded: M > 20");
    }
    const std::uint64_t total = std::uint64_t{1} << data.m();
    patterns.reserve(total);
    for (std::uint64_t bits = 0; bits < total; ++bits) {
      SparsityPattern p(data.m());
      for (int i = 0; i < data.m(); ++i) {
        if ((bits >> i) & 1u) p.set(i, true);
      }
      patterns.push_back(std::move(p));
    }
  }

  std::vector<double> log_w;
  std::vector<RestrictedFit> fits;
  log_w.reserve(patterns.size());
  fits.reserve(patterns.size());
  std::vector<SparsityPattern> kept;
  kept.reserve(patterns.size());
  for (auto& p : patterns) {
    const double lp = log_prior_unnormalized(p, prior);
    if (lp == kNegInf) continue;
    RestrictedFit fit = restricted_ols(data, p);
    log_w.push_back(log_fit_weight(fit.error, p.count(), sigma2) + lp);
    fits.push_back(std::move(fit));
    kept.push_back(std::move(p));
  }
  if (kept.empty()) throw std::runtime_error("prior puts zero mass on every pattern");

  const double shift = *std::max_element(log_w.begin(), log_w.end());
  double total_w = 0.0;
  for (double lw : log_w) total_w += std::exp(lw - shift);
  const double log_norm = shift + std::log(total_w);

  AggregateFit out;
  out.beta = Eigen::VectorXd::Zero(data.m());
  out.selection_freq = Eigen::VectorXd::Zero(data.m());
  out.visited = static_cast<long>(kept.size());
  out.acceptance_rate = 1.0;
  out.log_weights.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const double lw = log_w[i] - log_norm;
    const double w = std::exp(lw);
    out.beta += w * fits[i].beta;
    for (int j : kept[i].support()) out.selection_freq[j] += w;
    out.log_weights.emplace(kept[i], lw);
  }
  for (int j = 0; j < data.m(); ++j) {
    out.selection_freq[j] = std::min(1.0, std::max(0.0, out.selection_freq[j]));
  }
  return out;
}

AggregateFit metropolis_run(const Dataset& data, const ChainConfig& config,
                            std::vector<ChainTraceRow>* trace) {
  check_config(data, config);
  const PriorSpec& prior = config.prior;
  const double sigma2 = config.sigma2;
  const long t_total = config.iterations;
  const long t_burn = config.burn_in;

  std::mt19937_64 rng(config.seed);
  IncrementalOls engine(data, config.refit_interval);

  // group-walk state: which groups are currently toggled on
  std::vector<char> group_on;
  int groups_on = 0;
  if (config.walk == WalkKind::group) {
    group_on.assign(static_cast<std::size_t>(prior.groups->group_count()), 0);
  }

  AggregateFit out;
  out.beta = Eigen::VectorXd::Zero(data.m());
  out.selection_freq = Eigen::VectorXd::Zero(data.m());
  std::unordered_map<SparsityPattern, char, PatternHash> distinct;
  distinct.emplace(engine.pattern(), 1);

  double log_prior_p = 0.0;  // empty pattern: k = 0
  long accepted = 0;
  const long window = t_total - t_burn;

  // Evaluates the prior of a proposed pattern. Group walks use the exact
  // min cover when in budget, otherwise the number of selected groups.
  auto proposal_log_prior = [&](const SparsityPattern& q, int groups_on_q) {
    if (config.walk != WalkKind::group) return log_prior_unnormalized(q, prior);
    Complexity k = complexity(q, prior);
    if (!k.exact) {
      k.value = static_cast<double>(groups_on_q);
      out.gsa_complexity_exact = false;
    }
    return log_prior_unnormalized_with_complexity(q, prior, k);
  };

  for (long t = 1; t <= t_total; ++t) {
    if (t > t_burn) {
      out.beta += engine.beta();
      for (int j : engine.pattern().support()) out.selection_freq[j] += 1.0;
      ++out.visit_counts[engine.pattern()];
    }
    if (trace) {
      trace->push_back({t, engine.pattern().count(), engine.error(), false});
    }
    if (t == t_total) break;

    bool accepted_step = false;
    if (config.walk == WalkKind::covariate) {
      const int i = uniform_int(rng, data.m());
      SparsityPattern q = engine.pattern();
      q.flip(i);
      const double log_prior_q = proposal_log_prior(q, 0);
      if (log_prior_q != kNegInf) {
        const double error_p = engine.error();
        const double error_q = engine.error_if_flipped(i);
        const double log_ratio = (error_p - error_q) / (4.0 * sigma2) +
                                 static_cast<double>(engine.pattern().count() - q.count()) / 2.0 +
                                 (log_prior_q - log_prior_p);
        const double u = uniform01(rng);
        if (std::log(u) < log_ratio) {
          engine.flip(i);
          log_prior_p = log_prior_q;
          accepted_step = true;
        }
      }
    } else {
      const int gi = uniform_int(rng, prior.groups->group_count());
      const int groups_on_q = groups_on + (group_on[static_cast<std::size_t>(gi)] ? -1 : 1);
      // target pattern after toggling group gi
      std::vector<int> selected;
      selected.reserve(static_cast<std::size_t>(groups_on_q));
      for (int g = 0; g < prior.groups->group_count(); ++g) {
        const bool on = g == gi ? !group_on[static_cast<std::size_t>(g)]
                                : group_on[static_cast<std::size_t>(g)] != 0;
        if (on) selected.push_back(g);
      }
      const SparsityPattern q = group_union_pattern(selected, *prior.groups);
      const double log_prior_q = proposal_log_prior(q, groups_on_q);
      if (log_prior_q != kNegInf) {
        // apply the diff, evaluate, then roll back on rejection
        std::vector<int> flips;
        for (int j = 0; j < data.m(); ++j) {
          if (q.test(j) != engine.pattern().test(j)) flips.push_back(j);
        }
        const double error_p = engine.error();
        const int count_p = engine.pattern().count();
        for (int j : flips) engine.flip(j);
        const double error_q = engine.error();
        const double log_ratio = (error_p - error_q) / (4.0 * sigma2) +
                                 static_cast<double>(count_p - q.count()) / 2.0 +
                                 (log_prior_q - log_prior_p);
        const double u = uniform01(rng);
        if (std::log(u) < log_ratio) {
          group_on[static_cast<std::size_t>(gi)] = group_on[static_cast<std::size_t>(gi)] ? 0 : 1;
          groups_on = groups_on_q;
          log_prior_p = log_prior_q;
          accepted_step = true;
        } else {
          for (auto it = flips.rbegin(); it != flips.rend(); ++it) engine.flip(*it);
        }
      }
    }
    if (accepted_step) {
      ++accepted;
      distinct.emplace(engine.pattern(), 1);
      if (trace) trace->back().accepted = true;
    }
  }

  out.beta /= static_cast<double>(window);
  out.selection_freq /= static_cast<double>(window);
  const long proposals = t_total - 1;
  out.acceptance_rate =
      proposals > 0 ? static_cast<double>(accepted) / static_cast<double>(proposals) : 0.0;
  out.visited = static_cast<long>(distinct.size());
  if (config.selection_threshold > 0.0) {
    for (int j = 0; j < data.m(); ++j) {
      if (out.selection_freq[j] < config.selection_threshold) out.beta[j] = 0.0;
    }
  }
  return out;
}

namespace {

struct DeltaRun {
  Sigma2Estimate::Evaluation eval;
  AggregateFit fit;
};

DeltaRun run_at_delta(const Dataset& data, const ChainConfig& config_template, double delta,
                      std::uint64_t seed) {
  ChainConfig cfg = config_template;
  cfg.sigma2 = delta;
  cfg.seed = seed;
  DeltaRun run;
  run.fit = metropolis_run(data, cfg);
  const int n = data.n();
  int m_n = 0;  // M_n(beta): entries with |beta_j| > 1/n
  for (int j = 0; j < data.m(); ++j) {
    if (std::abs(run.fit.beta[j]) > 1.0 / static_cast<double>(n)) ++m_n;
  }
  run.eval.delta = delta;
  run.eval.usable = n - m_n > 0;
  run.eval.s_value = run.eval.usable
                         ? (data.y() - data.x() * run.fit.beta).squaredNorm() /
                               static_cast<double>(n - m_n)
                         : std::numeric_limits<double>::quiet_NaN();
  return run;
}

}  // namespace

Sigma2Estimate estimate_sigma2(const Dataset& data, const ChainConfig& config_template,
                               double alpha, const std::vector<double>& grid, int jobs) {
  if (grid.empty()) throw std::invalid_argument("sigma2 grid must be nonempty");
  if (alpha <= 0.0) throw std::invalid_argument("tolerance alpha must be positive");

  Sigma2Estimate out;
  out.evaluations.resize(grid.size());
  parallel_for_index(static_cast<int>(grid.size()), jobs, [&](int i) {
    out.evaluations[static_cast<std::size_t>(i)] =
        run_at_delta(data, config_template, grid[static_cast<std::size_t>(i)],
                     derive_seed(config_template.seed, static_cast<std::uint64_t>(i) + 1))
            .eval;
  });

  for (const auto& eval : out.evaluations) {
    if (!eval.usable) continue;
    if (std::abs(eval.s_value - eval.delta) <= alpha) {
      out.sigma2 = eval.delta;
      out.converged = true;
      return out;
    }
  }
  // fallback: closest discrepancy, flagged
  out.converged = false;
  double best_gap = std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& eval : out.evaluations) {
    if (!eval.usable) continue;
    const double gap = std::abs(eval.s_value - eval.delta);
    if (gap < best_gap) {
      best_gap = gap;
      out.sigma2 = eval.delta;
      any = true;
    }
  }
  if (!any) throw std::runtime_error("every grid point had n - M_n <= 0");
  return out;
}

TwoStageResult estimate_sigma2_two_stage(const Dataset& data, const ChainConfig& config_template,
                                         std::optional<double> pilot) {
  TwoStageResult out;
  if (pilot) {
    out.pilot = *pilot;
  } else {
    const double mean = data.y().mean();
    out.pilot = (data.y().array() - mean).square().sum() / std::max(1, data.n() - 1);
  }
  if (out.pilot <= 0.0) out.pilot = 1e-12;

  const DeltaRun first =
      run_at_delta(data, config_template, out.pilot, derive_seed(config_template.seed, 1));
  out.usable = first.eval.usable;
  out.sigma2 = out.usable ? std::max(first.eval.s_value, 1e-12) : out.pilot;

  const DeltaRun second =
      run_at_delta(data, config_template, out.sigma2, derive_seed(config_template.seed, 2));
  out.fit = second.fit;
  return out;
}

}  // namespace spagg
