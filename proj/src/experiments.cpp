#include "spagg/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "spagg/ols.hpp"
#include "spagg/parallel.hpp"
#include "spagg/rng.hpp"

namespace spagg {

Geometry geometry_from_name(const std::string& name) {
  if (name == "line") return Geometry::line;
  if (name == "lattice") return Geometry::lattice;
  throw ConfigError("unknown geometry: " + name + " (expected line or lattice)");
}

std::string geometry_name(Geometry g) { return g == Geometry::line ? "line" : "lattice"; }

int SimSpec::width() const {
  if (geometry != Geometry::lattice) return 0;
  if (lattice_width > 0) {
    if (m % lattice_width != 0) throw std::invalid_argument("M must be a multiple of lattice width");
    return lattice_width;
  }
  const int w = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));
  if (w * w != m) throw std::invalid_argument("M is not square; set lattice width explicitly");
  return w;
}

DistanceSpec trial_distance(const SimSpec& spec) {
  if (spec.geometry == Geometry::line) return DistanceSpec::line_positions(spec.m);
  const int w = spec.width();
  Eigen::MatrixXd points(spec.m, 2);
  for (int i = 0; i < spec.m; ++i) {
    const int row = i / w;
    const int col = i % w;
    points(i, 0) = row;
    points(i, 1) = col;
  }
  return DistanceSpec::from_positions(std::move(points));
}

namespace {

constexpr int kPlacementAttempts = 100000;

// Support of C non-overlapping clusters: contiguous runs on the line,
// square blocks on the lattice. Placements are redrawn until the supports
// are disjoint and the cluster-counting penalty at h sees exactly C.
SparsityPattern place_clusters(const SimSpec& spec, const DistanceSpec& dist,
                               std::mt19937_64& rng) {
  const int c_on = spec.cluster_size;
  int side = 0;
  int w = 1;  // assigned for the lattice; the line path never reads it
  if (spec.geometry == Geometry::lattice) {
    side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(c_on))));
    if (side * side != c_on) {
      throw std::invalid_argument("lattice clusters need a square cluster size");
    }
    w = spec.width();
    if (side > w || side > spec.m / w) {
      throw std::invalid_argument("infeasible cluster placement: block exceeds lattice");
    }
  } else if (c_on > spec.m) {
    throw std::invalid_argument("infeasible cluster placement: run exceeds the line");
  }
  if (spec.clusters * c_on > spec.m) {
    throw std::invalid_argument("infeasible cluster placement: C*C_on > M");
  }

  for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
    SparsityPattern p(spec.m);
    if (spec.geometry == Geometry::line) {
      for (int c = 0; c < spec.clusters; ++c) {
        const int start = uniform_int(rng, spec.m - c_on + 1);
        for (int t = 0; t < c_on; ++t) p.set(start + t, true);
      }
    } else {
      const int rows = spec.m / w;
      for (int c = 0; c < spec.clusters; ++c) {
        const int top = uniform_int(rng, rows - side + 1);
        const int left = uniform_int(rng, w - side + 1);
        for (int r = 0; r < side; ++r) {
          for (int cc = 0; cc < side; ++cc) p.set((top + r) * w + (left + cc), true);
        }
      }
    }
    if (p.count() != spec.clusters * c_on) continue;  // overlap
    if (penalty_clusters(p, dist, spec.h) != spec.clusters) continue;
    return p;
  }
  throw std::invalid_argument("infeasible cluster placement: no valid layout found");
}

}  // namespace

TrialData generate_trial(const SimSpec& spec, int rep) {
  if (spec.n < 1 || spec.m < 1) throw std::invalid_argument("simulation needs n, M >= 1");
  std::mt19937_64 rng(derive_seed(spec.seed, static_cast<std::uint64_t>(rep)));

  Eigen::MatrixXd x(spec.n, spec.m);
  for (int j = 0; j < spec.m; ++j) {
    for (int i = 0; i < spec.n; ++i) x(i, j) = normal(rng);
  }
  Eigen::MatrixXd x_test(spec.n, spec.m);
  for (int j = 0; j < spec.m; ++j) {
    for (int i = 0; i < spec.n; ++i) x_test(i, j) = normal(rng);
  }

  const DistanceSpec dist = trial_distance(spec);
  const SparsityPattern support = place_clusters(spec, dist, rng);
  Eigen::VectorXd beta_true = Eigen::VectorXd::Zero(spec.m);
  for (int i : support.support()) beta_true[i] = uniform01(rng) < 0.5 ? 1.0 : -1.0;

  const double sd = spec.noise_sd();
  Eigen::VectorXd y = x * beta_true;
  for (int i = 0; i < spec.n; ++i) y[i] += sd * normal(rng);
  Eigen::VectorXd y_test = x_test * beta_true;
  for (int i = 0; i < spec.n; ++i) y_test[i] += sd * normal(rng);

  return TrialData{Dataset(std::move(y), std::move(x), sd > 0 ? std::optional<double>(sd * sd)
                                                              : std::nullopt),
                   Dataset(std::move(y_test), std::move(x_test)), std::move(beta_true)};
}

double metric_prediction(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_true,
                         const Eigen::MatrixXd& x_test) {
  if (beta_hat.size() != beta_true.size() || beta_true.size() != x_test.cols()) {
    throw std::invalid_argument("prediction metric shape mismatch");
  }
  return (x_test * (beta_true - beta_hat)).squaredNorm() / static_cast<double>(x_test.rows());
}

double metric_recovery(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_true) {
  if (beta_hat.size() != beta_true.size()) {
    throw std::invalid_argument("recovery metric shape mismatch");
  }
  const double denom = beta_true.squaredNorm();
  if (denom <= 0.0) throw std::invalid_argument("recovery metric needs a nonzero beta_true");
  return (beta_true - beta_hat).squaredNorm() / denom;
}

Eigen::VectorXd forward_stepwise(const Dataset& data, int max_steps) {
  max_steps = std::min(max_steps, std::min(data.n(), data.m()));
  IncrementalOls engine(data);
  const double n = static_cast<double>(data.n());
  const double log_n = std::log(n);
  auto bic = [&](double rss, int k) { return n * std::log(std::max(rss, 1e-300) / n) + k * log_n; };

  double best_bic = bic(engine.error(), 0);
  for (int step = 0; step < max_steps; ++step) {
    int best_j = -1;
    double best_error = std::numeric_limits<double>::infinity();
    for (int j = 0; j < data.m(); ++j) {
      if (engine.pattern().test(j)) continue;
      const double e = engine.error_if_flipped(j);
      if (e < best_error) {
        best_error = e;
        best_j = j;
      }
    }
    if (best_j < 0) break;
    const double candidate_bic = bic(best_error, engine.selected() + 1);
    if (candidate_bic >= best_bic) break;
    engine.flip(best_j);
    best_bic = candidate_bic;
  }
  return engine.beta();
}

std::string method_name(Method m) {
  switch (m) {
    case Method::spa: return "spa";
    case Method::ssa: return "ssa";
    case Method::stepwise: return "stepwise";
  }
  return "?";
}

ComparisonSummary run_comparison(const SimSpec& spec, const std::vector<Method>& methods,
                                 int jobs) {
  if (methods.empty()) throw std::invalid_argument("need at least one method");
  if (spec.reps < 1) throw std::invalid_argument("need at least one rep");
  const int n_methods = static_cast<int>(methods.size());

  ComparisonSummary summary;
  summary.reps = spec.reps;
  summary.prediction.assign(static_cast<std::size_t>(n_methods),
                            std::vector<double>(static_cast<std::size_t>(spec.reps), 0.0));
  summary.recovery = summary.prediction;
  std::vector<std::vector<double>> wall(static_cast<std::size_t>(n_methods),
                                        std::vector<double>(static_cast<std::size_t>(spec.reps), 0.0));

  parallel_for_index(spec.reps, jobs, [&](int rep) {
    const TrialData trial = generate_trial(spec, rep);
    auto [train, report] = normalize_columns(trial.train);
    const int rank = design_rank(train);
    const double sigma2 = spec.noise_sd() > 0 ? spec.noise_sd() * spec.noise_sd() : 1e-12;
    const std::uint64_t rep_seed = derive_seed(spec.seed, static_cast<std::uint64_t>(rep));

    for (int mi = 0; mi < n_methods; ++mi) {
      const Method method = methods[static_cast<std::size_t>(mi)];
      const auto start = std::chrono::steady_clock::now();
      Eigen::VectorXd beta_hat;
      if (method == Method::stepwise) {
        beta_hat = forward_stepwise(trial.train, std::min(spec.n, spec.m));
      } else {
        ChainConfig cfg;
        cfg.iterations = spec.iterations;
        cfg.burn_in = spec.burn_in;
        cfg.sigma2 = sigma2;
        cfg.walk = WalkKind::covariate;
        cfg.seed = derive_seed(rep_seed, static_cast<std::uint64_t>(method) + 1);
        cfg.prior = method == Method::spa
                        ? PriorSpec::spa(spec.m, rank)
                        : PriorSpec::ssa(spec.m, rank,
                                         PenaltySpec::clusters(trial_distance(spec), spec.h));
        const AggregateFit fit = metropolis_run(train, cfg);
        beta_hat = rescale_coefficients(fit.beta, report);
      }
      const auto stop = std::chrono::steady_clock::now();
      summary.prediction[static_cast<std::size_t>(mi)][static_cast<std::size_t>(rep)] =
          metric_prediction(beta_hat, trial.beta_true, trial.test.x());
      summary.recovery[static_cast<std::size_t>(mi)][static_cast<std::size_t>(rep)] =
          metric_recovery(beta_hat, trial.beta_true);
      wall[static_cast<std::size_t>(mi)][static_cast<std::size_t>(rep)] =
          std::chrono::duration<double>(stop - start).count();
    }
  });

  auto mean_se = [&](const std::vector<double>& v, double& mean, double& se) {
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var = v.size() > 1 ? var / static_cast<double>(v.size() - 1) : 0.0;
    se = std::sqrt(var / static_cast<double>(v.size()));
  };

  for (int mi = 0; mi < n_methods; ++mi) {
    MethodSummary ms;
    ms.method = methods[static_cast<std::size_t>(mi)];
    mean_se(summary.prediction[static_cast<std::size_t>(mi)], ms.pred_mean, ms.pred_se);
    mean_se(summary.recovery[static_cast<std::size_t>(mi)], ms.rec_mean, ms.rec_se);
    double total_wall = 0.0;
    for (double t : wall[static_cast<std::size_t>(mi)]) total_wall += t;
    ms.wall_time_sec = total_wall;
    // paired wins against the first method; exact ties count half
    double wins_pred = 0.0, wins_rec = 0.0;
    for (int rep = 0; rep < spec.reps; ++rep) {
      const double dp = summary.prediction[static_cast<std::size_t>(mi)][static_cast<std::size_t>(rep)] -
                        summary.prediction[0][static_cast<std::size_t>(rep)];
      const double dr = summary.recovery[static_cast<std::size_t>(mi)][static_cast<std::size_t>(rep)] -
                        summary.recovery[0][static_cast<std::size_t>(rep)];
      wins_pred += dp < 0.0 ? 1.0 : (dp == 0.0 ? 0.5 : 0.0);
      wins_rec += dr < 0.0 ? 1.0 : (dr == 0.0 ? 0.5 : 0.0);
    }
    ms.paired_win_pred = wins_pred / static_cast<double>(spec.reps);
    ms.paired_win_rec = wins_rec / static_cast<double>(spec.reps);
    summary.methods.push_back(ms);
  }
  return summary;
}

std::string summary_csv(const ComparisonSummary& summary) {
  std::ostringstream out;
  out << "method,pred_mean,pred_se,rec_mean,rec_se,paired_win\n";
  out.precision(10);
  for (const auto& ms : summary.methods) {
    out << method_name(ms.method) << ',' << ms.pred_mean << ',' << ms.pred_se << ','
        << ms.rec_mean << ',' << ms.rec_se << ',' << ms.paired_win_pred << '\n';
  }
  return out.str();
}

std::string summary_table(const ComparisonSummary& summary) {
  std::ostringstream out;
  out << "method      prediction (se)      recovery (se)        win_pred  win_rec  wall_s\n";
  for (const auto& ms : summary.methods) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-10s  %8.4f (%.4f)     %8.4f (%.4f)     %6.3f   %6.3f  %7.1f\n",
                  method_name(ms.method).c_str(), ms.pred_mean, ms.pred_se, ms.rec_mean, ms.rec_se,
                  ms.paired_win_pred, ms.paired_win_rec, ms.wall_time_sec);
    out << line;
  }
  out << "reps: " << summary.reps << "; paired wins are against the first method, ties count half\n";
  return out.str();
}

}  // namespace spagg
