#include "cli_app.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "spagg/aggregate.hpp"
#include "spagg/experiments.hpp"
#include "spagg/json_io.hpp"
#include "spagg/rng.hpp"
#include "spagg/theory.hpp"

namespace spagg {

namespace {

using json = nlohmann::json;

// Effective settings: config-file entries overridden by explicit CLI flags.
// Every run embeds this map in its output, so results are reproducible from
// their own files.
class Settings {
 public:
  Settings(std::map<std::string, std::string> from_config,
           std::map<std::string, std::string> from_cli)
      : values_(std::move(from_config)) {
    for (auto& [k, v] : from_cli) values_[k] = v;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback = "") const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::string required(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end() || it->second.empty()) {
      throw ConfigError("missing required setting: " + key);
    }
    return it->second;
  }

  long integer(const std::string& key, long fallback) const {
    if (!has(key)) return fallback;
    try {
      return std::stol(values_.at(key));
    } catch (const std::exception&) {
      throw ConfigError("setting '" + key + "' must be an integer, got '" + values_.at(key) + "'");
    }
  }

  double real(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    try {
      return std::stod(values_.at(key));
    } catch (const std::exception&) {
      throw ConfigError("setting '" + key + "' must be a number, got '" + values_.at(key) + "'");
    }
  }

  bool flag(const std::string& key) const {
    if (!has(key)) return false;
    const std::string& v = values_.at(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("setting '" + key + "' must be a boolean, got '" + v + "'");
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  const std::map<std::string, std::string>& map() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct OptionDef {
  const char* key;
  const char* help;
  bool is_flag = false;
};

// one table per subcommand; keys double as config-file keys
const std::vector<OptionDef> kFitOptions = {
    {"data", "CSV data file"},
    {"response", "response column name (default: last column)"},
    {"out", "output directory (default .)"},
    {"seed", "top-level RNG seed"},
    {"sigma2", "known noise variance; omit to estimate"},
    {"prior", "spa | ssa | gsa"},
    {"penalty", "penalty spec JSON (ssa)"},
    {"groups", "group spec JSON (gsa)"},
    {"h", "override the clusters penalty threshold"},
    {"iterations", "chain length T"},
    {"burn_in", "discarded iterations T0"},
    {"walk", "covariate | group"},
    {"threshold", "zero coefficients below this selection frequency"},
    {"full_prior", "use the non-simplified prior", true},
    {"alpha", "variance-grid tolerance (with grid)"},
    {"grid", "comma-separated sigma2 grid, large to small"},
    {"jobs", "parallel workers for the variance grid"},
    {"trace", "write trace.csv", true},
};

const std::vector<OptionDef> kExactOptions = {
    {"data", "CSV data file"},
    {"response", "response column name"},
    {"out", "output directory"},
    {"sigma2", "known noise variance (required)"},
    {"prior", "spa | ssa | gsa"},
    {"penalty", "penalty spec JSON (ssa)"},
    {"groups", "group spec JSON (gsa)"},
    {"h", "override the clusters penalty threshold"},
    {"full_prior", "use the non-simplified prior", true},
};

const std::vector<OptionDef> kSimulateOptions = {
    {"out", "output directory"},
    {"seed", "top-level RNG seed"},
    {"n", "observations per trial"},
    {"m", "candidate covariates"},
    {"clusters", "number of clusters C"},
    {"cluster_size", "nonzeros per cluster C_on"},
    {"sigma", "noise sd (default C*C_on/9)"},
    {"geometry", "line | lattice"},
    {"lattice_width", "lattice width (default sqrt(M))"},
    {"reps", "number of repetitions"},
    {"iterations", "chain length T"},
    {"burn_in", "discarded iterations T0"},
    {"h", "clusters penalty threshold"},
    {"jobs", "parallel workers over reps"},
};

const std::vector<OptionDef> kVarianceOptions = {
    {"data", "CSV data file"},
    {"response", "response column name"},
    {"out", "output directory"},
    {"seed", "top-level RNG seed"},
    {"prior", "spa | ssa | gsa"},
    {"penalty", "penalty spec JSON (ssa)"},
    {"groups", "group spec JSON (gsa)"},
    {"h", "override the clusters penalty threshold"},
    {"iterations", "chain length T"},
    {"burn_in", "discarded iterations T0"},
    {"walk", "covariate | group"},
    {"alpha", "grid tolerance"},
    {"grid", "comma-separated sigma2 grid, large to small"},
    {"pilot", "two-stage pilot variance (default: sample variance of y)"},
    {"jobs", "parallel workers over grid points"},
};

const std::vector<OptionDef> kCheckOptions = {
    {"m", "number of covariates (required without data)"},
    {"rank", "design rank R (default M)"},
    {"prior", "ssa | gsa"},
    {"penalty", "penalty spec JSON (ssa)"},
    {"groups", "group spec JSON (gsa)"},
    {"h", "override the clusters penalty threshold"},
    {"samples", "random patterns to check instead of an exhaustive scan"},
    {"seed", "seed for sampled patterns"},
};

const std::vector<OptionDef> kBoundsOptions = {
    {"data", "CSV data file"},
    {"response", "response column name"},
    {"out", "output directory"},
    {"beta", "comparator coefficients, JSON array file (original units)"},
    {"sigma2", "noise variance (required)"},
    {"prior", "spa | ssa | gsa"},
    {"penalty", "penalty spec JSON (ssa)"},
    {"groups", "group spec JSON (gsa)"},
    {"h", "override the clusters penalty threshold"},
    {"gamma", "gamma for the penalized convex bound (default: derived)"},
};

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    try {
      grid.push_back(std::stod(token));
    } catch (const std::exception&) {
      throw ConfigError("grid entry is not a number: '" + token + "'");
    }
  }
  if (grid.empty()) throw ConfigError("grid is empty");
  return grid;
}

PenaltySpec build_penalty(const Settings& s, int m) {
  const std::string path = s.required("penalty");
  std::string text = read_text_file(path);
  if (s.has("h")) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("malformed JSON in " + path);
    j["h"] = s.real("h", 3.0);
    text = j.dump();
  }
  return parse_penalty_json(text, m);
}

PriorSpec build_prior(const Settings& s, int m, int rank) {
  const std::string variant = s.str("prior", "spa");
  const bool simplified = !s.flag("full_prior");
  switch (prior_variant_from_name(variant)) {
    case PriorVariant::spa:
      return PriorSpec::spa(m, rank, simplified);
    case PriorVariant::ssa:
      return PriorSpec::ssa(m, rank, build_penalty(s, m), simplified);
    case PriorVariant::gsa:
      return PriorSpec::gsa(m, rank, load_groups_json(s.required("groups"), m), simplified);
  }
  throw ConfigError("unknown prior variant");
}

ChainConfig build_chain_config(const Settings& s, const Dataset& data, int rank) {
  ChainConfig cfg;
  cfg.iterations = s.integer("iterations", 7000);
  cfg.burn_in = s.integer("burn_in", 3000);
  cfg.seed = static_cast<std::uint64_t>(s.integer("seed", 0));
  cfg.sigma2 = s.real("sigma2", 1.0);
  const std::string walk = s.str("walk", "covariate");
  if (walk == "covariate") {
    cfg.walk = WalkKind::covariate;
  } else if (walk == "group") {
    cfg.walk = WalkKind::group;
  } else {
    throw ConfigError("walk must be covariate or group, got '" + walk + "'");
  }
  cfg.selection_threshold = s.real("threshold", 0.0);
  cfg.prior = build_prior(s, data.m(), rank);
  return cfg;
}

std::filesystem::path out_dir(const Settings& s) {
  const std::filesystem::path dir = s.str("out", ".");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw ConfigError("output directory is not writable: " + dir.string());
  }
  return dir;
}

int cmd_fit(const Settings& s) {
  const auto dir = out_dir(s);
  const auto started = std::chrono::steady_clock::now();
  const Dataset raw = load_csv(s.required("data"), s.str("response"));
  auto [data, report] = normalize_columns(raw);
  const int rank = design_rank(data);
  ChainConfig cfg = build_chain_config(s, data, rank);

  AggregateFit fit;
  json extra;
  std::vector<ChainTraceRow> trace;
  std::vector<ChainTraceRow>* trace_ptr = s.flag("trace") ? &trace : nullptr;
  if (s.has("sigma2")) {
    fit = metropolis_run(data, cfg, trace_ptr);
    extra["sigma2_used"] = cfg.sigma2;
    extra["sigma2_estimated"] = false;
  } else if (s.has("grid")) {
    const Sigma2Estimate est = estimate_sigma2(data, cfg, s.real("alpha", 0.1),
                                               parse_grid(s.required("grid")),
                                               static_cast<int>(s.integer("jobs", 1)));
    cfg.sigma2 = est.sigma2;
    cfg.seed = derive_seed(cfg.seed, 1000003);  // distinct from the grid streams
    fit = metropolis_run(data, cfg, trace_ptr);
    extra["sigma2_used"] = est.sigma2;
    extra["sigma2_estimated"] = true;
    extra["sigma2_converged"] = est.converged;
  } else {
    TwoStageResult est = estimate_sigma2_two_stage(data, cfg);
    fit = est.fit;
    if (trace_ptr) {
      ChainConfig final_cfg = cfg;
      final_cfg.sigma2 = est.sigma2;
      final_cfg.seed = derive_seed(cfg.seed, 2);
      metropolis_run(data, final_cfg, trace_ptr);
    }
    extra["sigma2_used"] = est.sigma2;
    extra["sigma2_estimated"] = true;
    extra["sigma2_pilot"] = est.pilot;
  }

  fit.beta = rescale_coefficients(fit.beta, report);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  json j = json::parse(fit_to_json(fit, s.map(), report.scales, wall,
                                  static_cast<std::uint64_t>(s.integer("seed", 0))));
  for (auto& [k, v] : extra.items()) j[k] = v;
  write_text_file((dir / "fit.json").string(), j.dump(2) + "\n");
  if (trace_ptr) write_text_file((dir / "trace.csv").string(), trace_to_csv(trace));
  std::cout << "wrote " << (dir / "fit.json").string() << "\n";
  return 0;
}

int cmd_exact(const Settings& s) {
  const auto dir = out_dir(s);
  const auto started = std::chrono::steady_clock::now();
  const Dataset raw = load_csv(s.required("data"), s.str("response"));
  auto [data, report] = normalize_columns(raw);
  const int rank = design_rank(data);
  if (!s.has("sigma2")) throw ConfigError("exact aggregation needs --sigma2");
  const PriorSpec prior = build_prior(s, data.m(), rank);
  AggregateFit fit = exact_aggregate(data, prior, s.real("sigma2", 1.0));
  fit.beta = rescale_coefficients(fit.beta, report);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_text_file((dir / "exact.json").string(),
                  fit_to_json(fit, s.map(), report.scales, wall, 0));
  std::cout << "wrote " << (dir / "exact.json").string() << "\n";
  return 0;
}

int cmd_simulate(const Settings& s) {
  const auto dir = out_dir(s);
  SimSpec spec;
  spec.n = static_cast<int>(s.integer("n", 100));
  spec.m = static_cast<int>(s.integer("m", 100));
  spec.clusters = static_cast<int>(s.integer("clusters", 1));
  spec.cluster_size = static_cast<int>(s.integer("cluster_size", 9));
  spec.sigma = s.real("sigma", -1.0);
  spec.geometry = geometry_from_name(s.str("geometry", "line"));
  spec.lattice_width = static_cast<int>(s.integer("lattice_width", 0));
  spec.reps = static_cast<int>(s.integer("reps", 250));
  spec.seed = static_cast<std::uint64_t>(s.integer("seed", 0));
  spec.iterations = s.integer("iterations", 7000);
  spec.burn_in = s.integer("burn_in", 3000);
  spec.h = s.real("h", 3.0);

  const ComparisonSummary summary =
      run_comparison(spec, {Method::spa, Method::ssa, Method::stepwise},
                     static_cast<int>(s.integer("jobs", 1)));
  write_text_file((dir / "summary.csv").string(), summary_csv(summary));
  std::cout << summary_table(summary);
  std::cout << "wrote " << (dir / "summary.csv").string() << "\n";
  return 0;
}

int cmd_estimate_variance(const Settings& s) {
  const auto dir = out_dir(s);
  const Dataset raw = load_csv(s.required("data"), s.str("response"));
  auto [data, report] = normalize_columns(raw);
  const int rank = design_rank(data);
  const ChainConfig cfg = build_chain_config(s, data, rank);

  json j;
  j["config"] = s.map();
  if (s.has("grid")) {
    const Sigma2Estimate est =
        estimate_sigma2(data, cfg, s.real("alpha", 0.1), parse_grid(s.required("grid")),
                        static_cast<int>(s.integer("jobs", 1)));
    j["sigma2"] = est.sigma2;
    j["converged"] = est.converged;
    json evals = json::array();
    for (const auto& e : est.evaluations) {
      evals.push_back({{"delta", e.delta}, {"s_value", e.usable ? e.s_value : -1.0},
                       {"usable", e.usable}});
    }
    j["evaluations"] = evals;
  } else {
    std::optional<double> pilot;
    if (s.has("pilot")) pilot = s.real("pilot", 1.0);
    const TwoStageResult est = estimate_sigma2_two_stage(data, cfg, pilot);
    j["sigma2"] = est.sigma2;
    j["pilot"] = est.pilot;
    j["converged"] = est.usable;
  }
  write_text_file((dir / "sigma2.json").string(), j.dump(2) + "\n");
  std::cout << "sigma2 = " << j["sigma2"].get<double>() << "\n";
  return 0;
}

int cmd_check_assumptions(const Settings& s) {
  const int m = static_cast<int>(s.integer("m", 0));
  if (m < 1) throw ConfigError("check-assumptions needs --m");
  const int rank = static_cast<int>(s.integer("rank", m));
  const std::string variant = s.str("prior", "ssa");

  AssumptionReport report;
  if (variant == "ssa") {
    const PriorSpec prior = PriorSpec::ssa(m, rank, build_penalty(s, m));
    if (s.has("samples")) {
      std::mt19937_64 rng(static_cast<std::uint64_t>(s.integer("seed", 0)));
      std::vector<SparsityPattern> patterns;
      const long count = s.integer("samples", 1000);
      for (long i = 0; i < count; ++i) {
        SparsityPattern p(m);
        for (int b = 0; b < m; ++b) {
          if (uniform01(rng) < 0.5) p.set(b, true);
        }
        patterns.push_back(std::move(p));
      }
      report = check_assumption_penalized(prior, patterns);
    } else {
      report = check_assumption_penalized_exhaustive(prior);
    }
  } else if (variant == "gsa") {
    const PriorSpec prior = PriorSpec::gsa(m, rank, load_groups_json(s.required("groups"), m));
    report = check_assumption_grouped(prior);
  } else {
    throw ConfigError("check-assumptions supports ssa or gsa priors");
  }

  std::cout << "patterns checked:     " << report.patterns_checked << "\n"
            << "assumption holds:     " << (report.assumption_holds ? "yes" : "NO") << "\n"
            << "sufficient condition: " << (report.sufficient_condition ? "yes" : "NO") << "\n"
            << report.note << "\n";
  auto print_violators = [&](const char* label, const std::vector<SparsityPattern>& violators) {
    if (violators.empty()) return;
    std::cout << label << " (" << violators.size() << " patterns, showing up to 10):\n";
    for (std::size_t i = 0; i < violators.size() && i < 10; ++i) {
      std::cout << "  {";
      bool first = true;
      for (int idx : violators[i].support()) {
        std::cout << (first ? "" : ",") << idx + 1;
        first = false;
      }
      std::cout << "}\n";
    }
  };
  print_violators("assumption violators", report.assumption_violators);
  print_violators("sufficient-condition violators", report.sufficient_violators);
  return 0;
}

int cmd_bounds(const Settings& s) {
  const auto dir = out_dir(s);
  const Dataset raw = load_csv(s.required("data"), s.str("response"));
  auto [data, report] = normalize_columns(raw);
  if (!s.has("sigma2")) throw ConfigError("bounds need --sigma2");
  const double sigma2 = s.real("sigma2", 1.0);

  const std::string beta_path = s.required("beta");
  const json jb = json::parse(read_text_file(beta_path), nullptr, false);
  if (jb.is_discarded() || !jb.is_array()) {
    throw ConfigError("comparator file must be a JSON array: " + beta_path);
  }
  if (static_cast<int>(jb.size()) != data.m()) {
    throw ConfigError("comparator length does not match the number of covariates");
  }
  Eigen::VectorXd beta(data.m());
  for (int i = 0; i < data.m(); ++i) beta[i] = jb.at(static_cast<std::size_t>(i)).get<double>();
  // comparator arrives in original units; move it to the normalized design
  for (int i = 0; i < data.m(); ++i) beta[i] *= report.scales[static_cast<std::size_t>(i)];

  const std::string variant = s.str("prior", "spa");
  json j;
  j["config"] = s.map();
  if (variant == "gsa") {
    const GroupStructure groups = load_groups_json(s.required("groups"), data.m());
    const BoundInputs in = make_bound_inputs_gsa(data, beta, sigma2, groups);
    j["prop3"] = bound_prop3(in);
    j["prop4"] = bound_prop4(in);
    j["complexity"] = in.complexity;
    j["grouped_l1"] = in.norm1;
    j["fit_term"] = in.fit_term;
  } else {
    BoundInputs in;
    if (variant == "ssa") {
      const PenaltySpec penalty = build_penalty(s, data.m());
      const double gamma = s.has("gamma") ? s.real("gamma", 1.0) : penalty_gamma(penalty);
      in = make_bound_inputs_ssa(data, beta, sigma2, penalty, gamma);
    } else {
      in = make_bound_inputs_spa(data, beta, sigma2);
    }
    j["prop1"] = bound_prop1(in);
    j["prop2"] = bound_prop2(in);
    j["complexity"] = in.complexity;
    j["l1_norm"] = in.norm1;
    j["gamma"] = in.gamma;
    j["fit_term"] = in.fit_term;
  }
  write_text_file((dir / "bounds.json").string(), j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return 0;
}

void add_options(CLI::App* cmd, const std::vector<OptionDef>& defs,
                 std::map<std::string, std::string>& cli_values) {
  for (const auto& def : defs) {
    const std::string key = def.key;
    if (def.is_flag) {
      cmd->add_flag_callback("--" + key, [&cli_values, key] { cli_values[key] = "true"; },
                             def.help);
    } else {
      cmd->add_option_function<std::string>(
          "--" + key, [&cli_values, key](const std::string& v) { cli_values[key] = v; }, def.help);
    }
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"structured sparse aggregation for linear regression"};
  app.require_subcommand(1);

  std::string config_path;
  std::map<std::string, std::string> cli_values;
  std::string command;

  struct Command {
    const char* name;
    const char* help;
    const std::vector<OptionDef>* options;
    int (*handler)(const Settings&);
  };
  const std::vector<Command> commands = {
      {"fit", "Metropolis fit on CSV data", &kFitOptions, cmd_fit},
      {"exact", "exact aggregation by enumeration (small problems)", &kExactOptions, cmd_exact},
      {"simulate", "paired comparison on synthetic clustered data", &kSimulateOptions,
       cmd_simulate},
      {"estimate-variance", "noise-variance estimation schemes", &kVarianceOptions,
       cmd_estimate_variance},
      {"check-assumptions", "prior-mass assumption checkers", &kCheckOptions,
       cmd_check_assumptions},
      {"bounds", "oracle-inequality bound report for a comparator", &kBoundsOptions, cmd_bounds},
  };

  app.set_help_flag("--help", "print help");  // frees -h/--h for the threshold option
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->set_help_flag("--help", "print help");
    sub->add_option("--config", config_path, "key = value config file; flags override");
    add_options(sub, *c.options, cli_values);
    sub->callback([&command, name = std::string(c.name)] { command = name; });
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    std::map<std::string, std::string> from_config;
    if (!config_path.empty()) from_config = load_config_file(config_path);
    Settings settings(std::move(from_config), std::move(cli_values));
    for (const auto& c : commands) {
      if (command == c.name) return c.handler(settings);
    }
    throw ConfigError("no command selected");
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace spagg
