#include <doctest.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "cli_app.hpp"
#include "spagg/dataset.hpp"
#include "spagg/json_io.hpp"

using namespace spagg;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path source_root() {
#ifdef SPAGG_SOURCE_DIR
  const fs::path configured(SPAGG_SOURCE_DIR);
  if (fs::exists(configured / "data" / "demo.csv")) return configured;
#endif
  // fallback for running the binary by hand: walk up from the cwd
  fs::path p = fs::current_path();
  while (!fs::exists(p / "data" / "demo.csv")) {
    if (p == p.root_path()) throw std::runtime_error("cannot locate the repo root");
    p = p.parent_path();
  }
  return p;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           fs::path("spagg_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

void write(const fs::path& p, const std::string& text) { write_text_file(p.string(), text); }

json read_json(const fs::path& p) { return json::parse(read_text_file(p.string())); }

}  // namespace

TEST_CASE("csv ingestion") {
  TempDir tmp;
  const fs::path with_header = tmp.path / "a.csv";
  write(with_header, "a,b,resp\n1,2,3\n4,5,6\n7,8,9\n");
  const Dataset d1 = load_csv(with_header.string());
  CHECK(d1.n() == 3);
  CHECK(d1.m() == 2);
  CHECK(d1.y()[1] == 6.0);  // last column by default

  const Dataset d2 = load_csv(with_header.string(), "b");
  CHECK(d2.y()[0] == 2.0);
  CHECK(d2.x()(0, 1) == 3.0);

  const fs::path headerless = tmp.path / "b.csv";
  write(headerless, "1,2,3\n4,5,6\n");
  const Dataset d3 = load_csv(headerless.string());
  CHECK(d3.n() == 2);
  CHECK(d3.m() == 2);
  CHECK_THROWS_AS(load_csv(headerless.string(), "resp"), ConfigError);  // no header to name

  const fs::path bad = tmp.path / "c.csv";
  write(bad, "a,b\n1,nan\n");
  CHECK_THROWS_AS(load_csv(bad.string()), ConfigError);
  write(bad, "a,b\n1,inf\n");
  CHECK_THROWS_AS(load_csv(bad.string()), ConfigError);
  write(bad, "a,b\n1,2\n3\n");
  CHECK_THROWS_AS(load_csv(bad.string()), ConfigError);  // ragged
  CHECK_THROWS_AS(load_csv((tmp.path / "missing.csv").string()), ConfigError);
  CHECK_THROWS_AS(load_csv(with_header.string(), "nope"), ConfigError);
}

TEST_CASE("penalty and group specs parse with 1-based indices") {
  const PenaltySpec clusters = parse_penalty_json(
      R"({"variant": "clusters", "h": 3.0, "positions": [[1],[2],[3],[4]]})", 4);
  CHECK(clusters.variant() == PenaltyVariant::clusters);
  CHECK(clusters.threshold() == 3.0);

  const PenaltySpec weights = parse_penalty_json(R"({"variant": "weights", "c": [0.1,0.2,0.3]})", 3);
  CHECK(weights(SparsityPattern::from_indices(3, {0, 2})) == doctest::Approx(0.4));

  const PenaltySpec dag = parse_penalty_json(
      R"({"variant": "dag", "edges": [[1,2],[2,3]], "strong_hierarchy": true})", 3);
  CHECK(dag.strong_hierarchy());
  CHECK(dag(SparsityPattern::from_indices(3, {2})) == 2.0);  // file node 3 has ancestors 1,2

  const PenaltySpec cut = parse_penalty_json(
      R"({"variant": "cut", "distance_matrix": [[0,1],[1,0]]})", 2);
  CHECK(cut(SparsityPattern::from_indices(2, {0})) == 1.0);

  CHECK_THROWS_AS(parse_penalty_json(R"({"variant": "nope"})", 3), ConfigError);
  CHECK_THROWS_AS(parse_penalty_json(R"({"variant": "clusters", "positions": [[1]]})", 1),
                  ConfigError);  // missing h
  CHECK_THROWS_AS(parse_penalty_json("not json", 3), ConfigError);
  CHECK_THROWS_AS(parse_penalty_json(R"({"variant": "weights", "c": [9,9,9]})", 3), ConfigError);

  const GroupStructure groups = parse_groups_json(R"({"groups": [[1,2],[2,3],[3,4]]})", 4);
  CHECK(groups.group_count() == 3);
  CHECK(groups.group(0) == std::vector<int>{0, 1});
  CHECK_THROWS_AS(parse_groups_json(R"({"groups": [[1,2]]})", 4), ConfigError);  // no cover
  CHECK_THROWS_AS(parse_groups_json(R"({"groups": [[0,1]]})", 2), ConfigError);  // 0 is not 1-based
}

TEST_CASE("config files: key = value with comments and overrides") {
  const auto cfg = parse_config_text("# chain settings\niterations = 500\n\nseed=9 # inline\n");
  CHECK(cfg.at("iterations") == "500");
  CHECK(cfg.at("seed") == "9");
  CHECK_THROWS_AS(parse_config_text("evil line\n"), ConfigError);
}

TEST_CASE("cli: missing data file exits 1 and names the path") {
  CHECK(run_cli({"fit", "--data", "/no/such/file.csv", "--sigma2", "1"}) == 1);
  CHECK(run_cli({"bogus-command"}) == 1);
}

TEST_CASE("cli fit: deterministic output and ssa penalty path") {
  TempDir tmp;
  const fs::path demo = source_root() / "data" / "demo.csv";
  const fs::path penalty = tmp.path / "clusters.json";
  write(penalty,
        R"({"variant": "clusters", "h": 1.0, "positions": [[1],[2],[3],[4],[5],[6],[7],[8]]})");

  const fs::path out1 = tmp.path / "run1";
  const std::vector<std::string> args = {
      "fit",       "--data", demo.string(), "--sigma2", "0.25",         "--seed",
      "42",        "--prior", "ssa",        "--penalty", penalty.string(), "--h",
      "3",         "--iterations", "2000",  "--burn_in", "500",         "--trace",
      "--out",     out1.string()};
  REQUIRE(run_cli(args) == 0);
  json j1 = read_json(out1 / "fit.json");
  REQUIRE(run_cli(args) == 0);  // rerun in place
  json j2 = read_json(out1 / "fit.json");
  CHECK(j1["beta"].size() == 8);
  CHECK(j1["selection_freq"].size() == 8);
  CHECK(j1["config"]["h"] == "3");  // the override is echoed
  CHECK(j1["config"]["prior"] == "ssa");
  CHECK(j1["sigma2_estimated"] == false);
  j1.erase("wall_time_sec");
  j2.erase("wall_time_sec");
  CHECK(j1 == j2);

  // trace has one row per iteration
  const std::string trace = read_text_file((out1 / "trace.csv").string());
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 2001);
  CHECK(trace.rfind("iteration,count,error,accepted", 0) == 0);

  // a config file reproduces the same run through the embedded settings
  const fs::path cfg_file = tmp.path / "run.cfg";
  std::string cfg_text;
  for (const auto& [k, v] : j1["config"].get<std::map<std::string, std::string>>()) {
    if (k == "out" || k == "trace") continue;
    cfg_text += k + " = " + v + "\n";
  }
  write(cfg_file, cfg_text);
  const fs::path out3 = tmp.path / "run3";
  REQUIRE(run_cli({"fit", "--config", cfg_file.string(), "--out", out3.string()}) == 0);
  json j3 = read_json(out3 / "fit.json");
  CHECK(j3["beta"] == j1["beta"]);
  CHECK(j3["acceptance_rate"] == j1["acceptance_rate"]);
}

TEST_CASE("cli fit estimates the variance when sigma2 is absent") {
  TempDir tmp;
  const fs::path demo = source_root() / "data" / "demo.csv";
  const fs::path out = tmp.path / "est";
  REQUIRE(run_cli({"fit", "--data", demo.string(), "--seed", "7", "--iterations", "1500",
                   "--burn_in", "400", "--out", out.string()}) == 0);
  const json j = read_json(out / "fit.json");
  CHECK(j["sigma2_estimated"] == true);
  CHECK(j["sigma2_used"].get<double>() > 0.0);
  CHECK(j["sigma2_used"].get<double>() < 2.0);  // true noise variance is 0.25
}

TEST_CASE("cli exact and bounds on the demo data") {
  TempDir tmp;
  const fs::path demo = source_root() / "data" / "demo.csv";
  const fs::path out = tmp.path / "exact";
  REQUIRE(run_cli({"exact", "--data", demo.string(), "--sigma2", "0.25", "--out",
                   out.string()}) == 0);
  const json j = read_json(out / "exact.json");
  CHECK(j["beta"].size() == 8);
  CHECK(j["visited"].get<long>() == 256);
  // the planted covariates 4..6 carry most of the inclusion mass
  CHECK(j["selection_freq"][3].get<double>() > 0.5);
  CHECK(j["selection_freq"][4].get<double>() > 0.5);

  const fs::path beta_file = tmp.path / "beta.json";
  write(beta_file, "[0, 0, 0, 1, -1, 1, 0, 0]");
  const fs::path bout = tmp.path / "bounds";
  REQUIRE(run_cli({"bounds", "--data", demo.string(), "--beta", beta_file.string(), "--sigma2",
                   "0.25", "--out", bout.string()}) == 0);
  const json b = read_json(bout / "bounds.json");
  CHECK(b["prop1"].get<double>() > 0.0);
  CHECK(b["prop2"].get<double>() > 0.0);
  CHECK(b["complexity"].get<double>() == 3.0);
}

TEST_CASE("cli simulate: smoke run and schema") {
  TempDir tmp;
  const fs::path out = tmp.path / "sim";
  REQUIRE(run_cli({"simulate", "--n", "30", "--m", "12", "--clusters", "1", "--cluster_size",
                   "4", "--reps", "1", "--iterations", "400", "--burn_in", "100", "--seed", "5",
                   "--out", out.string()}) == 0);
  const std::string csv = read_text_file((out / "summary.csv").string());
  CHECK(csv.rfind("method,pred_mean,pred_se,rec_mean,rec_se,paired_win", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 methods

  CHECK(run_cli({"simulate", "--geometry", "triangle", "--out", out.string()}) == 1);
}

TEST_CASE("cli check-assumptions") {
  TempDir tmp;
  const fs::path penalty = tmp.path / "weights.json";
  write(penalty, R"({"variant": "weights", "c": [0.3,0.3,0.3,0.3]})");
  CHECK(run_cli({"check-assumptions", "--m", "4", "--prior", "ssa", "--penalty",
                 penalty.string()}) == 0);
  CHECK(run_cli({"check-assumptions", "--prior", "ssa", "--penalty", penalty.string()}) == 1);
}
