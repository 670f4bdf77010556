#include "spagg/json_io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace spagg {

using json = nlohmann::json;

namespace {

json parse_json(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("malformed JSON in " + what);
  return j;
}

int to_zero_based(int idx, int m, const std::string& what) {
  if (idx < 1 || idx > m) {
    throw ConfigError(what + ": index " + std::to_string(idx) + " outside 1.." + std::to_string(m));
  }
  return idx - 1;
}

DistanceSpec distance_from_json(const json& j, int m, const std::string& what) {
  if (j.contains("positions")) {
    const auto& pos = j.at("positions");
    if (!pos.is_array() || static_cast<int>(pos.size()) != m) {
      throw ConfigError(what + ": positions must list one point per covariate");
    }
    const auto dim = static_cast<Eigen::Index>(pos.at(0).size());
    Eigen::MatrixXd points(m, dim);
    for (int i = 0; i < m; ++i) {
      const auto& row = pos.at(static_cast<std::size_t>(i));
      if (static_cast<Eigen::Index>(row.size()) != dim) {
        throw ConfigError(what + ": ragged positions");
      }
      for (Eigen::Index d = 0; d < dim; ++d) {
        points(i, d) = row.at(static_cast<std::size_t>(d)).get<double>();
      }
    }
    return DistanceSpec::from_positions(std::move(points));
  }
  if (j.contains("distance_matrix")) {
    const auto& mat = j.at("distance_matrix");
    if (static_cast<int>(mat.size()) != m) {
      throw ConfigError(what + ": distance matrix must be M x M");
    }
    Eigen::MatrixXd d(m, m);
    for (int i = 0; i < m; ++i) {
      const auto& row = mat.at(static_cast<std::size_t>(i));
      if (static_cast<int>(row.size()) != m) throw ConfigError(what + ": ragged distance matrix");
      for (int k = 0; k < m; ++k) d(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
    }
    return DistanceSpec::from_matrix(std::move(d));
  }
  throw ConfigError(what + ": needs positions or distance_matrix");
}

}  // namespace

PenaltySpec parse_penalty_json(const std::string& text, int m) {
  const json j = parse_json(text, "penalty spec");
  const std::string variant = j.value("variant", "");
  try {
    if (variant == "weights") {
      std::vector<double> c = j.at("c").get<std::vector<double>>();
      return PenaltySpec::weights(m, std::move(c));
    }
    if (variant == "dag") {
      std::vector<std::pair<int, int>> edges;
      for (const auto& e : j.at("edges")) {
        if (e.size() != 2) throw ConfigError("penalty spec: each edge is [parent, child]");
        edges.emplace_back(to_zero_based(e.at(0).get<int>(), m, "penalty spec"),
                           to_zero_based(e.at(1).get<int>(), m, "penalty spec"));
      }
      return PenaltySpec::dag_ancestors(Dag(m, edges), j.value("strong_hierarchy", false));
    }
    if (variant == "cut") {
      return PenaltySpec::cut(distance_from_json(j, m, "penalty spec"));
    }
    if (variant == "clusters") {
      if (!j.contains("h")) throw ConfigError("penalty spec: clusters variant needs h");
      return PenaltySpec::clusters(distance_from_json(j, m, "penalty spec"),
                                   j.at("h").get<double>());
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("penalty spec: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("penalty spec: ") + e.what());
  }
  throw ConfigError("penalty spec: unknown variant '" + variant + "'");
}

PenaltySpec load_penalty_json(const std::string& path, int m) {
  return parse_penalty_json(read_text_file(path), m);
}

GroupStructure parse_groups_json(const std::string& text, int m) {
  const json j = parse_json(text, "group spec");
  try {
    std::vector<std::vector<int>> groups;
    for (const auto& g : j.at("groups")) {
      std::vector<int> grp;
      for (const auto& idx : g) grp.push_back(to_zero_based(idx.get<int>(), m, "group spec"));
      groups.push_back(std::move(grp));
    }
    return GroupStructure(m, std::move(groups));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("group spec: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("group spec: ") + e.what());
  }
}

GroupStructure load_groups_json(const std::string& path, int m) {
  return parse_groups_json(read_text_file(path), m);
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    config[key] = value;
  }
  return config;
}

std::map<std::string, std::string> load_config_file(const std::string& path) {
  return parse_config_text(read_text_file(path));
}

std::string fit_to_json(const AggregateFit& fit, const std::map<std::string, std::string>& config,
                        const std::vector<double>& column_scales, double wall_time_sec,
                        std::uint64_t seed) {
  json j;
  j["beta"] = std::vector<double>(fit.beta.data(), fit.beta.data() + fit.beta.size());
  j["selection_freq"] = std::vector<double>(fit.selection_freq.data(),
                                            fit.selection_freq.data() + fit.selection_freq.size());
  j["acceptance_rate"] = fit.acceptance_rate;
  j["visited"] = fit.visited;
  if (!column_scales.empty()) j["column_scales"] = column_scales;
  j["config"] = config;
  j["seed"] = seed;
  j["wall_time_sec"] = wall_time_sec;
  return j.dump(2) + "\n";
}

std::string trace_to_csv(const std::vector<ChainTraceRow>& trace) {
  std::ostringstream out;
  out << "iteration,count,error,accepted\n";
  out.precision(17);
  for (const auto& row : trace) {
    out << row.iteration << ',' << row.count << ',' << row.error << ',' << (row.accepted ? 1 : 0)
        << '\n';
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << text;
  if (!out) throw ConfigError("failed while writing: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace spagg
