#pragma once

#include <map>
#include <string>
#include <vector>

#include "spagg/aggregate.hpp"
#include "spagg/groups.hpp"
#include "spagg/structure.hpp"

namespace spagg {

// Penalty spec JSON. Variants:
//   {"variant": "weights",  "c": [...]}
//   {"variant": "dag",      "edges": [[parent, child], ...], "strong_hierarchy": true}
//   {"variant": "cut",      "distance_matrix": [[...], ...]}
//   {"variant": "clusters", "h": 3.0, "positions": [[1],[2],...]}
// Covariate and edge indices in files are 1-based; cut/clusters accept
// either "positions" or "distance_matrix".
PenaltySpec load_penalty_json(const std::string& path, int m);
PenaltySpec parse_penalty_json(const std::string& text, int m);

// Group spec JSON: {"groups": [[1,2],[2,3],...]}, 1-based indices.
GroupStructure load_groups_json(const std::string& path, int m);
GroupStructure parse_groups_json(const std::string& text, int m);

// Key-value run config: one `key = value` per line, '#' comments.
std::map<std::string, std::string> load_config_file(const std::string& path);
std::map<std::string, std::string> parse_config_text(const std::string& text);

// Fit result serialization. Every result embeds the effective config and
// seed so a run can be reproduced from its own output.
std::string fit_to_json(const AggregateFit& fit, const std::map<std::string, std::string>& config,
                        const std::vector<double>& column_scales, double wall_time_sec,
                        std::uint64_t seed);

std::string trace_to_csv(const std::vector<ChainTraceRow>& trace);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace spagg
