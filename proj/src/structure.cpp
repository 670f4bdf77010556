#include "spagg/structure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace spagg {

DistanceSpec DistanceSpec::from_matrix(Eigen::MatrixXd d) {
  if (d.rows() != d.cols()) throw std::invalid_argument("distance matrix must be square");
  for (int i = 0; i < d.rows(); ++i) {
    if (d(i, i) != 0.0) throw std::invalid_argument("distance matrix diagonal must be zero");
    for (int j = 0; j < i; ++j) {
      if (d(i, j) < 0.0) throw std::invalid_argument("distances must be nonnegative");
      if (d(i, j) != d(j, i)) throw std::invalid_argument("distance matrix must be symmetric");
    }
  }
  DistanceSpec spec;
  spec.size_ = static_cast<int>(d.rows());
  spec.matrix_ = std::move(d);
  return spec;
}

DistanceSpec DistanceSpec::from_positions(Eigen::MatrixXd points) {
  if (points.rows() < 1) throw std::invalid_argument("positions must have at least one row");
  DistanceSpec spec;
  spec.size_ = static_cast<int>(points.rows());
  spec.points_ = std::move(points);
  return spec;
}

DistanceSpec DistanceSpec::line_positions(int m) {
  Eigen::MatrixXd points(m, 1);
  for (int i = 0; i < m; ++i) points(i, 0) = i + 1;
  return from_positions(std::move(points));
}

Dag::Dag(int nodes, const std::vector<std::pair<int, int>>& edges)
    : parents_(static_cast<std::size_t>(nodes)), children_(static_cast<std::size_t>(nodes)) {
  if (nodes <= 0) throw std::invalid_argument("dag needs at least one node");
  for (const auto& [parent, child] : edges) {
    if (parent < 0 || parent >= nodes || child < 0 || child >= nodes) {
      throw std::invalid_argument("dag edge index out of range");
    }
    if (parent == child) throw std::invalid_argument("dag self loop");
    parents_[static_cast<std::size_t>(child)].push_back(parent);
    children_[static_cast<std::size_t>(parent)].push_back(child);
  }
  // Kahn's algorithm; anything left over sits on a cycle.
  std::vector<int> indegree(static_cast<std::size_t>(nodes), 0);
  for (int v = 0; v < nodes; ++v) {
    indegree[static_cast<std::size_t>(v)] = static_cast<int>(parents_[static_cast<std::size_t>(v)].size());
  }
  std::queue<int> frontier;
  for (int v = 0; v < nodes; ++v) {
    if (indegree[static_cast<std::size_t>(v)] == 0) frontier.push(v);
  }
  int seen = 0;
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop();
    ++seen;
    for (int c : children_[static_cast<std::size_t>(v)]) {
      if (--indegree[static_cast<std::size_t>(c)] == 0) frontier.push(c);
    }
  }
  if (seen != nodes) throw std::invalid_argument("graph has a cycle; a DAG is required");
}

std::vector<int> Dag::support_ancestors(const SparsityPattern& p) const {
  std::vector<char> in_set(static_cast<std::size_t>(nodes()), 0);
  std::vector<int> stack;
  for (int v : p.support()) {
    for (int par : parents_[static_cast<std::size_t>(v)]) stack.push_back(par);
  }
  std::vector<int> out;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (in_set[static_cast<std::size_t>(v)]) continue;
    in_set[static_cast<std::size_t>(v)] = 1;
    out.push_back(v);
    for (int par : parents_[static_cast<std::size_t>(v)]) stack.push_back(par);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool Dag::obeys_strong_hierarchy(const SparsityPattern& p) const {
  for (int v : support_ancestors(p)) {
    if (!p.test(v)) return false;
  }
  return true;
}

std::string penalty_variant_name(PenaltyVariant v) {
  switch (v) {
    case PenaltyVariant::weights: return "weights";
    case PenaltyVariant::dag_ancestors: return "dag";
    case PenaltyVariant::cut: return "cut";
    case PenaltyVariant::clusters: return "clusters";
  }
  return "?";
}

double penalty_weights(const SparsityPattern& p, const std::vector<double>& c) {
  if (static_cast<int>(c.size()) != p.size()) {
    throw std::invalid_argument("weight vector length does not match pattern size");
  }
  double total = 0.0;
  for (int i : p.support()) total += c[static_cast<std::size_t>(i)];
  return total;
}

double penalty_dag_ancestors(const SparsityPattern& p, const Dag& dag) {
  return static_cast<double>(dag.support_ancestors(p).size());
}

double penalty_cut(const SparsityPattern& p, const DistanceSpec& dist) {
  const std::vector<int> supp = p.support();
  double total = 0.0;
  for (int j = 0; j < p.size(); ++j) {
    if (p.test(j)) continue;
    for (int i : supp) total += dist(i, j);
  }
  return total;
}

namespace {

int find_root(std::vector<int>& parent, int v) {
  while (parent[static_cast<std::size_t>(v)] != v) {
    parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
    v = parent[static_cast<std::size_t>(v)];
  }
  return v;
}

}  // namespace

int penalty_clusters(const SparsityPattern& p, const DistanceSpec& dist, double h) {
  if (h <= 0.0) throw std::invalid_argument("cluster threshold h must be positive");
  const std::vector<int> supp = p.support();
  const int k = static_cast<int>(supp.size());
  if (k == 0) return 0;
  // union-find over support pairs with d <= h; ties at d == h keep the edge
  std::vector<int> parent(static_cast<std::size_t>(k));
  std::iota(parent.begin(), parent.end(), 0);
  int components = k;
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      if (dist(supp[static_cast<std::size_t>(a)], supp[static_cast<std::size_t>(b)]) > h) continue;
      const int ra = find_root(parent, a);
      const int rb = find_root(parent, b);
      if (ra != rb) {
        parent[static_cast<std::size_t>(ra)] = rb;
        --components;
      }
    }
  }
  return components;
}

PenaltySpec PenaltySpec::weights(int m, std::vector<double> c) {
  if (static_cast<int>(c.size()) != m) throw std::invalid_argument("weight vector must have length M");
  double total = 0.0;
  for (double v : c) {
    if (v <= 0.0) throw std::invalid_argument("covariate weights must be positive");
    total += v;
  }
  if (total >= static_cast<double>(m)) {
    throw std::invalid_argument("covariate weights must sum to less than M");
  }
  PenaltySpec spec;
  spec.variant_ = PenaltyVariant::weights;
  spec.m_ = m;
  spec.weights_ = std::move(c);
  spec.audit_ = {true, "sum of weights < M, so ||p||_c < M for every pattern"};
  return spec;
}

PenaltySpec PenaltySpec::dag_ancestors(Dag dag, bool strong_hierarchy) {
  PenaltySpec spec;
  spec.variant_ = PenaltyVariant::dag_ancestors;
  spec.m_ = dag.nodes();
  spec.dag_ = std::make_shared<const Dag>(std::move(dag));
  spec.strong_hierarchy_ = strong_hierarchy;
  spec.audit_ = {true, "an ancestor set never exceeds M nodes"};
  return spec;
}

PenaltySpec PenaltySpec::cut(DistanceSpec dist) {
  PenaltySpec spec;
  spec.variant_ = PenaltyVariant::cut;
  spec.m_ = dist.size();
  spec.dist_ = std::move(dist);
  double total = 0.0;
  for (int i = 0; i < spec.m_; ++i) {
    for (int j = i + 1; j < spec.m_; ++j) total += spec.dist_(i, j);
  }
  if (total <= static_cast<double>(spec.m_)) {
    spec.audit_ = {true, "total pairwise weight <= M bounds every cut"};
  } else {
    spec.audit_ = {false, "cut values may exceed M; run the assumption checker"};
  }
  return spec;
}

PenaltySpec PenaltySpec::clusters(DistanceSpec dist, double h) {
  if (h <= 0.0) throw std::invalid_argument("cluster threshold h must be positive");
  PenaltySpec spec;
  spec.variant_ = PenaltyVariant::clusters;
  spec.m_ = dist.size();
  spec.dist_ = std::move(dist);
  spec.h_ = h;
  spec.audit_ = {true, "component count <= ||p||_0 <= M"};
  return spec;
}

double PenaltySpec::operator()(const SparsityPattern& p) const {
  if (p.size() != m_) throw std::invalid_argument("pattern size does not match penalty");
  switch (variant_) {
    case PenaltyVariant::weights: return penalty_weights(p, weights_);
    case PenaltyVariant::dag_ancestors: return penalty_dag_ancestors(p, *dag_);
    case PenaltyVariant::cut: return penalty_cut(p, dist_);
    case PenaltyVariant::clusters: return static_cast<double>(penalty_clusters(p, dist_, h_));
  }
  return 0.0;
}

double penalized_norm(const SparsityPattern& p, const PenaltySpec& spec) {
  return static_cast<double>(p.count()) + spec(p);
}

double penalty_gamma(const PenaltySpec& spec) {
  switch (spec.variant()) {
    case PenaltyVariant::clusters:
      return 2.0;  // component count <= ||p||_0
    case PenaltyVariant::weights: {
      double max_w = 0.0;
      for (double v : spec.weight_vector()) max_w = std::max(max_w, v);
      return 1.0 + max_w;
    }
    case PenaltyVariant::dag_ancestors:
      // a single selected leaf can pull in up to M-1 ancestors
      return static_cast<double>(spec.size());
    case PenaltyVariant::cut: {
      double total = 0.0;
      for (int i = 0; i < spec.size(); ++i) {
        for (int j = i + 1; j < spec.size(); ++j) total += spec.distance()(i, j);
      }
      return 1.0 + total;
    }
  }
  return 1.0;
}

}  // namespace spagg
