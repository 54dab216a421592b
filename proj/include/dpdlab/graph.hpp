#pragma once

// Underlying communication graph and the random edge-activation process.
//
// Nodes are 0-based in the API. JSON documents use 1-based indices.

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "dpdlab/error.hpp"

namespace dpdlab {

struct Edge {
  int i = 0;  // i < j
  int j = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Neighbor entry: the adjacent node and the id of the connecting edge.
struct Incident {
  int node;
  int edge;
};

class UnderlyingGraph {
 public:
  UnderlyingGraph() = default;

  int num_agents() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int id) const { return edges_[id]; }
  /// Neighbors in the underlying graph, ascending by node index.
  const std::vector<Incident>& neighbors(int node) const { return adj_[node]; }

  friend UnderlyingGraph build_graph(int n_agents, std::vector<std::pair<int, int>> edge_list);

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<Incident>> adj_;
};

inline bool is_connected(int n, const std::vector<Edge>& edges) {
  if (n <= 1) return true;
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  int components = n;
  for (const auto& e : edges) {
    const int a = find(e.i), b = find(e.j);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

/// Validates and normalizes an undirected edge list (0-based). Edges are
/// stored as (min, max) in lexicographic order; that order is the row order
/// of the incidence matrix and the block order of the edge variables.
inline UnderlyingGraph build_graph(int n_agents, std::vector<std::pair<int, int>> edge_list) {
  if (n_agents < 1) throw Error(Errc::invalid_argument, "graph needs at least one node");
  UnderlyingGraph g;
  g.n_ = n_agents;
  for (auto [a, b] : edge_list) {
    if (a < 0 || b < 0 || a >= n_agents || b >= n_agents) {
      throw Error(Errc::invalid_argument, "edge endpoint out of range");
    }
    if (a == b) throw Error(Errc::self_loop, "self-loop at node " + std::to_string(a), a);
    g.edges_.push_back({std::min(a, b), std::max(a, b)});
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  if (auto dup = std::adjacent_find(g.edges_.begin(), g.edges_.end()); dup != g.edges_.end()) {
    throw Error(Errc::duplicate_edge,
                "edge (" + std::to_string(dup->i) + "," + std::to_string(dup->j) + ") repeated");
  }
  if (!is_connected(n_agents, g.edges_)) throw Error(Errc::disconnected, "graph is not connected");
  g.adj_.assign(n_agents, {});
  for (int id = 0; id < g.num_edges(); ++id) {
    const auto& e = g.edges_[id];
    g.adj_[e.i].push_back({e.j, id});
    g.adj_[e.j].push_back({e.i, id});
  }
  for (auto& list : g.adj_) {
    std::sort(list.begin(), list.end(), [](const Incident& a, const Incident& b) { return a.node < b.node; });
  }
  return g;
}

/// Edge-by-node incidence matrix: +1 at the lower endpoint, -1 at the upper.
inline Eigen::MatrixXi incidence_matrix(const UnderlyingGraph& g) {
  Eigen::MatrixXi gamma = Eigen::MatrixXi::Zero(g.num_edges(), g.num_agents());
  for (int k = 0; k < g.num_edges(); ++k) {
    gamma(k, g.edge(k).i) = 1;
    gamma(k, g.edge(k).j) = -1;
  }
  return gamma;
}

// Counter-based draws: one substream per (seed, edge), indexed by t.
namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t key = splitmix64(seed ^ splitmix64(2 * stream + 1));
  const std::uint64_t bits = splitmix64(key ^ splitmix64(index + 0x632be59bd9b4e019ULL));
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace detail

struct RoundActivation {
  std::int64_t t = 0;
  std::vector<int> active_edges;               // ascending edge ids
  std::vector<std::vector<int>> neighbors;     // per agent, ascending
};

class ActivationModel {
 public:
  ActivationModel() = default;

  ActivationModel(std::vector<double> sigma, std::uint64_t seed) : sigma_(std::move(sigma)), seed_(seed) {
    for (double s : sigma_) {
      if (!(s > 0.0 && s <= 1.0)) {
        throw Error(Errc::invalid_argument, "activation probability must lie in (0,1]");
      }
    }
  }

  /// Test hook: skips the (0,1] check so that sigma = 0 freezes an edge.
  static ActivationModel unchecked(std::vector<double> sigma, std::uint64_t seed) {
    ActivationModel am;
    am.sigma_ = std::move(sigma);
    am.seed_ = seed;
    return am;
  }

  const std::vector<double>& sigma() const { return sigma_; }
  double sigma(int edge) const { return sigma_[edge]; }
  std::uint64_t seed() const { return seed_; }

  bool active(int edge, std::int64_t t) const {
    return detail::counter_uniform(seed_, static_cast<std::uint64_t>(edge), static_cast<std::uint64_t>(t)) <
           sigma_[edge];
  }

 private:
  std::vector<double> sigma_;
  std::uint64_t seed_ = 0;
};

/// The random graph G^t. Pure function of (seed, t).
inline RoundActivation sample_round(const ActivationModel& am, const UnderlyingGraph& g, std::int64_t t) {
  if (t < 0) throw Error(Errc::invalid_argument, "round index must be non-negative");
  if (static_cast<int>(am.sigma().size()) != g.num_edges()) {
    throw Error(Errc::invalid_argument, "one activation probability per edge required");
  }
  RoundActivation r;
  r.t = t;
  r.neighbors.assign(g.num_agents(), {});
  for (int id = 0; id < g.num_edges(); ++id) {
    if (!am.active(id, t)) continue;
    r.active_edges.push_back(id);
    r.neighbors[g.edge(id).i].push_back(g.edge(id).j);
    r.neighbors[g.edge(id).j].push_back(g.edge(id).i);
  }
  for (auto& list : r.neighbors) std::sort(list.begin(), list.end());
  return r;
}

struct Network {
  UnderlyingGraph graph;
  ActivationModel activation;
};

/// {"n": N, "edges": [[i, j, sigma], ...], "seed": s}, 1-based nodes.
inline Network network_from_json(const nlohmann::json& doc) {
  try {
    const int n = doc.at("n").get<int>();
    std::vector<std::pair<int, int>> pairs;
    std::vector<std::pair<Edge, double>> probs;
    for (const auto& e : doc.at("edges")) {
      const int a = e.at(0).get<int>() - 1;
      const int b = e.at(1).get<int>() - 1;
      pairs.emplace_back(a, b);
      probs.push_back({{std::min(a, b), std::max(a, b)}, e.at(2).get<double>()});
    }
    auto graph = build_graph(n, pairs);
    std::sort(probs.begin(), probs.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<double> sigma;
    for (const auto& p : probs) sigma.push_back(p.second);
    const auto seed = doc.value("seed", std::uint64_t{0});
    return {std::move(graph), ActivationModel(std::move(sigma), seed)};
  } catch (const nlohmann::json::exception& ex) {
    throw Error(Errc::parse_error, ex.what());
  }
}

inline nlohmann::json network_to_json(const Network& net) {
  nlohmann::json edges = nlohmann::json::array();
  for (int id = 0; id < net.graph.num_edges(); ++id) {
    const auto& e = net.graph.edge(id);
    edges.push_back({e.i + 1, e.j + 1, net.activation.sigma(id)});
  }
  return {{"n", net.graph.num_agents()}, {"edges", edges}, {"seed", net.activation.seed()}};
}

}  // namespace dpdlab
