#include "edgeforge/louvain.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace edgeforge {

double modularity(int node_count, std::span<const WeightedEdge> edges, std::span<const int> community) {
  double m2 = 0.0;
  std::vector<double> degree(static_cast<std::size_t>(node_count), 0.0);
  for (const auto& e : edges) {
    degree[static_cast<std::size_t>(e.a)] += e.weight;
    degree[static_cast<std::size_t>(e.b)] += e.weight;
    m2 += 2.0 * e.weight;
  }
  if (m2 <= 0.0) return 0.0;
  std::map<int, double> inside;
  std::map<int, double> total;
  for (const auto& e : edges) {
    if (community[static_cast<std::size_t>(e.a)] == community[static_cast<std::size_t>(e.b)]) {
      inside[community[static_cast<std::size_t>(e.a)]] += 2.0 * e.weight;
    }
  }
  for (int i = 0; i < node_count; ++i) total[community[static_cast<std::size_t>(i)]] += degree[static_cast<std::size_t>(i)];
  double q = 0.0;
  for (const auto& [c, tot] : total) {
    const double in = inside.count(c) ? inside[c] : 0.0;
    q += in / m2 - (tot / m2) * (tot / m2);
  }
  return q;
}

namespace {

// Symmetric weighted adjacency; self_loop[i] holds A_ii (twice the internal
// weight of an aggregated node).
struct LevelGraph {
  std::vector<std::vector<std::pair<int, double>>> adj;
  std::vector<double> self_loop;
  std::vector<double> degree;
  double m2 = 0.0;

  int size() const { return static_cast<int>(adj.size()); }
};

LevelGraph make_level(int n, std::span<const WeightedEdge> edges) {
  LevelGraph g;
  g.adj.resize(static_cast<std::size_t>(n));
  g.self_loop.assign(static_cast<std::size_t>(n), 0.0);
  g.degree.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<std::map<int, double>> acc(static_cast<std::size_t>(n));
  for (const auto& e : edges) {
    if (e.a < 0 || e.b < 0 || e.a >= n || e.b >= n) throw std::out_of_range("edge references missing node");
    if (e.a == e.b) {
      g.self_loop[static_cast<std::size_t>(e.a)] += 2.0 * e.weight;
    } else {
      acc[static_cast<std::size_t>(e.a)][e.b] += e.weight;
      acc[static_cast<std::size_t>(e.b)][e.a] += e.weight;
    }
  }
  for (int i = 0; i < n; ++i) {
    auto& row = g.adj[static_cast<std::size_t>(i)];
    row.assign(acc[static_cast<std::size_t>(i)].begin(), acc[static_cast<std::size_t>(i)].end());
    double k = g.self_loop[static_cast<std::size_t>(i)];
    for (const auto& [j, w] : row) k += w;
    g.degree[static_cast<std::size_t>(i)] = k;
    g.m2 += k;
  }
  return g;
}

// One round of local moving. Returns true if any node changed community.
bool local_moving(const LevelGraph& g, std::vector<int>& comm) {
  const int n = g.size();
  std::vector<double> tot(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) tot[static_cast<std::size_t>(comm[static_cast<std::size_t>(i)])] += g.degree[static_cast<std::size_t>(i)];

  bool any_move = false;
  bool improved = true;
  std::map<int, double> links;
  while (improved) {
    improved = false;
    for (int i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const int own = comm[ui];
      const double ki = g.degree[ui];
      links.clear();
      links[own] = 0.0;
      for (const auto& [j, w] : g.adj[ui]) links[comm[static_cast<std::size_t>(j)]] += w;
      tot[static_cast<std::size_t>(own)] -= ki;

      auto gain = [&](int c, double k_in) { return k_in - tot[static_cast<std::size_t>(c)] * ki / g.m2; };
      int best = own;
      double best_gain = gain(own, links[own]);
      for (const auto& [c, k_in] : links) {
        const double gc = gain(c, k_in);
        if (gc > best_gain + 1e-12) {
          best = c;
          best_gain = gc;
        }
      }
      tot[static_cast<std::size_t>(best)] += ki;
      if (best != own) {
        comm[ui] = best;
        improved = true;
        any_move = true;
      }
    }
  }
  return any_move;
}

}  // namespace

LouvainResult louvain(int node_count, std::span<const WeightedEdge> edges) {
  LouvainResult result;
  result.community.resize(static_cast<std::size_t>(node_count));
  for (int i = 0; i < node_count; ++i) result.community[static_cast<std::size_t>(i)] = i;
  result.modularity = modularity(node_count, edges, result.community);

  LevelGraph level = make_level(node_count, edges);
  if (level.m2 <= 0.0) return result;

  for (;;) {
    std::vector<int> comm(static_cast<std::size_t>(level.size()));
    for (int i = 0; i < level.size(); ++i) comm[static_cast<std::size_t>(i)] = i;
    if (!local_moving(level, comm)) break;

    // Renumber densely by first occurrence.
    std::map<int, int> renumber;
    for (int& c : comm) {
      auto [it, inserted] = renumber.emplace(c, static_cast<int>(renumber.size()));
      c = it->second;
    }
    for (int& c : result.community) c = comm[static_cast<std::size_t>(c)];
    result.modularity = modularity(node_count, edges, result.community);
    result.modularity_per_pass.push_back(result.modularity);

    std::vector<WeightedEdge> agg;
    for (int i = 0; i < level.size(); ++i) {
      const int ci = comm[static_cast<std::size_t>(i)];
      if (level.self_loop[static_cast<std::size_t>(i)] > 0.0) agg.push_back({ci, ci, 0.5 * level.self_loop[static_cast<std::size_t>(i)]});
      for (const auto& [j, w] : level.adj[static_cast<std::size_t>(i)]) {
        if (i < j) agg.push_back({ci, comm[static_cast<std::size_t>(j)], w});
      }
    }
    level = make_level(static_cast<int>(renumber.size()), agg);
  }
  return result;
}

}  // namespace edgeforge
