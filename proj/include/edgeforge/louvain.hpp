#pragma once

#include <span>
#include <vector>

namespace edgeforge {

struct WeightedEdge {
  int a = 0;
  int b = 0;
  double weight = 0.0;
};

struct LouvainResult {
  /// Community label per node, dense, numbered by first occurrence in node order.
  std::vector<int> community;
  /// Modularity of the original graph after each aggregation pass.
  std::vector<double> modularity_per_pass;
  double modularity = 0.0;
};

/// Newman modularity (resolution 1) of a partition of an undirected weighted
/// graph. Zero for a graph without edges.
double modularity(int node_count, std::span<const WeightedEdge> edges, std::span<const int> community);

/// Louvain: local moving in ascending node order then aggregation, until a
/// pass moves nothing. Ties in gain go to the smallest community id and a
/// node only leaves its community for a strictly better one.
LouvainResult louvain(int node_count, std::span<const WeightedEdge> edges);

}  // namespace edgeforge
