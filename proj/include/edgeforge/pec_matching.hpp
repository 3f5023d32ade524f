#pragma once

#include "edgeforge/louvain.hpp"
#include "edgeforge/polyline_set.hpp"

#include <compare>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace edgeforge {

/// Sparse structure-from-motion point with its per-view observations.
struct ReferencePoint {
  int id = 0;
  Point3 position = Point3::Zero();
  std::map<ViewId, Point2> observations;
};

struct PolylineKey {
  ViewId view = 0;
  int polyline = 0;
  auto operator<=>(const PolylineKey&) const = default;
};

/// Ids of the reference points whose observation on `view` lies within
/// `radius` of the chain, ascending.
std::vector<int> close_points(const Polyline2D& pl, ViewId view, std::span<const ReferencePoint> refs, double radius);

/// Inverse of the mean, over the views observing r, of the number of
/// polylines within `radius` of r's reprojection. Empty when no observing
/// view has a nearby polyline; such points take no part in similarities.
std::optional<double> point_weight(const ReferencePoint& r, const ViewSet& views, double radius);

/// Weighted intersection-over-union of two sorted close-point sets. Ids
/// without a weight are ignored. Zero when the union carries no weight.
double polyline_similarity(std::span<const int> close_a, std::span<const int> close_b,
                           const std::map<int, double>& weights);

struct SimilarityGraph {
  std::vector<PolylineKey> nodes;
  std::vector<WeightedEdge> edges;
};

/// Close-point sets and weights shared by similarity computations.
struct MatchingContext {
  std::map<PolylineKey, std::vector<int>> close;
  std::map<int, double> weights;
};

MatchingContext build_matching_context(const ViewSet& views, std::span<const ReferencePoint> refs, double radius);

/// Nodes are every polyline of every view in ascending key order; an edge
/// joins polylines of different views whose similarity reaches min_sim.
SimilarityGraph build_similarity_graph(const ViewSet& views, std::span<const ReferencePoint> refs, double radius,
                                       double min_sim);
SimilarityGraph build_similarity_graph(const ViewSet& views, const MatchingContext& context, double min_sim);

/// Potential edge correspondence: per-view polyline ids.
struct Pec {
  std::map<ViewId, std::vector<int>> views;
  std::size_t polyline_count() const;
};

/// Louvain communities spanning at least two views, ordered by their
/// smallest member key.
std::vector<Pec> detect_communities(const SimilarityGraph& g, LouvainResult* diagnostics = nullptr);

std::string pecs_to_json(std::span<const Pec> pecs);
std::vector<Pec> pecs_from_json(const std::string& text);

/// One SVG per view would be drawn by the caller; this renders the given
/// view's polylines colored by PEC membership (gray when unmatched).
std::string pec_overlay_svg(const ViewData& view, std::span<const Pec> pecs);

}  // namespace edgeforge
