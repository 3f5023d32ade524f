#pragma once

#include "edgeforge/geometry.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace edgeforge {

/// Binary edge bitmap, row-major, nonzero = edge pixel.
struct EdgeImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> mask;

  static EdgeImage blank(int width, int height);
  bool at(int x, int y) const { return mask[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool on = true) { mask[static_cast<std::size_t>(y) * width + x] = on ? 1 : 0; }
  std::size_t count() const;
};

using NodeId = std::int32_t;

/// Undirected graph over sub-pixel image points. Neighbor lists are kept
/// sorted; self-loops and parallel edges are refused.
class EdgeGraph2D {
 public:
  NodeId add_node(const Point2& p);
  /// Returns false if the edge is a self-loop or already present.
  bool add_edge(NodeId a, NodeId b);
  bool has_edge(NodeId a, NodeId b) const;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  const Point2& node(NodeId i) const { return nodes_[static_cast<std::size_t>(i)]; }
  const std::vector<Point2>& nodes() const { return nodes_; }
  std::span<const NodeId> neighbors(NodeId i) const { return adj_[static_cast<std::size_t>(i)]; }
  int degree(NodeId i) const { return static_cast<int>(adj_[static_cast<std::size_t>(i)].size()); }
  /// Edges as (i, j) with i < j, sorted.
  std::vector<std::pair<NodeId, NodeId>> edges() const;

  /// Connected component label per node; labels are dense and ordered by
  /// smallest member node.
  std::vector<int> component_labels(int* component_count = nullptr) const;
  /// Subgraph on the kept nodes, renumbered in ascending original order.
  EdgeGraph2D induced(const std::vector<bool>& keep) const;

  bool operator==(const EdgeGraph2D& other) const;

 private:
  std::vector<Point2> nodes_;
  std::vector<std::vector<NodeId>> adj_;
  std::size_t edge_count_ = 0;
};

/// Position on a polyline chain: segment index plus parameter in [0, 1].
struct ChainPos {
  int segment = 0;
  double t = 0.0;
};

/// Ordered chain of graph nodes with cached coordinates and arc lengths.
class Polyline2D {
 public:
  Polyline2D() = default;
  Polyline2D(std::vector<NodeId> nodes, std::vector<Point2> points);
  static Polyline2D from_graph(const EdgeGraph2D& g, std::vector<NodeId> nodes);

  const std::vector<NodeId>& nodes() const { return nodes_; }
  const std::vector<Point2>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  int segment_count() const { return static_cast<int>(points_.size()) - 1; }
  double segment_length(int i) const { return cum_[static_cast<std::size_t>(i) + 1] - cum_[static_cast<std::size_t>(i)]; }
  double length() const { return cum_.empty() ? 0.0 : cum_.back(); }
  bool closed() const { return nodes_.size() > 2 && nodes_.front() == nodes_.back(); }

  double arc_length(const ChainPos& pos) const;
  ChainPos at_arc_length(double s) const;
  Point2 point_at(const ChainPos& pos) const;

  struct Closest {
    ChainPos pos;
    Point2 point;
    double distance = 0.0;
  };
  Closest closest(const Point2& p) const;
  double distance(const Point2& p) const { return closest(p).distance; }

 private:
  std::vector<NodeId> nodes_;
  std::vector<Point2> points_;
  std::vector<double> cum_;
};

/// One node per edge pixel at its integer center; 8-neighbours are joined in
/// scanline order unless the new edge closes a cycle shorter than
/// `min_loop_px`.
EdgeGraph2D build_graph(const EdgeImage& img, double min_loop_px = 4.0);

/// Maximal chains split at nodes of degree != 2. Junction-free loops are cut
/// at their topmost-leftmost node. Every graph edge lands in exactly one chain.
std::vector<Polyline2D> extract_polylines(const EdgeGraph2D& g);

/// Douglas-Peucker with point-to-segment distances: endpoints kept, output
/// vertices are a subset of the input, every input vertex within `tol`.
Polyline2D smooth_polyline(const Polyline2D& pl, double tol = 1.0);

/// Replaces every chain of `g` by its smoothed version.
EdgeGraph2D smooth_graph(const EdgeGraph2D& g, double tol = 1.0);

/// Length of the longest run of consecutive segments whose turning angles
/// are all <= alpha_deg.
double regular_length(const Polyline2D& pl, double alpha_deg = 20.0);

struct FilterReport {
  std::size_t polylines = 0;
  std::size_t ranked = 0;
  double threshold = 0.0;
  std::size_t components_before = 0;
  std::size_t components_after = 0;
};

/// Keeps the connected components holding at least one polyline whose
/// regular length reaches L*, the smallest regular length among the top
/// ceil(top_fraction * P) ranked polylines.
EdgeGraph2D filter_graph(const EdgeGraph2D& g, double alpha_deg = 20.0, double top_fraction = 0.10,
                         FilterReport* report = nullptr);

struct EdgeGraphParams {
  double min_loop_px = 4.0;
  double smooth_tol_px = 1.0;
  double alpha_deg = 20.0;
  double top_fraction = 0.10;
  bool bridge_gaps = true;
  int max_gap_px = 3;
};

/// Sets every background pixel whose 8-neighbours belong to two or more
/// components of the surrounding 5x5 window, closing one-pixel gaps. Pixels
/// are visited in scanline order and see earlier fills.
EdgeImage bridge_gaps(const EdgeImage& img);

/// Joins pairs of line endpoints separated by at most `max_gap` missing
/// pixels when both end tangents point at each other within `max_turn_deg`.
/// Closest pairs are linked first; an endpoint is linked at most once.
EdgeImage link_endpoints(const EdgeImage& img, int max_gap = 3, double max_turn_deg = 45.0);

/// [bridge] -> [link] -> build -> smooth -> filter.
EdgeGraph2D process_edge_image(const EdgeImage& img, const EdgeGraphParams& params = {});

std::string graph_to_json(const EdgeGraph2D& g);
EdgeGraph2D graph_from_json(const std::string& text);
std::string polylines_to_svg(int width, int height, std::span<const Polyline2D> polylines,
                             std::span<const std::string> colors = {});

}  // namespace edgeforge
