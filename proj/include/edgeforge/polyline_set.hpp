#pragma once

#include "edgeforge/edge_graph.hpp"

#include <utility>
#include <vector>

namespace edgeforge {

/// The final polylines of one view together with a uniform-grid segment
/// index. Polyline ids are indices into polylines().
class PolylineSet {
 public:
  PolylineSet() = default;
  explicit PolylineSet(EdgeGraph2D graph, double cell_px = 8.0);

  const EdgeGraph2D& graph() const { return graph_; }
  const std::vector<Polyline2D>& polylines() const { return polylines_; }
  const Polyline2D& polyline(int id) const { return polylines_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return polylines_.size(); }

  struct Near {
    int polyline = -1;
    Polyline2D::Closest closest;
  };
  /// Polylines whose chain passes within `radius` of p, one entry each,
  /// ascending polyline id.
  std::vector<Near> near(const Point2& p, double radius) const;

  /// (polyline, segment) pairs whose cells overlap the box, sorted, unique.
  std::vector<std::pair<int, int>> segments_in_box(const Point2& lo, const Point2& hi) const;

 private:
  std::size_t cell_index(int cx, int cy) const { return static_cast<std::size_t>(cy) * nx_ + static_cast<std::size_t>(cx); }

  EdgeGraph2D graph_;
  std::vector<Polyline2D> polylines_;
  double cell_ = 8.0;
  Point2 origin_ = Point2::Zero();
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  std::vector<std::vector<std::pair<int, int>>> cells_;
};

struct ViewData {
  CameraView camera;
  PolylineSet edges;
};

/// Views ordered by id.
class ViewSet {
 public:
  ViewSet() = default;
  explicit ViewSet(std::vector<ViewData> views);

  const ViewData* find(ViewId id) const;
  const ViewData& at(ViewId id) const;
  std::size_t size() const { return views_.size(); }
  auto begin() const { return views_.begin(); }
  auto end() const { return views_.end(); }

 private:
  std::vector<ViewData> views_;
};

}  // namespace edgeforge
