#include "edgeforge/polyline_set.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace edgeforge {

PolylineSet::PolylineSet(EdgeGraph2D graph, double cell_px)
    : graph_(std::move(graph)), polylines_(extract_polylines(graph_)), cell_(cell_px) {
  if (polylines_.empty()) return;
  Point2 lo = polylines_.front().points().front();
  Point2 hi = lo;
  for (const auto& pl : polylines_) {
    for (const auto& p : pl.points()) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  }
  origin_ = lo;
  nx_ = static_cast<std::size_t>(std::floor((hi.x() - lo.x()) / cell_)) + 1;
  ny_ = static_cast<std::size_t>(std::floor((hi.y() - lo.y()) / cell_)) + 1;
  cells_.assign(nx_ * ny_, {});
  for (std::size_t id = 0; id < polylines_.size(); ++id) {
    const auto& pts = polylines_[id].points();
    for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
      const Point2 a = pts[s].cwiseMin(pts[s + 1]) - origin_;
      const Point2 b = pts[s].cwiseMax(pts[s + 1]) - origin_;
      const auto x0 = static_cast<int>(std::floor(a.x() / cell_));
      const auto x1 = static_cast<int>(std::floor(b.x() / cell_));
      const auto y0 = static_cast<int>(std::floor(a.y() / cell_));
      const auto y1 = static_cast<int>(std::floor(b.y() / cell_));
      for (int cy = y0; cy <= y1; ++cy) {
        for (int cx = x0; cx <= x1; ++cx) {
          cells_[cell_index(cx, cy)].emplace_back(static_cast<int>(id), static_cast<int>(s));
        }
      }
    }
  }
}

std::vector<std::pair<int, int>> PolylineSet::segments_in_box(const Point2& lo, const Point2& hi) const {
  std::vector<std::pair<int, int>> out;
  if (cells_.empty()) return out;
  const Point2 a = lo - origin_;
  const Point2 b = hi - origin_;
  const double max_x = static_cast<double>(nx_) - 1.0;
  const double max_y = static_cast<double>(ny_) - 1.0;
  const double fx0 = std::floor(a.x() / cell_);
  const double fx1 = std::floor(b.x() / cell_);
  const double fy0 = std::floor(a.y() / cell_);
  const double fy1 = std::floor(b.y() / cell_);
  if (fx1 < 0.0 || fy1 < 0.0 || fx0 > max_x || fy0 > max_y) return out;
  const int x0 = static_cast<int>(std::max(0.0, fx0));
  const int x1 = static_cast<int>(std::min(max_x, fx1));
  const int y0 = static_cast<int>(std::max(0.0, fy0));
  const int y1 = static_cast<int>(std::min(max_y, fy1));
  for (int cy = y0; cy <= y1; ++cy) {
    for (int cx = x0; cx <= x1; ++cx) {
      const auto& cell = cells_[cell_index(cx, cy)];
      out.insert(out.end(), cell.begin(), cell.end());
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<PolylineSet::Near> PolylineSet::near(const Point2& p, double radius) const {
  std::vector<Near> out;
  const Point2 r(radius, radius);
  for (const auto& [id, seg] : segments_in_box(p - r, p + r)) {
    const auto& pts = polylines_[static_cast<std::size_t>(id)].points();
    double t = 0.0;
    const double d = point_segment_distance(p, pts[static_cast<std::size_t>(seg)], pts[static_cast<std::size_t>(seg) + 1], &t);
    if (d > radius) continue;
    if (out.empty() || out.back().polyline != id) {
      out.push_back({id, {}});
      out.back().closest.distance = d + 1.0;
    }
    auto& best = out.back().closest;
    if (d < best.distance) {
      best.distance = d;
      best.pos = {seg, t};
    }
  }
  for (auto& n : out) n.closest.point = polylines_[static_cast<std::size_t>(n.polyline)].point_at(n.closest.pos);
  return out;
}

ViewSet::ViewSet(std::vector<ViewData> views) : views_(std::move(views)) {
  std::sort(views_.begin(), views_.end(), [](const ViewData& a, const ViewData& b) { return a.camera.id() < b.camera.id(); });
  for (std::size_t i = 1; i < views_.size(); ++i) {
    if (views_[i].camera.id() == views_[i - 1].camera.id()) throw std::invalid_argument("duplicate view id");
  }
}

const ViewData* ViewSet::find(ViewId id) const {
  auto it = std::lower_bound(views_.begin(), views_.end(), id, [](const ViewData& v, ViewId x) { return v.camera.id() < x; });
  return (it != views_.end() && it->camera.id() == id) ? &*it : nullptr;
}

const ViewData& ViewSet::at(ViewId id) const {
  const ViewData* v = find(id);
  if (!v) throw std::out_of_range("unknown view " + std::to_string(id));
  return *v;
}

}  // namespace edgeforge
