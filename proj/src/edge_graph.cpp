#include "edgeforge/edge_graph.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

namespace edgeforge {

EdgeImage EdgeImage::blank(int width, int height) {
  EdgeImage img;
  img.width = width;
  img.height = height;
  img.mask.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
  return img;
}

std::size_t EdgeImage::count() const {
  return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(), [](std::uint8_t v) { return v != 0; }));
}

// ---------------------------------------------------------------------------
// EdgeGraph2D

NodeId EdgeGraph2D::add_node(const Point2& p) {
  nodes_.push_back(p);
  adj_.emplace_back();
  return static_cast<NodeId>(nodes_.size() - 1);
}

bool EdgeGraph2D::has_edge(NodeId a, NodeId b) const {
  const auto& n = adj_[static_cast<std::size_t>(a)];
  return std::binary_search(n.begin(), n.end(), b);
}

bool EdgeGraph2D::add_edge(NodeId a, NodeId b) {
  if (a == b || has_edge(a, b)) return false;
  auto insert_sorted = [](std::vector<NodeId>& v, NodeId x) { v.insert(std::lower_bound(v.begin(), v.end(), x), x); };
  insert_sorted(adj_[static_cast<std::size_t>(a)], b);
  insert_sorted(adj_[static_cast<std::size_t>(b)], a);
  ++edge_count_;
  return true;
}

std::vector<std::pair<NodeId, NodeId>> EdgeGraph2D::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(edge_count_);
  for (std::size_t i = 0; i < adj_.size(); ++i) {
    for (NodeId j : adj_[i]) {
      if (static_cast<NodeId>(i) < j) out.emplace_back(static_cast<NodeId>(i), j);
    }
  }
  return out;
}

std::vector<int> EdgeGraph2D::component_labels(int* component_count) const {
  std::vector<int> label(nodes_.size(), -1);
  int next = 0;
  std::vector<NodeId> stack;
  for (std::size_t s = 0; s < nodes_.size(); ++s) {
    if (label[s] >= 0) continue;
    label[s] = next;
    stack.push_back(static_cast<NodeId>(s));
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      for (NodeId v : adj_[static_cast<std::size_t>(u)]) {
        if (label[static_cast<std::size_t>(v)] < 0) {
          label[static_cast<std::size_t>(v)] = next;
          stack.push_back(v);
        }
      }
    }
    ++next;
  }
  if (component_count) *component_count = next;
  return label;
}

EdgeGraph2D EdgeGraph2D::induced(const std::vector<bool>& keep) const {
  EdgeGraph2D out;
  std::vector<NodeId> remap(nodes_.size(), -1);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (keep[i]) remap[i] = out.add_node(nodes_[i]);
  }
  for (const auto& [a, b] : edges()) {
    const NodeId ra = remap[static_cast<std::size_t>(a)];
    const NodeId rb = remap[static_cast<std::size_t>(b)];
    if (ra >= 0 && rb >= 0) out.add_edge(ra, rb);
  }
  return out;
}

bool EdgeGraph2D::operator==(const EdgeGraph2D& other) const {
  return nodes_ == other.nodes_ && adj_ == other.adj_;
}

// ---------------------------------------------------------------------------
// Polyline2D

Polyline2D::Polyline2D(std::vector<NodeId> nodes, std::vector<Point2> points)
    : nodes_(std::move(nodes)), points_(std::move(points)) {
  if (nodes_.size() != points_.size()) throw std::invalid_argument("polyline nodes/points size mismatch");
  cum_.resize(points_.size(), 0.0);
  for (std::size_t i = 1; i < points_.size(); ++i) cum_[i] = cum_[i - 1] + (points_[i] - points_[i - 1]).norm();
}

Polyline2D Polyline2D::from_graph(const EdgeGraph2D& g, std::vector<NodeId> nodes) {
  std::vector<Point2> pts;
  pts.reserve(nodes.size());
  for (NodeId n : nodes) pts.push_back(g.node(n));
  return Polyline2D(std::move(nodes), std::move(pts));
}

double Polyline2D::arc_length(const ChainPos& pos) const {
  if (points_.size() < 2) return 0.0;
  return cum_[static_cast<std::size_t>(pos.segment)] + pos.t * segment_length(pos.segment);
}

ChainPos Polyline2D::at_arc_length(double s) const {
  if (points_.size() < 2) return {};
  const int last = segment_count() - 1;
  if (s <= 0.0) return {0, 0.0};
  if (s >= length()) return {last, 1.0};
  auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
  int seg = static_cast<int>(it - cum_.begin()) - 1;
  seg = std::clamp(seg, 0, last);
  const double len = segment_length(seg);
  const double t = len > 0.0 ? std::clamp((s - cum_[static_cast<std::size_t>(seg)]) / len, 0.0, 1.0) : 0.0;
  return {seg, t};
}

Point2 Polyline2D::point_at(const ChainPos& pos) const {
  if (points_.size() == 1) return points_.front();
  const auto i = static_cast<std::size_t>(pos.segment);
  return points_[i] + pos.t * (points_[i + 1] - points_[i]);
}

Polyline2D::Closest Polyline2D::closest(const Point2& p) const {
  Closest best;
  best.distance = std::numeric_limits<double>::infinity();
  if (points_.size() == 1) {
    best.point = points_.front();
    best.distance = (p - points_.front()).norm();
    return best;
  }
  for (int s = 0; s < segment_count(); ++s) {
    double t = 0.0;
    const double d = point_segment_distance(p, points_[static_cast<std::size_t>(s)],
                                            points_[static_cast<std::size_t>(s) + 1], &t);
    if (d < best.distance) {
      best.distance = d;
      best.pos = {s, t};
    }
  }
  best.point = point_at(best.pos);
  return best;
}

// ---------------------------------------------------------------------------
// build_graph

namespace {

// Shortest path length from a to b using only edges of g, or +inf when it
// exceeds `limit`.
double bounded_path_length(const EdgeGraph2D& g, NodeId a, NodeId b, double limit) {
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  std::vector<std::pair<NodeId, double>> settled;
  auto best_known = [&](NodeId n) -> double {
    for (const auto& [id, d] : settled) {
      if (id == n) return d;
    }
    return std::numeric_limits<double>::infinity();
  };
  queue.emplace(0.0, a);
  while (!queue.empty()) {
    auto [d, u] = queue.top();
    queue.pop();
    if (d >= limit) break;
    if (best_known(u) <= d) continue;
    settled.emplace_back(u, d);
    if (u == b) return d;
    for (NodeId v : g.neighbors(u)) {
      const double nd = d + (g.node(u) - g.node(v)).norm();
      if (nd < limit && best_known(v) > nd) queue.emplace(nd, v);
    }
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace

EdgeGraph2D build_graph(const EdgeImage& img, double min_loop_px) {
  if (img.mask.size() != static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height)) {
    throw std::invalid_argument("edge image mask does not match its dimensions");
  }
  EdgeGraph2D g;
  std::vector<NodeId> id(img.mask.size(), -1);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (img.at(x, y)) id[static_cast<std::size_t>(y) * img.width + x] = g.add_node(Point2(x, y));
    }
  }
  // Forward half of the 8-neighbourhood; every adjacent pair is visited once
  // in scanline order.
  constexpr int kOffsets[4][2] = {{1, 0}, {-1, 1}, {0, 1}, {1, 1}};
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const NodeId a = id[static_cast<std::size_t>(y) * img.width + x];
      if (a < 0) continue;
      for (const auto& off : kOffsets) {
        const int nx = x + off[0];
        const int ny = y + off[1];
        if (nx < 0 || ny < 0 || nx >= img.width || ny >= img.height) continue;
        const NodeId b = id[static_cast<std::size_t>(ny) * img.width + nx];
        if (b < 0) continue;
        const double w = std::hypot(off[0], off[1]);
        if (bounded_path_length(g, a, b, min_loop_px - w) + w < min_loop_px) continue;
        g.add_edge(a, b);
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// extract_polylines

std::vector<Polyline2D> extract_polylines(const EdgeGraph2D& g) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<char>> used(n);
  for (std::size_t i = 0; i < n; ++i) used[i].assign(g.neighbors(static_cast<NodeId>(i)).size(), 0);
  auto slot = [&](NodeId a, NodeId b) -> char& {
    auto nb = g.neighbors(a);
    const auto k = static_cast<std::size_t>(std::lower_bound(nb.begin(), nb.end(), b) - nb.begin());
    return used[static_cast<std::size_t>(a)][k];
  };
  auto mark = [&](NodeId a, NodeId b) {
    slot(a, b) = 1;
    slot(b, a) = 1;
  };
  auto other = [&](NodeId cur, NodeId prev) {
    auto nb = g.neighbors(cur);
    return nb[0] == prev ? nb[1] : nb[0];
  };

  std::vector<Polyline2D> out;
  for (std::size_t s = 0; s < n; ++s) {
    const auto start = static_cast<NodeId>(s);
    if (g.degree(start) == 2 || g.degree(start) == 0) continue;
    for (NodeId first : g.neighbors(start)) {
      if (slot(start, first)) continue;
      std::vector<NodeId> chain{start, first};
      mark(start, first);
      NodeId prev = start;
      NodeId cur = first;
      while (g.degree(cur) == 2) {
        const NodeId next = other(cur, prev);
        if (slot(cur, next)) break;
        mark(cur, next);
        chain.push_back(next);
        prev = cur;
        cur = next;
      }
      out.push_back(Polyline2D::from_graph(g, std::move(chain)));
    }
  }

  // Whatever is left are junction-free cycles.
  for (std::size_t s = 0; s < n; ++s) {
    const auto start = static_cast<NodeId>(s);
    if (g.degree(start) != 2 || slot(start, g.neighbors(start)[0])) continue;
    std::vector<NodeId> cycle{start};
    NodeId prev = start;
    NodeId cur = g.neighbors(start)[0];
    mark(start, cur);
    while (cur != start) {
      cycle.push_back(cur);
      const NodeId next = other(cur, prev);
      mark(cur, next);
      prev = cur;
      cur = next;
    }
    auto top_left = std::min_element(cycle.begin(), cycle.end(), [&](NodeId a, NodeId b) {
      const Point2& pa = g.node(a);
      const Point2& pb = g.node(b);
      return pa.y() != pb.y() ? pa.y() < pb.y() : pa.x() < pb.x();
    });
    std::rotate(cycle.begin(), top_left, cycle.end());
    cycle.push_back(cycle.front());
    out.push_back(Polyline2D::from_graph(g, std::move(cycle)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// smoothing

namespace {

std::vector<std::size_t> douglas_peucker_indices(const std::vector<Point2>& pts, double tol) {
  const std::size_t n = pts.size();
  if (n <= 2) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  std::vector<char> keep(n, 0);
  keep[0] = 1;
  keep[n - 1] = 1;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, n - 1}};
  while (!stack.empty()) {
    auto [i, j] = stack.back();
    stack.pop_back();
    if (j <= i + 1) continue;
    double worst = -1.0;
    std::size_t worst_k = i;
    for (std::size_t k = i + 1; k < j; ++k) {
      const double d = point_segment_distance(pts[k], pts[i], pts[j]);
      if (d > worst) {
        worst = d;
        worst_k = k;
      }
    }
    if (worst > tol) {
      keep[worst_k] = 1;
      stack.emplace_back(i, worst_k);
      stack.emplace_back(worst_k, j);
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < n; ++k) {
    if (keep[k]) out.push_back(k);
  }
  return out;
}

}  // namespace

Polyline2D smooth_polyline(const Polyline2D& pl, double tol) {
  const auto idx = douglas_peucker_indices(pl.points(), tol);
  std::vector<NodeId> nodes;
  std::vector<Point2> pts;
  for (std::size_t k : idx) {
    nodes.push_back(pl.nodes()[k]);
    pts.push_back(pl.points()[k]);
  }
  return Polyline2D(std::move(nodes), std::move(pts));
}

EdgeGraph2D smooth_graph(const EdgeGraph2D& g, double tol) {
  const auto polylines = extract_polylines(g);
  std::set<std::pair<NodeId, NodeId>> chords;
  std::vector<std::vector<NodeId>> kept_chains;
  kept_chains.reserve(polylines.size());

  for (const auto& pl : polylines) {
    auto idx = douglas_peucker_indices(pl.points(), tol);
    // A chord may collapse onto an existing edge (two parallel chains between
    // the same junctions, or a small loop); split it at its middle vertex.
    std::vector<std::size_t> fixed{idx.front()};
    std::vector<std::pair<std::size_t, std::size_t>> pending;
    for (std::size_t k = idx.size() - 1; k >= 1; --k) pending.emplace_back(idx[k - 1], idx[k]);
    while (!pending.empty()) {
      auto [i, j] = pending.back();
      pending.pop_back();
      const NodeId a = pl.nodes()[i];
      const NodeId b = pl.nodes()[j];
      const auto key = std::minmax(a, b);
      if ((a == b || chords.count(key)) && j > i + 1) {
        const std::size_t m = (i + j) / 2;
        pending.emplace_back(m, j);
        pending.emplace_back(i, m);
        continue;
      }
      chords.insert(key);
      fixed.push_back(j);
    }
    std::vector<NodeId> chain;
    for (std::size_t k : fixed) chain.push_back(pl.nodes()[k]);
    kept_chains.push_back(std::move(chain));
  }

  std::vector<bool> keep(g.node_count(), false);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    if (g.degree(static_cast<NodeId>(i)) != 2) keep[i] = true;
  }
  for (const auto& chain : kept_chains) {
    for (NodeId n : chain) keep[static_cast<std::size_t>(n)] = true;
  }
  EdgeGraph2D out;
  std::vector<NodeId> remap(g.node_count(), -1);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    if (keep[i]) remap[i] = out.add_node(g.node(static_cast<NodeId>(i)));
  }
  for (const auto& chain : kept_chains) {
    for (std::size_t k = 1; k < chain.size(); ++k) {
      out.add_edge(remap[static_cast<std::size_t>(chain[k - 1])], remap[static_cast<std::size_t>(chain[k])]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// regular length and filtering

double regular_length(const Polyline2D& pl, double alpha_deg) {
  const auto& p = pl.points();
  if (p.size() < 2) return 0.0;
  const double alpha = alpha_deg * std::numbers::pi / 180.0;
  double best = 0.0;
  double run = 0.0;
  Point2 prev_dir = Point2::Zero();
  for (std::size_t k = 0; k + 1 < p.size(); ++k) {
    const Point2 d = p[k + 1] - p[k];
    const double len = d.norm();
    if (k == 0) {
      run = len;
    } else {
      const double turn = std::atan2(std::abs(prev_dir.x() * d.y() - prev_dir.y() * d.x()), prev_dir.dot(d));
      run = (turn <= alpha) ? run + len : len;
    }
    if (len > 0.0) prev_dir = d;
    best = std::max(best, run);
  }
  return best;
}

EdgeGraph2D filter_graph(const EdgeGraph2D& g, double alpha_deg, double top_fraction, FilterReport* report) {
  const auto polylines = extract_polylines(g);
  int n_components = 0;
  const auto label = g.component_labels(&n_components);
  FilterReport rep;
  rep.polylines = polylines.size();
  rep.components_before = static_cast<std::size_t>(n_components);
  if (polylines.empty()) {
    if (report) *report = rep;
    return g;
  }
  std::vector<double> rl(polylines.size());
  for (std::size_t i = 0; i < polylines.size(); ++i) rl[i] = regular_length(polylines[i], alpha_deg);
  std::vector<double> ranked = rl;
  std::sort(ranked.begin(), ranked.end(), std::greater<>());
  const auto top = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(top_fraction * static_cast<double>(polylines.size()) - 1e-9)));
  rep.ranked = std::min(top, ranked.size());
  rep.threshold = ranked[rep.ranked - 1];

  std::vector<bool> component_kept(static_cast<std::size_t>(n_components), false);
  for (std::size_t i = 0; i < polylines.size(); ++i) {
    if (rl[i] >= rep.threshold) {
      component_kept[static_cast<std::size_t>(label[static_cast<std::size_t>(polylines[i].nodes().front())])] = true;
    }
  }
  std::vector<bool> keep(g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) keep[i] = component_kept[static_cast<std::size_t>(label[i])];
  rep.components_after = static_cast<std::size_t>(std::count(component_kept.begin(), component_kept.end(), true));
  if (report) *report = rep;
  return g.induced(keep);
}

EdgeImage bridge_gaps(const EdgeImage& img) {
  EdgeImage out = img;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (out.at(x, y)) continue;
      // Components of edge pixels in the surrounding 5x5 window, centre excluded.
      std::array<int, 25> label;
      label.fill(-2);
      for (int dy = -2; dy <= 2; ++dy) {
        for (int dx = -2; dx <= 2; ++dx) {
          const int nx = x + dx;
          const int ny = y + dy;
          if ((dx || dy) && nx >= 0 && ny >= 0 && nx < img.width && ny < img.height && out.at(nx, ny)) {
            label[static_cast<std::size_t>((dy + 2) * 5 + dx + 2)] = -1;
          }
        }
      }
      int components = 0;
      for (std::size_t k = 0; k < 25; ++k) {
        if (label[k] != -1) continue;
        std::vector<std::size_t> stack{k};
        label[k] = components;
        while (!stack.empty()) {
          const auto c = stack.back();
          stack.pop_back();
          const int cx = static_cast<int>(c % 5);
          const int cy = static_cast<int>(c / 5);
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              const int nx = cx + dx;
              const int ny = cy + dy;
              if (nx < 0 || ny < 0 || nx > 4 || ny > 4) continue;
              const auto n = static_cast<std::size_t>(ny * 5 + nx);
              if (label[n] == -1) {
                label[n] = components;
                stack.push_back(n);
              }
            }
          }
        }
        ++components;
      }
      int first = -1;
      bool bridge = false;
      for (int dy = -1; dy <= 1 && !bridge; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int l = label[static_cast<std::size_t>((dy + 2) * 5 + dx + 2)];
          if (l < 0) continue;
          if (first < 0) {
            first = l;
          } else if (l != first) {
            bridge = true;
            break;
          }
        }
      }
      if (bridge) out.set(x, y);
    }
  }
  return out;
}

namespace {

std::vector<std::array<int, 2>> on_neighbours(const EdgeImage& img, int x, int y) {
  std::vector<std::array<int, 2>> out;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      const int nx = x + dx;
      const int ny = y + dy;
      if ((dx || dy) && nx >= 0 && ny >= 0 && nx < img.width && ny < img.height && img.at(nx, ny)) out.push_back({nx, ny});
    }
  }
  return out;
}

}  // namespace

EdgeImage link_endpoints(const EdgeImage& img, int max_gap, double max_turn_deg) {
  EdgeImage out = img;
  if (max_gap < 1) return out;
  struct End {
    std::array<int, 2> p;
    Point2 dir;
  };
  std::vector<End> ends;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (!img.at(x, y)) continue;
      auto nb = on_neighbours(img, x, y);
      if (nb.size() != 1) continue;
      std::array<int, 2> prev{x, y};
      std::array<int, 2> cur = nb.front();
      for (int step = 1; step < 4; ++step) {
        auto next = on_neighbours(img, cur[0], cur[1]);
        std::erase_if(next, [&](const std::array<int, 2>& q) {
          return std::abs(q[0] - prev[0]) <= 1 && std::abs(q[1] - prev[1]) <= 1;
        });
        if (next.size() != 1) break;
        prev = cur;
        cur = next.front();
      }
      const Point2 d(x - cur[0], y - cur[1]);
      ends.push_back({{x, y}, d.normalized()});
    }
  }

  struct Link {
    double distance;
    std::size_t a;
    std::size_t b;
  };
  const double min_cos = std::cos(max_turn_deg * std::numbers::pi / 180.0);
  std::vector<Link> links;
  for (std::size_t i = 0; i < ends.size(); ++i) {
    for (std::size_t j = i + 1; j < ends.size(); ++j) {
      const Point2 v(ends[j].p[0] - ends[i].p[0], ends[j].p[1] - ends[i].p[1]);
      const int cheb = std::max(std::abs(ends[j].p[0] - ends[i].p[0]), std::abs(ends[j].p[1] - ends[i].p[1]));
      if (cheb < 2 || cheb > max_gap + 1) continue;
      const Point2 u = v.normalized();
      if (ends[i].dir.dot(u) < min_cos || ends[j].dir.dot(-u) < min_cos) continue;
      links.push_back({v.norm(), i, j});
    }
  }
  std::stable_sort(links.begin(), links.end(), [](const Link& l, const Link& r) { return l.distance < r.distance; });
  std::vector<bool> used(ends.size(), false);
  for (const auto& l : links) {
    if (used[l.a] || used[l.b]) continue;
    used[l.a] = used[l.b] = true;
    const auto& a = ends[l.a].p;
    const auto& b = ends[l.b].p;
    const int n = std::max(std::abs(b[0] - a[0]), std::abs(b[1] - a[1]));
    for (int k = 1; k < n; ++k) {
      const int x = static_cast<int>(std::lround(a[0] + (b[0] - a[0]) * static_cast<double>(k) / n));
      const int y = static_cast<int>(std::lround(a[1] + (b[1] - a[1]) * static_cast<double>(k) / n));
      out.set(x, y);
    }
  }
  return out;
}

EdgeGraph2D process_edge_image(const EdgeImage& img, const EdgeGraphParams& params) {
  EdgeImage closed = params.bridge_gaps ? bridge_gaps(img) : img;
  if (params.max_gap_px > 0) closed = link_endpoints(closed, params.max_gap_px);
  const EdgeGraph2D raw = build_graph(closed, params.min_loop_px);
  const EdgeGraph2D smooth = smooth_graph(raw, params.smooth_tol_px);
  return filter_graph(smooth, params.alpha_deg, params.top_fraction);
}

// ---------------------------------------------------------------------------
// export

std::string graph_to_json(const EdgeGraph2D& g) {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  for (const auto& p : g.nodes()) j["nodes"].push_back({p.x(), p.y()});
  j["edges"] = nlohmann::json::array();
  for (const auto& [a, b] : g.edges()) j["edges"].push_back({a, b});
  return j.dump();
}

EdgeGraph2D graph_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  EdgeGraph2D g;
  for (const auto& n : j.at("nodes")) g.add_node(Point2(n.at(0).get<double>(), n.at(1).get<double>()));
  for (const auto& e : j.at("edges")) {
    const auto a = e.at(0).get<NodeId>();
    const auto b = e.at(1).get<NodeId>();
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= g.node_count() || static_cast<std::size_t>(b) >= g.node_count()) {
      throw std::out_of_range("graph edge references a missing node");
    }
    g.add_edge(a, b);
  }
  return g;
}

std::string polylines_to_svg(int width, int height, std::span<const Polyline2D> polylines,
                             std::span<const std::string> colors) {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"black\"/>\n";
  for (std::size_t i = 0; i < polylines.size(); ++i) {
    const std::string color = colors.empty() ? std::string("white") : colors[i % colors.size()];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\" points=\"";
    for (const auto& p : polylines[i].points()) os << p.x() << ',' << p.y() << ' ';
    os << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace edgeforge
