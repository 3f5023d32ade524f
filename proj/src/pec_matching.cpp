#include "edgeforge/pec_matching.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <set>

namespace edgeforge {

std::vector<int> close_points(const Polyline2D& pl, ViewId view, std::span<const ReferencePoint> refs, double radius) {
  std::vector<int> out;
  for (const auto& r : refs) {
    auto it = r.observations.find(view);
    if (it == r.observations.end()) continue;
    if (pl.distance(it->second) <= radius) out.push_back(r.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<double> point_weight(const ReferencePoint& r, const ViewSet& views, double radius) {
  std::size_t observing = 0;
  std::size_t nearby = 0;
  for (const auto& [view, uv] : r.observations) {
    const ViewData* v = views.find(view);
    if (!v) continue;
    auto reprojection = try_project(v->camera, r.position);
    if (!reprojection) continue;
    ++observing;
    nearby += v->edges.near(*reprojection, radius).size();
  }
  if (observing == 0 || nearby == 0) return std::nullopt;
  return static_cast<double>(observing) / static_cast<double>(nearby);
}

double polyline_similarity(std::span<const int> close_a, std::span<const int> close_b,
                           const std::map<int, double>& weights) {
  auto weight = [&](int id) {
    auto it = weights.find(id);
    return it == weights.end() ? 0.0 : it->second;
  };
  double inter = 0.0;
  double uni = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < close_a.size() || j < close_b.size()) {
    if (j == close_b.size() || (i < close_a.size() && close_a[i] < close_b[j])) {
      uni += weight(close_a[i++]);
    } else if (i == close_a.size() || close_b[j] < close_a[i]) {
      uni += weight(close_b[j++]);
    } else {
      const double w = weight(close_a[i]);
      inter += w;
      uni += w;
      ++i;
      ++j;
    }
  }
  return uni > 0.0 ? inter / uni : 0.0;
}

MatchingContext build_matching_context(const ViewSet& views, std::span<const ReferencePoint> refs, double radius) {
  MatchingContext ctx;
  for (const auto& v : views) {
    for (std::size_t p = 0; p < v.edges.size(); ++p) ctx.close[{v.camera.id(), static_cast<int>(p)}];
  }
  for (const auto& r : refs) {
    if (auto w = point_weight(r, views, radius)) ctx.weights[r.id] = *w;
    for (const auto& [view, uv] : r.observations) {
      const ViewData* v = views.find(view);
      if (!v) continue;
      for (const auto& n : v->edges.near(uv, radius)) ctx.close[{view, n.polyline}].push_back(r.id);
    }
  }
  for (auto& [key, ids] : ctx.close) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  }
  return ctx;
}

SimilarityGraph build_similarity_graph(const ViewSet& views, const MatchingContext& ctx, double min_sim) {
  SimilarityGraph g;
  std::map<PolylineKey, int> index;
  for (const auto& v : views) {
    for (std::size_t p = 0; p < v.edges.size(); ++p) {
      const PolylineKey key{v.camera.id(), static_cast<int>(p)};
      index[key] = static_cast<int>(g.nodes.size());
      g.nodes.push_back(key);
    }
  }
  // Only pairs sharing a weighted reference point can have positive similarity.
  std::map<int, std::vector<int>> by_ref;
  for (const auto& [key, ids] : ctx.close) {
    auto it = index.find(key);
    if (it == index.end()) continue;
    for (int id : ids) {
      if (ctx.weights.count(id)) by_ref[id].push_back(it->second);
    }
  }
  std::set<std::pair<int, int>> pairs;
  for (const auto& [id, nodes] : by_ref) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      for (std::size_t j = i + 1; j < nodes.size(); ++j) {
        const int a = std::min(nodes[i], nodes[j]);
        const int b = std::max(nodes[i], nodes[j]);
        if (g.nodes[static_cast<std::size_t>(a)].view != g.nodes[static_cast<std::size_t>(b)].view) pairs.emplace(a, b);
      }
    }
  }
  for (const auto& [a, b] : pairs) {
    const double s = polyline_similarity(ctx.close.at(g.nodes[static_cast<std::size_t>(a)]),
                                         ctx.close.at(g.nodes[static_cast<std::size_t>(b)]), ctx.weights);
    if (s > 0.0 && s >= min_sim) g.edges.push_back({a, b, s});
  }
  return g;
}

SimilarityGraph build_similarity_graph(const ViewSet& views, std::span<const ReferencePoint> refs, double radius,
                                       double min_sim) {
  return build_similarity_graph(views, build_matching_context(views, refs, radius), min_sim);
}

std::size_t Pec::polyline_count() const {
  std::size_t n = 0;
  for (const auto& [view, ids] : views) n += ids.size();
  return n;
}

std::vector<Pec> detect_communities(const SimilarityGraph& g, LouvainResult* diagnostics) {
  LouvainResult res = louvain(static_cast<int>(g.nodes.size()), g.edges);
  std::map<int, Pec> groups;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    groups[res.community[i]].views[g.nodes[i].view].push_back(g.nodes[i].polyline);
  }
  std::vector<Pec> out;
  for (auto& [label, pec] : groups) {
    if (pec.views.size() < 2) continue;
    for (auto& [view, ids] : pec.views) std::sort(ids.begin(), ids.end());
    out.push_back(std::move(pec));
  }
  std::sort(out.begin(), out.end(), [](const Pec& a, const Pec& b) {
    const PolylineKey ka{a.views.begin()->first, a.views.begin()->second.front()};
    const PolylineKey kb{b.views.begin()->first, b.views.begin()->second.front()};
    return ka < kb;
  });
  if (diagnostics) *diagnostics = std::move(res);
  return out;
}

std::string pecs_to_json(std::span<const Pec> pecs) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& pec : pecs) {
    nlohmann::json views = nlohmann::json::object();
    for (const auto& [view, ids] : pec.views) views[std::to_string(view)] = ids;
    j.push_back({{"views", views}});
  }
  return j.dump();
}

std::vector<Pec> pecs_from_json(const std::string& text) {
  std::vector<Pec> out;
  for (const auto& item : nlohmann::json::parse(text)) {
    Pec pec;
    for (const auto& [view, ids] : item.at("views").items()) pec.views[std::stoi(view)] = ids.get<std::vector<int>>();
    out.push_back(std::move(pec));
  }
  return out;
}

std::string pec_overlay_svg(const ViewData& view, std::span<const Pec> pecs) {
  std::vector<std::string> color(view.edges.size(), "#404040");
  for (std::size_t k = 0; k < pecs.size(); ++k) {
    auto it = pecs[k].views.find(view.camera.id());
    if (it == pecs[k].views.end()) continue;
    // Golden-angle hue walk gives distinguishable neighbouring colors.
    char buf[32];
    std::snprintf(buf, sizeof(buf), "hsl(%d,90%%,55%%)", static_cast<int>((k * 137) % 360));
    for (int id : it->second) {
      if (id >= 0 && static_cast<std::size_t>(id) < color.size()) color[static_cast<std::size_t>(id)] = buf;
    }
  }
  std::vector<Polyline2D> pls(view.edges.polylines().begin(), view.edges.polylines().end());
  return polylines_to_svg(view.camera.width(), view.camera.height(), pls, color);
}

}  // namespace edgeforge
