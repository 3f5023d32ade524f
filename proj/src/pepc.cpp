#include "edgeforge/pepc.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

namespace edgeforge {

namespace {
constexpr double kOnLine = 1e-9;
}

std::vector<CandidatePoint> intersect_polyline_line(const Polyline2D& pl, int polyline_id, const Line2& line,
                                                    const std::optional<Circle>& clip) {
  std::vector<CandidatePoint> out;
  const auto& p = pl.points();
  if (p.size() < 2) return out;
  const std::size_t n = p.size();
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = line.signed_distance(p[i]);
  auto on = [&](std::size_t i) { return std::abs(s[i]) <= kOnLine; };
  auto emit = [&](int seg, double t) {
    const auto k = static_cast<std::size_t>(seg);
    const Point2 q = p[k] + t * (p[k + 1] - p[k]);
    if (clip && (q - clip->center).norm() > clip->radius) return;
    out.push_back({q, polyline_id, {seg, t}});
  };
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (on(k)) {
      emit(static_cast<int>(k), 0.0);
    } else if (!on(k + 1) && s[k] * s[k + 1] < 0.0) {
      emit(static_cast<int>(k), s[k] / (s[k] - s[k + 1]));
    }
  }
  if (on(n - 1) && !(pl.closed() && on(0))) emit(static_cast<int>(n) - 2, 1.0);
  return out;
}

namespace {

std::vector<CandidatePoint> intersect_view(const PolylineSet& edges, std::span<const int> polyline_ids, const Line2& line,
                                           const std::optional<Circle>& clip) {
  std::vector<CandidatePoint> out;
  for (int id : polyline_ids) {
    auto hits = intersect_polyline_line(edges.polyline(id), id, line, clip);
    out.insert(out.end(), hits.begin(), hits.end());
  }
  return out;
}

}  // namespace

std::vector<Pepc> pepc_from_ref_point(const ReferencePoint& r, const ViewSet& views, double r_inner, double r_outer) {
  std::vector<Pepc> out;
  struct Observing {
    const ViewData* view;
    Point2 reprojection;
  };
  std::vector<Observing> observing;
  for (const auto& [id, uv] : r.observations) {
    const ViewData* v = views.find(id);
    if (!v) continue;
    auto rp = try_project(v->camera, r.position);
    if (!rp) continue;
    observing.push_back({v, *rp});
  }
  if (observing.size() < 3 || !(r_inner > 0.0) || !(r_outer > r_inner)) return out;

  for (const auto& s : observing) {
    const double inner = sphere_projection_radius(s.view->camera, r.position, r_inner);
    for (const auto& hit : s.view->edges.near(s.reprojection, inner)) {
      Pepc pepc;
      pepc.seed = {s.view->camera.id(), hit.closest.point, hit.polyline, hit.closest.pos};
      pepc.provenance = {PepcSource::RefPoint, r.id};
      for (const auto& o : observing) {
        if (o.view == s.view) continue;
        auto line = try_epipolar_line(s.view->camera, o.view->camera, pepc.seed.point);
        if (!line) continue;
        const Circle clip{o.reprojection, sphere_projection_radius(o.view->camera, r.position, r_outer)};
        std::vector<int> ids;
        const Point2 ext(clip.radius, clip.radius);
        for (const auto& [id, seg] : o.view->edges.segments_in_box(clip.center - ext, clip.center + ext)) {
          if (ids.empty() || ids.back() != id) ids.push_back(id);
        }
        auto cands = intersect_view(o.view->edges, ids, *line, clip);
        if (!cands.empty()) pepc.candidates[o.view->camera.id()] = std::move(cands);
      }
      if (pepc.candidates.size() >= 2) out.push_back(std::move(pepc));
    }
  }
  return out;
}

std::optional<ViewId> pec_initial_view(const Pec& pec, const ViewSet& views) {
  std::optional<ViewId> best;
  double best_len = -1.0;
  for (const auto& [view, ids] : pec.views) {
    const ViewData* v = views.find(view);
    if (!v) continue;
    double len = 0.0;
    for (int id : ids) len += v->edges.polyline(id).length();
    if (len > best_len) {
      best_len = len;
      best = view;
    }
  }
  return best;
}

std::vector<Pepc> pepc_from_pec(const Pec& pec, int pec_id, const ViewSet& views, double sample_step) {
  std::vector<Pepc> out;
  if (pec.views.size() < 3 || !(sample_step > 0.0)) return out;
  const auto initial = pec_initial_view(pec, views);
  if (!initial) return out;
  const ViewData& init = views.at(*initial);
  for (int id : pec.views.at(*initial)) {
    const Polyline2D& pl = init.edges.polyline(id);
    for (double s = 0.0; s <= pl.length() + 1e-9; s += sample_step) {
      Pepc pepc;
      const ChainPos pos = pl.at_arc_length(s);
      pepc.seed = {*initial, pl.point_at(pos), id, pos};
      pepc.provenance = {PepcSource::Pec, pec_id};
      for (const auto& [view, ids] : pec.views) {
        if (view == *initial) continue;
        const ViewData* v = views.find(view);
        if (!v) continue;
        auto line = try_epipolar_line(init.camera, v->camera, pepc.seed.point);
        if (!line) continue;
        auto cands = intersect_view(v->edges, ids, *line, std::nullopt);
        if (!cands.empty()) pepc.candidates[view] = std::move(cands);
      }
      if (pepc.candidates.size() >= 2) out.push_back(std::move(pepc));
    }
  }
  return out;
}

std::int64_t count_selections(std::span<const std::size_t> counts) {
  std::int64_t product = 1;
  std::int64_t sum = 0;
  for (std::size_t c : counts) {
    product *= static_cast<std::int64_t>(c) + 1;
    sum += static_cast<std::int64_t>(c);
  }
  return product - sum - 1;
}

std::int64_t count_selections(const Pepc& pepc) {
  std::vector<std::size_t> counts;
  for (const auto& [view, c] : pepc.candidates) counts.push_back(c.size());
  return count_selections(counts);
}

std::vector<Pepc> merge_close_seeds(std::vector<Pepc> pepcs, const ViewSet& views, double min_gap) {
  std::map<std::pair<ViewId, int>, std::vector<double>> taken;
  std::vector<Pepc> out;
  for (auto& p : pepcs) {
    const double arc = views.at(p.seed.view).edges.polyline(p.seed.polyline).arc_length(p.seed.pos);
    auto& arcs = taken[{p.seed.view, p.seed.polyline}];
    const bool close = std::any_of(arcs.begin(), arcs.end(), [&](double a) { return std::abs(a - arc) < min_gap; });
    if (close) continue;
    arcs.push_back(arc);
    out.push_back(std::move(p));
  }
  return out;
}

void sort_pepcs(std::vector<Pepc>& pepcs, const ViewSet& views) {
  auto key = [&](const Pepc& p) {
    const double arc = views.at(p.seed.view).edges.polyline(p.seed.polyline).arc_length(p.seed.pos);
    return std::make_tuple(static_cast<int>(p.provenance.source), p.provenance.id, p.seed.view, p.seed.polyline, arc);
  };
  std::stable_sort(pepcs.begin(), pepcs.end(), [&](const Pepc& a, const Pepc& b) { return key(a) < key(b); });
}

std::string pepcs_to_json(std::span<const Pepc> pepcs) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : pepcs) {
    nlohmann::json c = nlohmann::json::object();
    for (const auto& [view, cands] : p.candidates) {
      nlohmann::json list = nlohmann::json::array();
      for (const auto& cp : cands) {
        list.push_back({{"uv", {cp.point.x(), cp.point.y()}}, {"polyline", cp.polyline}, {"segment", cp.pos.segment}, {"t", cp.pos.t}});
      }
      c[std::to_string(view)] = list;
    }
    j.push_back({{"source", p.provenance.source == PepcSource::RefPoint ? "ref_point" : "pec"},
                 {"source_id", p.provenance.id},
                 {"seed", {{"view", p.seed.view}, {"uv", {p.seed.point.x(), p.seed.point.y()}}, {"polyline", p.seed.polyline}}},
                 {"candidates", c}});
  }
  return j.dump();
}

}  // namespace edgeforge
