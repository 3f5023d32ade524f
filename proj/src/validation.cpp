#include "edgeforge/validation.hpp"

#include <algorithm>
#include <numbers>
#include <cmath>

namespace edgeforge {

const PointObservation* EdgePoint3D::find(ViewId view) const {
  auto it = std::lower_bound(observations.begin(), observations.end(), view,
                             [](const PointObservation& o, ViewId v) { return o.view < v; });
  return (it != observations.end() && it->view == view) ? &*it : nullptr;
}

double Polyline3D::length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) len += (points[i].position - points[i - 1].position).norm();
  return len;
}

const char* to_string(ResolveStatus s) {
  switch (s) {
    case ResolveStatus::Accepted: return "accepted";
    case ResolveStatus::NoValidSelection: return "no_valid_selection";
    case ResolveStatus::Ambiguous: return "ambiguous";
    case ResolveStatus::TooFewViews: return "too_few_views";
  }
  return "unknown";
}

std::optional<EdgePoint3D> make_edge_point(const ViewSet& views, std::vector<PointObservation> obs, double eps) {
  std::sort(obs.begin(), obs.end(), [](const PointObservation& a, const PointObservation& b) { return a.view < b.view; });
  std::vector<ImageObservation> image_obs;
  image_obs.reserve(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (i > 0 && obs[i].view == obs[i - 1].view) return std::nullopt;
    const ViewData* v = views.find(obs[i].view);
    if (!v) return std::nullopt;
    image_obs.push_back({&v->camera, obs[i].uv});
  }
  auto tri = try_triangulate(image_obs);
  if (!tri || tri->max_reproj_error > eps) return std::nullopt;
  return EdgePoint3D{tri->point, std::move(obs), tri->max_reproj_error};
}

std::optional<CandidatePoint> first_intersection(const Polyline2D& pl, int polyline_id, const ChainPos& from, int dir,
                                                 const Line2& line) {
  const auto& p = pl.points();
  const int segments = pl.segment_count();
  if (segments < 1) return std::nullopt;
  auto crossing = [&](int k, double lo, double hi) -> std::optional<double> {
    const double s0 = line.signed_distance(p[static_cast<std::size_t>(k)]);
    const double s1 = line.signed_distance(p[static_cast<std::size_t>(k) + 1]);
    if (s0 == s1) {
      if (std::abs(s0) <= 1e-9) return dir > 0 ? lo : hi;
      return std::nullopt;
    }
    const double t = s0 / (s0 - s1);
    if (t >= lo - 1e-12 && t <= hi + 1e-12) return std::clamp(t, lo, hi);
    return std::nullopt;
  };
  const int start = std::clamp(from.segment, 0, segments - 1);
  if (dir > 0) {
    for (int k = start; k < segments; ++k) {
      if (auto t = crossing(k, k == start ? from.t : 0.0, 1.0)) {
        const ChainPos pos{k, *t};
        return CandidatePoint{pl.point_at(pos), polyline_id, pos};
      }
    }
  } else {
    for (int k = start; k >= 0; --k) {
      if (auto t = crossing(k, 0.0, k == start ? from.t : 1.0)) {
        const ChainPos pos{k, *t};
        return CandidatePoint{pl.point_at(pos), polyline_id, pos};
      }
    }
  }
  return std::nullopt;
}

double crossing_angle_deg(const Polyline2D& pl, const ChainPos& pos, const Line2& line) {
  const auto k = static_cast<std::size_t>(std::clamp(pos.segment, 0, std::max(0, pl.segment_count() - 1)));
  if (k + 1 >= pl.size()) return 0.0;
  const Point2 d = pl.points()[k + 1] - pl.points()[k];
  const double len = d.norm();
  if (len == 0.0) return 0.0;
  const double s = std::min(1.0, std::abs(line.a * d.x() + line.b * d.y()) / len);
  return std::asin(s) * 180.0 / std::numbers::pi;
}

namespace {

// Drops the worst non-seed view while the error exceeds eps and more than
// three views remain.
std::optional<EdgePoint3D> triangulate_with_pruning(const ViewSet& views, std::vector<PointObservation> obs,
                                                    ViewId seed_view, double eps) {
  while (obs.size() >= 3) {
    std::sort(obs.begin(), obs.end(), [](const PointObservation& a, const PointObservation& b) { return a.view < b.view; });
    std::vector<ImageObservation> image_obs;
    for (const auto& o : obs) image_obs.push_back({&views.at(o.view).camera, o.uv});
    auto tri = try_triangulate(image_obs);
    if (!tri) return std::nullopt;
    if (tri->max_reproj_error <= eps) return EdgePoint3D{tri->point, std::move(obs), tri->max_reproj_error};
    if (obs.size() == 3) return std::nullopt;
    std::size_t worst = obs.size();
    for (std::size_t i = 0; i < obs.size(); ++i) {
      if (obs[i].view == seed_view) continue;
      if (worst == obs.size() || tri->per_view_errors[i] > tri->per_view_errors[worst]) worst = i;
    }
    obs.erase(obs.begin() + static_cast<std::ptrdiff_t>(worst));
  }
  return std::nullopt;
}

// One edge-following step from the end of `pl` selected by orientation.
std::optional<EdgePoint3D> grow_step(const ViewSet& views, const Polyline3D& pl, int orientation,
                                     const GrowthParams& params) {
  const EdgePoint3D& end = orientation > 0 ? pl.points.back() : pl.points.front();
  const PointObservation* seed_obs = end.find(pl.seed_view);
  if (!seed_obs) return std::nullopt;
  const ViewData& seed = views.at(pl.seed_view);
  const Polyline2D& chain = seed.edges.polyline(seed_obs->polyline);
  const double arc = chain.arc_length(seed_obs->pos);
  const double target = std::clamp(arc + orientation * pl.directions.at(pl.seed_view) * params.step_px, 0.0, chain.length());
  if (std::abs(target - arc) < params.min_step_px) return std::nullopt;
  const ChainPos pos = chain.at_arc_length(target);
  const Point2 q = chain.point_at(pos);

  std::vector<PointObservation> obs{{pl.seed_view, q, seed_obs->polyline, pos}};
  for (const auto& o : end.observations) {
    if (o.view == pl.seed_view) continue;
    auto dir = pl.directions.find(o.view);
    if (dir == pl.directions.end()) continue;
    const ViewData& aux = views.at(o.view);
    auto line = try_epipolar_line(seed.camera, aux.camera, q);
    if (!line) continue;
    const Polyline2D& chain_b = aux.edges.polyline(o.polyline);
    auto hit = first_intersection(chain_b, o.polyline, o.pos, orientation * dir->second, *line);
    if (hit && crossing_angle_deg(chain_b, hit->pos, *line) >= params.min_crossing_deg) {
      obs.push_back({o.view, hit->point, o.polyline, hit->pos});
    }
  }
  if (obs.size() < 3) return std::nullopt;
  auto next = triangulate_with_pruning(views, std::move(obs), pl.seed_view, params.eps_px);
  if (!next) return std::nullopt;
  const Point3 mid = 0.5 * (end.position + next->position);
  for (const auto& o : next->observations) {
    const ViewData& v = views.at(o.view);
    auto q = try_project(v.camera, mid);
    if (!q || v.edges.polyline(o.polyline).distance(*q) > params.eps_px) return std::nullopt;
  }
  return next;
}

void extend(const ViewSet& views, Polyline3D& pl, int orientation, const GrowthParams& params) {
  while (auto next = grow_step(views, pl, orientation, params)) {
    if (orientation > 0) {
      pl.points.push_back(std::move(*next));
    } else {
      pl.points.insert(pl.points.begin(), std::move(*next));
      ++pl.anchor;
    }
  }
}

std::vector<PointObservation> without_view(const std::vector<PointObservation>& obs, ViewId view) {
  std::vector<PointObservation> out;
  for (const auto& o : obs) {
    if (o.view != view) out.push_back(o);
  }
  return out;
}

// Checks that walking the candidate's polyline from `from` in direction
// `dir` meets the epipolar line of the neighbour's seed observation at a
// point compatible with the neighbour's other observations.
std::optional<CandidatePoint> match_neighbour(const ViewSet& views, const Polyline3D& pl, const EdgePoint3D& neighbour,
                                              ViewId view, const CandidatePoint& from, int dir, double eps) {
  const PointObservation* seed_obs = neighbour.find(pl.seed_view);
  if (!seed_obs) return std::nullopt;
  const ViewData& target = views.at(view);
  auto line = try_epipolar_line(views.at(pl.seed_view).camera, target.camera, seed_obs->uv);
  if (!line) return std::nullopt;
  auto hit = first_intersection(target.edges.polyline(from.polyline), from.polyline, from.pos, dir, *line);
  if (!hit) return std::nullopt;
  auto obs = without_view(neighbour.observations, view);
  obs.push_back({view, hit->point, hit->polyline, hit->pos});
  if (!make_edge_point(views, std::move(obs), eps)) return std::nullopt;
  return hit;
}

}  // namespace

std::optional<ValidatedSelection> validate_selection(const ViewSet& views, const Selection& sel, const GrowthParams& params) {
  if (sel.view_a == sel.view_b || sel.view_a == sel.seed.view || sel.view_b == sel.seed.view) return std::nullopt;
  std::vector<PointObservation> obs{{sel.seed.view, sel.seed.point, sel.seed.polyline, sel.seed.pos},
                                    {sel.view_a, sel.cand_a.point, sel.cand_a.polyline, sel.cand_a.pos},
                                    {sel.view_b, sel.cand_b.point, sel.cand_b.polyline, sel.cand_b.pos}};
  auto start = make_edge_point(views, std::move(obs), params.eps_px);
  if (!start) return std::nullopt;

  std::optional<DirectionTriple> found;
  int survivors = 0;
  for (int da : {1, -1}) {
    for (int db : {1, -1}) {
      Polyline3D probe;
      probe.points = {*start};
      probe.seed_view = sel.seed.view;
      probe.directions = {{sel.seed.view, 1}, {sel.view_a, da}, {sel.view_b, db}};
      if (grow_step(views, probe, 1, params) || grow_step(views, probe, -1, params)) {
        ++survivors;
        found = DirectionTriple{{sel.seed.view, sel.view_a, sel.view_b}, {1, da, db}};
      }
    }
  }
  if (survivors != 1) return std::nullopt;
  return ValidatedSelection{std::move(*start), *found};
}

ResolveOutcome resolve_pepc(const ViewSet& views, const Pepc& pepc, const GrowthParams& params) {
  ResolveOutcome out;
  std::vector<std::pair<ViewId, std::size_t>> ranked;
  for (const auto& [view, cands] : pepc.candidates) {
    if (!cands.empty() && view != pepc.seed.view) ranked.emplace_back(view, cands.size());
  }
  if (ranked.size() < 2) {
    out.status = ResolveStatus::TooFewViews;
    return out;
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  for (std::size_t i = 0; i < ranked.size(); ++i) {
    for (std::size_t j = i + 1; j < ranked.size(); ++j) {
      const ViewId va = ranked[i].first;
      const ViewId vb = ranked[j].first;
      std::vector<std::pair<Selection, ValidatedSelection>> valid;
      for (const auto& ca : pepc.candidates.at(va)) {
        for (const auto& cb : pepc.candidates.at(vb)) {
          Selection sel{pepc.seed, va, ca, vb, cb};
          ++out.selections_tested;
          if (auto v = validate_selection(views, sel, params)) valid.emplace_back(sel, std::move(*v));
        }
      }
      if (valid.size() == 1) {
        out.status = ResolveStatus::Accepted;
        out.selection = valid.front().first;
        out.accepted = std::move(valid.front().second);
        return out;
      }
      if (valid.size() > 1) {
        out.status = ResolveStatus::Ambiguous;
        return out;
      }
    }
  }
  out.status = ResolveStatus::NoValidSelection;
  return out;
}

Polyline3D follow_edge(const ViewSet& views, const EdgePoint3D& start, const DirectionTriple& dirs,
                       const GrowthParams& params) {
  Polyline3D pl;
  pl.points = {start};
  pl.seed_view = dirs.views[0];
  pl.anchor = 0;
  for (std::size_t i = 0; i < 3; ++i) pl.directions[dirs.views[i]] = dirs.signs[i];
  extend(views, pl, 1, params);
  extend(views, pl, -1, params);
  return pl;
}

IntegrateResult integrate_view(const ViewSet& views, Polyline3D pl, ViewId view, const CandidatePoint& candidate,
                               const GrowthParams& params) {
  IntegrateResult result{pl, false};
  if (pl.points.empty() || pl.directions.count(view) || !views.find(view)) return result;
  const EdgePoint3D& anchor = pl.points[pl.anchor];
  if (anchor.find(view)) return result;

  auto anchor_obs = anchor.observations;
  anchor_obs.push_back({view, candidate.point, candidate.polyline, candidate.pos});
  auto new_anchor = make_edge_point(views, std::move(anchor_obs), params.eps_px);
  if (!new_anchor) return result;

  std::vector<int> valid;
  for (int d : {1, -1}) {
    int matched = 0;
    for (int orientation : {1, -1}) {
      const auto idx = static_cast<std::ptrdiff_t>(pl.anchor) + orientation;
      if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(pl.points.size())) continue;
      if (match_neighbour(views, pl, pl.points[static_cast<std::size_t>(idx)], view, candidate, orientation * d, params.eps_px)) {
        ++matched;
      }
    }
    if (matched > 0) valid.push_back(d);
  }
  if (valid.size() != 1) return result;
  const int d = valid.front();

  pl.directions[view] = d;
  pl.points[pl.anchor] = std::move(*new_anchor);
  for (int orientation : {1, -1}) {
    CandidatePoint prev = candidate;
    for (auto idx = static_cast<std::ptrdiff_t>(pl.anchor) + orientation;
         idx >= 0 && idx < static_cast<std::ptrdiff_t>(pl.points.size()); idx += orientation) {
      EdgePoint3D& p = pl.points[static_cast<std::size_t>(idx)];
      const PointObservation* seed_obs = p.find(pl.seed_view);
      if (!seed_obs || p.find(view)) break;
      auto line = try_epipolar_line(views.at(pl.seed_view).camera, views.at(view).camera, seed_obs->uv);
      if (!line) break;
      auto hit = first_intersection(views.at(view).edges.polyline(prev.polyline), prev.polyline, prev.pos, orientation * d, *line);
      if (!hit) break;
      auto obs = p.observations;
      obs.push_back({view, hit->point, hit->polyline, hit->pos});
      auto updated = make_edge_point(views, std::move(obs), params.eps_px);
      if (!updated) break;
      p = std::move(*updated);
      prev = *hit;
    }
  }
  extend(views, pl, 1, params);
  extend(views, pl, -1, params);
  return {std::move(pl), true};
}

Polyline3D refine_visibility(const ViewSet& views, Polyline3D pl, double d_sev, const GrowthParams& params) {
  for (const auto& v : views) {
    const ViewId view = v.camera.id();
    for (std::size_t i = 0; i < pl.points.size(); ++i) {
      EdgePoint3D& p = pl.points[i];
      if (p.find(view)) continue;
      auto q = try_project(v.camera, p.position);
      if (!q || !v.camera.contains(*q)) continue;
      auto near = v.edges.near(*q, d_sev);
      if (near.size() != 1) continue;
      const CandidatePoint c{near.front().closest.point, near.front().polyline, near.front().closest.pos};
      auto obs = p.observations;
      obs.push_back({view, c.point, c.polyline, c.pos});
      auto updated = make_edge_point(views, std::move(obs), params.eps_px);
      if (!updated) continue;

      int valid_count = 0;
      for (int d : {1, -1}) {
        bool ok = true;
        bool any = false;
        for (int orientation : {1, -1}) {
          const auto idx = static_cast<std::ptrdiff_t>(i) + orientation;
          if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(pl.points.size())) continue;
          any = true;
          if (!match_neighbour(views, pl, pl.points[static_cast<std::size_t>(idx)], view, c, orientation * d, params.eps_px)) {
            ok = false;
          }
        }
        if (ok && any) ++valid_count;
      }
      if (valid_count != 1) continue;
      p = std::move(*updated);
    }
  }
  return pl;
}

double median_observation_count(std::span<const Polyline3D> edges) {
  std::vector<std::size_t> counts;
  for (const auto& e : edges) {
    for (const auto& p : e.points) counts.push_back(p.observation_count());
  }
  if (counts.empty()) return 0.0;
  std::sort(counts.begin(), counts.end());
  const std::size_t n = counts.size();
  if (n % 2 == 1) return static_cast<double>(counts[n / 2]);
  return 0.5 * static_cast<double>(counts[n / 2 - 1] + counts[n / 2]);
}

double outlier_threshold(double median_count) { return std::max(4.0, median_count / 2.0 + 1.0); }

std::vector<Polyline3D> filter_outliers(std::vector<Polyline3D> edges) {
  if (edges.empty()) return edges;
  const double k_v = outlier_threshold(median_observation_count(edges));
  std::vector<Polyline3D> out;
  for (auto& e : edges) {
    if (e.points.empty()) continue;
    double sum = 0.0;
    for (const auto& p : e.points) sum += static_cast<double>(p.observation_count());
    if (sum / static_cast<double>(e.points.size()) >= k_v) out.push_back(std::move(e));
  }
  return out;
}

bool satisfies_contract(const ViewSet& views, const EdgePoint3D& p, double eps) {
  if (p.observations.size() < 3) return false;
  std::vector<ImageObservation> obs;
  for (const auto& o : p.observations) {
    const ViewData* v = views.find(o.view);
    if (!v) return false;
    obs.push_back({&v->camera, o.uv});
  }
  auto tri = try_triangulate(obs);
  if (!tri || tri->max_reproj_error > eps) return false;
  for (const auto& o : obs) {
    auto q = try_project(*o.camera, p.position);
    if (!q || (*q - o.uv).norm() > eps) return false;
  }
  return true;
}

}  // namespace edgeforge
