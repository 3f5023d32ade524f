#include "support.hpp"

#include "edgeforge/validation.hpp"

#include <doctest.h>

using namespace edgeforge;
using namespace edgeforge::testing;

namespace {

const Point3 kA(-0.3, -0.2, -0.6);
const Point3 kB(0.2, 0.3, 0.6);

// World offset that moves the image of the origin by `px` along the
// camera's image x axis.
Point3 image_shift(const CameraView& cam, double px) {
  return px * cam.depth(Point3::Zero()) / cam.focal() * cam.R().row(0).transpose();
}

// Copy of the chain scaled about `c`: identical image from a camera at `c`.
std::vector<Point3> mirrored(const std::vector<Point3>& chain, const Point3& c, double s) {
  std::vector<Point3> out;
  for (const auto& p : chain) out.push_back(c + s * (p - c));
  return out;
}

Point2 seed_point(const ViewSet& views, ViewId view, double fraction) {
  const auto& pl = views.at(view).edges.polyline(0);
  return pl.point_at(pl.at_arc_length(fraction * pl.length()));
}

double chain_distance3(const Point3& p, const std::vector<Point3>& chain) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    const Point3 ab = chain[i + 1] - chain[i];
    const double t = std::clamp((p - chain[i]).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    d = std::min(d, (chain[i] + t * ab - p).norm());
  }
  return d;
}

Polyline3D grow_from(const ViewSet& views, const Pepc& pepc, const GrowthParams& params) {
  const auto out = resolve_pepc(views, pepc, params);
  REQUIRE(out.status == ResolveStatus::Accepted);
  return follow_edge(views, out.accepted->point, out.accepted->directions, params);
}

Pepc restrict_views(Pepc p, std::initializer_list<ViewId> keep) {
  std::map<ViewId, std::vector<CandidatePoint>> c;
  for (ViewId v : keep) {
    if (p.candidates.count(v)) c[v] = p.candidates[v];
  }
  p.candidates = std::move(c);
  return p;
}

EdgePoint3D point_with(std::size_t observations) {
  EdgePoint3D p;
  for (std::size_t v = 0; v < observations; ++v) p.observations.push_back({static_cast<ViewId>(v), Point2::Zero(), 0, {}});
  return p;
}

Polyline3D polyline_with(std::initializer_list<std::size_t> counts) {
  Polyline3D pl;
  for (auto c : counts) pl.points.push_back(point_with(c));
  return pl;
}

}  // namespace

TEST_SUITE("validation") {

TEST_CASE("validate_selection: ground-truth triple") {
  const auto cams = arc_rig(3);
  const auto views = views_of(cams, {segment3(kA, kB)});
  const Pepc p = make_pepc(views, 0, seed_point(views, 0, 0.4));
  REQUIRE(p.candidates.size() == 2);
  const Selection sel{p.seed, 1, p.candidates.at(1)[0], 2, p.candidates.at(2)[0]};
  const auto v = validate_selection(views, sel, {});
  REQUIRE(v.has_value());
  CHECK(v->point.max_reproj_error < 1e-6);
  CHECK(v->point.observations.size() == 3);
}

TEST_CASE("validate_selection: decoy candidate off the true curve is rejected") {
  const auto cams = arc_rig(3);
  // The decoy's image in view 2 sits about 8 px from the true one.
  const Point3 shift = image_shift(cams[2], 8.0);
  const auto views = views_of(cams, {segment3(kA, kB), segment3(kA + shift, kB + shift)},
                              [](ViewId v, std::size_t i) { return i == 0 || v == 2; });
  const Pepc p = make_pepc(views, 0, seed_point(views, 0, 0.4));
  REQUIRE(p.candidates.at(2).size() == 2);
  int accepted = 0;
  for (const auto& c : p.candidates.at(2)) {
    const Selection sel{p.seed, 1, p.candidates.at(1)[0], 2, c};
    if (validate_selection(views, sel, {})) {
      ++accepted;
      CHECK(c.polyline == 0);
    }
  }
  CHECK(accepted == 1);
}

TEST_CASE("validate_selection: collinear centers with an edge in the epipolar plane") {
  std::vector<CameraView> cams;
  for (int i = 0; i < 3; ++i) cams.push_back(look_at_camera(i, 900, 1000, 800, Point3(-2.0 + 2.0 * i, -6.0, 0.0), Point3(-2.0 + 2.0 * i, 0.0, 0.0)));
  // Edge parallel to the baseline: every image of it lies on an epipolar line.
  const auto views = views_of(cams, {segment3(Point3(-0.5, 0, 0), Point3(0.5, 0, 0))});
  const auto& seed = views.at(1).edges.polyline(0);
  const ChainPos pos = seed.at_arc_length(0.5 * seed.length());
  const PepcSeed s{1, seed.point_at(pos), 0, pos};
  const auto& a = views.at(0).edges.polyline(0);
  const auto& b = views.at(2).edges.polyline(0);
  const auto ca = a.closest(s.point);
  const auto cb = b.closest(s.point);
  const Selection sel{s, 0, {ca.point, 0, ca.pos}, 2, {cb.point, 0, cb.pos}};
  CHECK_FALSE(validate_selection(views, sel, {}).has_value());
}

TEST_CASE("resolve_pepc: unique, ambiguous and empty") {
  const auto cams = arc_rig(4);
  const auto truth = segment3(kA, kB);

  SUBCASE("one true candidate per view") {
    const auto views = views_of(cams, {truth});
    const auto out = resolve_pepc(views, make_pepc(views, 0, seed_point(views, 0, 0.5)), {});
    CHECK(out.status == ResolveStatus::Accepted);
  }
  SUBCASE("mirrored decoy gives two consistent selections") {
    const auto decoy = mirrored(truth, cams[0].center(), 1.25);
    const auto views = views_of(cams, {truth, decoy}, [](ViewId v, std::size_t i) { return v != 0 || i == 0; });
    const Pepc p = make_pepc(views, 0, seed_point(views, 0, 0.5));
    for (const auto& [view, cands] : p.candidates) CHECK(cands.size() == 2);
    const auto out = resolve_pepc(views, p, {});
    CHECK(out.status == ResolveStatus::Ambiguous);
    CHECK_FALSE(out.accepted.has_value());
  }
  SUBCASE("no selection validates") {
    const auto views = views_of(cams, {truth, segment3(Point3(-0.4, 0.6, 0.7), Point3(0.5, -0.2, 0.9))},
                                [](ViewId v, std::size_t i) { return v == 0 ? i == 0 : i == 1; });
    const Pepc p = make_pepc(views, 0, seed_point(views, 0, 0.5));
    const auto out = resolve_pepc(views, p, {});
    CHECK(out.status != ResolveStatus::Accepted);
  }
  SUBCASE("too few views") {
    const auto views = views_of(cams, {truth});
    const auto out = resolve_pepc(views, restrict_views(make_pepc(views, 0, seed_point(views, 0, 0.5)), {1}), {});
    CHECK(out.status == ResolveStatus::TooFewViews);
  }
}

TEST_CASE("resolve_pepc: candidate order does not matter") {
  const auto cams = arc_rig(4);
  const auto truth = segment3(kA, kB);
  const Point3 shift = image_shift(cams[1], 10.0);
  const auto views = views_of(cams, {truth, segment3(kA + shift, kB + shift)},
                              [](ViewId v, std::size_t i) { return v != 0 || i == 0; });
  for (double f : {0.3, 0.5, 0.7}) {
    Pepc p = make_pepc(views, 0, seed_point(views, 0, f));
    const auto base = resolve_pepc(views, p, {});
    for (auto& [view, cands] : p.candidates) std::reverse(cands.begin(), cands.end());
    const auto rev = resolve_pepc(views, p, {});
    CHECK(base.status == rev.status);
    if (base.accepted && rev.accepted) CHECK((base.accepted->point.position - rev.accepted->point.position).norm() == 0.0);
  }
}

TEST_CASE("follow_edge: straight segment covers its projection") {
  const auto cams = arc_rig(3);
  const auto truth = segment3(kA, kB);
  const auto views = views_of(cams, {truth});
  const auto pl = grow_from(views, make_pepc(views, 0, seed_point(views, 0, 0.5)), {});
  const auto& seed = views.at(0).edges.polyline(0);
  const double a0 = seed.arc_length(pl.points.front().find(0)->pos);
  const double a1 = seed.arc_length(pl.points.back().find(0)->pos);
  CHECK(std::abs(a1 - a0) >= 0.9 * seed.length());
  for (const auto& p : pl.points) {
    CHECK(p.observation_count() >= 3);
    CHECK(satisfies_contract(views, p, 2.5));
    CHECK(chain_distance3(p.position, truth) < 1e-6);
  }
}

TEST_CASE("follow_edge: helix arc in five views") {
  std::vector<Point3> arc;
  for (int i = 0; i <= 96; ++i) {
    const double t = static_cast<double>(i) / 96.0;
    const double a = std::numbers::pi * (0.2 + 0.6 * t);
    arc.emplace_back(0.5 * std::cos(a), 0.5 * std::sin(a), -0.4 + 0.8 * t);
  }
  Point3 lo = arc[0], hi = arc[0];
  for (const auto& p : arc) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double diagonal = (hi - lo).norm();
  const auto cams = arc_rig(5);
  const auto views = views_of(cams, {arc});
  const auto pl = grow_from(views, make_pepc(views, 2, seed_point(views, 2, 0.5)), {});
  CHECK(pl.points.size() > 10);
  double worst = 0.0;
  for (const auto& p : pl.points) worst = std::max(worst, chain_distance3(p.position, arc));
  CHECK(worst <= 0.005 * diagonal);
}

TEST_CASE("follow_edge: seed at a chain end still grows the other way") {
  const auto cams = arc_rig(3);
  const auto views = views_of(cams, {segment3(kA, kB)});
  const auto pl = grow_from(views, make_pepc(views, 0, seed_point(views, 0, 0.0)), {});
  CHECK(pl.points.size() > 5);
  CHECK((pl.anchor == 0 || pl.anchor == pl.points.size() - 1));
}

TEST_CASE("integrate_view: true view, decoy and duplicate view") {
  const auto cams = arc_rig(4);
  const auto truth = segment3(kA, kB);
  const Point3 shift = image_shift(cams[3], 6.0);

  auto run = [&](const ViewSet& views, int polyline_in_view3) {
    const Pepc p = restrict_views(make_pepc(views, 0, seed_point(views, 0, 0.5)), {1, 2});
    Polyline3D pl = grow_from(views, p, {});
    const auto& anchor = *pl.points[pl.anchor].find(0);
    const Line2 l = epipolar_line(views.at(0).camera, views.at(3).camera, anchor.uv);
    const auto hits = intersect_polyline_line(views.at(3).edges.polyline(polyline_in_view3), polyline_in_view3, l);
    REQUIRE(hits.size() == 1);
    return std::pair{pl, integrate_view(views, pl, 3, hits[0], {})};
  };

  SUBCASE("true fourth view") {
    const auto views = views_of(cams, {truth});
    auto [before, r] = run(views, 0);
    CHECK(r.accepted);
    std::size_t with_view = 0;
    for (const auto& p : r.polyline.points) {
      CHECK(satisfies_contract(views, p, 2.5));
      with_view += p.find(3) ? 1 : 0;
    }
    CHECK(with_view >= r.polyline.points.size() / 2);
    CHECK_FALSE(integrate_view(views, r.polyline, 3, CandidatePoint{}, {}).accepted);
    CHECK_FALSE(integrate_view(views, r.polyline, 0, CandidatePoint{}, {}).accepted);
  }
  SUBCASE("parallel decoy six pixels away") {
    const auto views = views_of(cams, {truth, segment3(kA + shift, kB + shift)},
                                [](ViewId v, std::size_t i) { return v == 3 ? i == 1 : i == 0; });
    auto [before, r] = run(views, 0);
    CHECK_FALSE(r.accepted);
    CHECK(r.polyline.points.size() == before.points.size());
  }
}

TEST_CASE("refine_visibility: single polyline, parallel pair and occlusion") {
  const auto cams = arc_rig(4);
  const auto truth = segment3(kA, kB);
  auto grow3 = [&](const ViewSet& views) {
    return grow_from(views, restrict_views(make_pepc(views, 0, seed_point(views, 0, 0.5)), {1, 2}), {});
  };

  SUBCASE("visible in the extra view") {
    const auto views = views_of(cams, {truth});
    const auto pl = grow3(views);
    const auto refined = refine_visibility(views, pl, 3.0, {});
    std::size_t added = 0;
    for (std::size_t i = 0; i < refined.points.size(); ++i) {
      CHECK(refined.points[i].observation_count() >= pl.points[i].observation_count());
      added += refined.points[i].find(3) ? 1 : 0;
    }
    CHECK(static_cast<double>(added) >= 0.8 * static_cast<double>(refined.points.size()));
  }
  SUBCASE("two nearby polylines") {
    const Point3 shift = image_shift(cams[3], 1.5);
    const auto views = views_of(cams, {truth, segment3(kA + shift, kB + shift)},
                                [](ViewId v, std::size_t i) { return v == 3 || i == 0; });
    const auto pl = grow3(views);
    const auto refined = refine_visibility(views, pl, 3.0, {});
    for (const auto& p : refined.points) CHECK(p.find(3) == nullptr);
  }
  SUBCASE("occluded view") {
    const auto views = views_of(cams, {truth}, [](ViewId v, std::size_t) { return v != 3; });
    const auto pl = grow3(views);
    const auto refined = refine_visibility(views, pl, 3.0, {});
    REQUIRE(refined.points.size() == pl.points.size());
    for (std::size_t i = 0; i < pl.points.size(); ++i) {
      CHECK(refined.points[i].observation_count() == pl.points[i].observation_count());
      CHECK(refined.points[i].position == pl.points[i].position);
    }
  }
}

TEST_CASE("outlier threshold table") {
  const double expected[21] = {0, 4, 4, 4, 4, 4, 4, 4.5, 5, 5.5, 6, 6.5, 7, 7.5, 8, 8.5, 9, 9.5, 10, 10.5, 11};
  for (int v = 1; v <= 20; ++v) CHECK(outlier_threshold(v) == expected[v]);
}

TEST_CASE("filter_outliers: examples") {
  std::vector<Polyline3D> all4{polyline_with({4, 4, 4}), polyline_with({4, 4})};
  CHECK(median_observation_count(all4) == 4.0);
  CHECK(filter_outliers(all4).size() == 2);

  std::vector<Polyline3D> ten{polyline_with({10, 10, 10, 10, 10}), polyline_with({4, 4})};
  CHECK(median_observation_count(ten) == 10.0);
  const auto kept = filter_outliers(ten);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].points.size() == 5);

  CHECK(filter_outliers({}).empty());
}

TEST_CASE("filter_outliers: half-integer threshold is not rounded") {
  // Median 7 gives k_v = 4.5: a mean of 4.5 stays, 4.4 goes.
  std::vector<Polyline3D> edges{polyline_with({7, 7, 7, 7, 7, 7, 7, 7, 7, 7, 7, 7, 7, 7, 7}), polyline_with({4, 5}),
                                polyline_with({4, 4, 4, 5, 5})};
  CHECK(median_observation_count(edges) == 7.0);
  const auto kept = filter_outliers(edges);
  REQUIRE(kept.size() == 2);
  CHECK(kept[1].points.size() == 2);

  // Median 6 gives k_v = 4.
  std::vector<Polyline3D> six{polyline_with({6, 6, 6, 6, 6, 6, 6, 6, 6}), polyline_with({4, 4}), polyline_with({3, 4})};
  CHECK(median_observation_count(six) == 6.0);
  CHECK(filter_outliers(six).size() == 2);

  // Even count: the median is the mean of the middle pair.
  std::vector<Polyline3D> even{polyline_with({6, 7})};
  CHECK(median_observation_count(even) == 6.5);
}

}
