#include "support.hpp"

#include "edgeforge/synth.hpp"

#include <doctest.h>

#include <Eigen/Geometry>

using namespace edgeforge;
using namespace edgeforge::testing;

namespace {

SyntheticSpec single_segment(double dropout = 0.0) {
  SyntheticSpec spec;
  spec.polylines = {straight_segment(Point3(-0.8, -0.4, -0.6), Point3(0.7, 0.5, 0.6))};
  spec.rig.count = 3;
  spec.refs.on_edge = 50;
  spec.refs.off_edge = 0;
  spec.noise.dropout = dropout;
  return spec;
}

GroundTruth truth_of(std::vector<Chain3> chains) {
  GroundTruth t;
  Point3 lo = chains[0][0], hi = chains[0][0];
  for (const auto& c : chains) {
    for (const auto& p : c) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  }
  t.chains = std::move(chains);
  t.scene_diagonal = (hi - lo).norm();
  return t;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("noiseless raster holds exactly the projected segment") {
  const auto spec = single_segment();
  const auto s = generate(spec);
  REQUIRE(s.images.size() == 3);
  const auto& seg = spec.polylines[0];
  for (const auto& cam : s.cameras) {
    const auto& img = s.images.at(cam.id());
    const Point2 a = project(cam, seg[0]);
    const Point2 b = project(cam, seg[1]);
    // Every lit pixel is on the projected segment.
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        if (img.at(x, y)) CHECK(point_segment_distance(Point2(x, y), a, b) <= 0.5 * std::sqrt(2.0));
      }
    }
    // Every point of the projected segment has a lit pixel next to it.
    const double len = (b - a).norm();
    for (double s_ = 0.0; s_ <= len; s_ += 0.25) {
      const Point2 p = a + (b - a) * (s_ / len);
      const int x = static_cast<int>(std::lround(p.x()));
      const int y = static_cast<int>(std::lround(p.y()));
      bool lit = false;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx >= 0 && ny >= 0 && nx < img.width && ny < img.height) lit = lit || img.at(nx, ny);
        }
      }
      CHECK(lit);
    }
    // The line is one pixel thin: a single polyline without junctions.
    CHECK(extract_polylines(build_graph(img)).size() == 1);
  }
}

TEST_CASE("generation is deterministic for a fixed seed") {
  auto spec = cube_helix_spec();
  spec.rig.count = 2;
  const auto a = generate(spec);
  const auto b = generate(spec);
  for (const auto& [view, img] : a.images) CHECK(img.mask == b.images.at(view).mask);
  REQUIRE(a.refs.size() == b.refs.size());
  for (std::size_t i = 0; i < a.refs.size(); ++i) CHECK(a.refs[i].position == b.refs[i].position);
  spec.seed = 2;
  const auto c = generate(spec);
  CHECK(c.images.at(0).mask != a.images.at(0).mask);
}

TEST_CASE("dropout follows binomial statistics") {
  const auto clean = generate(single_segment(0.0));
  const auto noisy = generate(single_segment(0.3));
  for (const auto& [view, img] : clean.images) {
    const double n = static_cast<double>(img.count());
    const double kept = static_cast<double>(noisy.images.at(view).count());
    const double sigma = std::sqrt(n * 0.3 * 0.7);
    CHECK(std::abs(kept - 0.7 * n) <= 3.0 * sigma);
    for (std::size_t i = 0; i < img.mask.size(); ++i) {
      if (noisy.images.at(view).mask[i]) CHECK(img.mask[i]);
    }
  }
}

TEST_CASE("on-edge reference points sit on the rasterized chain") {
  const auto s = generate(single_segment());
  CHECK(s.refs.size() == 50);
  for (const auto& [view, img] : s.images) {
    const auto g = build_graph(img);
    for (const auto& r : s.refs) {
      const auto it = r.observations.find(view);
      if (it == r.observations.end()) continue;
      double d = std::numeric_limits<double>::infinity();
      for (auto [a, b] : g.edges()) d = std::min(d, point_segment_distance(it->second, g.node(a), g.node(b)));
      CHECK(d <= 0.5);
    }
  }
}

TEST_CASE("spec json and validation") {
  const auto spec = synthetic_spec_from_json(R"({"preset": "cube_helix", "seed": 4, "noise": {"dropout": 0.1}})");
  CHECK(spec.polylines.size() == 13);
  CHECK(spec.seed == 4);
  CHECK(spec.noise.dropout == 0.1);
  CHECK(spec.rig.count == 6);
  const auto custom = synthetic_spec_from_json(
      R"({"shapes": [{"type": "segment", "a": [0, 0, 0], "b": [1, 0, 0]}], "rig": {"count": 3}})");
  CHECK(custom.polylines.size() == 1);
  CHECK(custom.rig.count == 3);
  SyntheticSpec bad = single_segment();
  bad.rig.count = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = single_segment(1.5);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = single_segment();
  bad.polylines.push_back({Point3::Zero()});
  CHECK_THROWS_AS(generate(bad), std::invalid_argument);
}

TEST_CASE("ground truth json round trip") {
  const auto t = truth_of({helix(Point3::Zero(), 0.5, -0.8, 0.8, 1.5)});
  const auto back = ground_truth_from_json(ground_truth_to_json(t));
  REQUIRE(back.chains.size() == 1);
  CHECK(back.chains[0] == t.chains[0]);
  CHECK(back.scene_diagonal == t.scene_diagonal);
}

TEST_CASE("evaluate: identity, uniform offset and rigid invariance") {
  SUBCASE("identity") {
    const auto t = truth_of(cube_wireframe(Point3::Zero(), 2.0));
    const auto m = evaluate(std::span<const Chain3>(t.chains), t);
    CHECK(m.recall == doctest::Approx(1.0));
    CHECK(m.precision == 1.0);
    CHECK(m.mae == doctest::Approx(0.0));
    CHECK(m.rmse == doctest::Approx(0.0));
  }
  SUBCASE("offset by two tau") {
    const auto t = truth_of({straight_segment(Point3(0, 0, 0), Point3(4, 0, 0))});
    const double tau = 0.005 * t.scene_diagonal;
    const std::vector<Chain3> moved{straight_segment(Point3(0, 2 * tau, 0), Point3(4, 2 * tau, 0))};
    const auto m = evaluate(std::span<const Chain3>(moved), t);
    CHECK(m.tau == doctest::Approx(tau));
    CHECK(m.recall == 0.0);
    CHECK(m.precision == 0.0);
    CHECK(m.mae == doctest::Approx(2 * tau).epsilon(1e-9));
    CHECK(m.max_distance == doctest::Approx(2 * tau).epsilon(1e-9));
  }
  SUBCASE("rigid transform") {
    std::mt19937_64 rng(91);
    const auto t = truth_of({helix(Point3::Zero(), 0.5, -0.8, 0.8, 1.5), straight_segment(Point3(-1, -1, -1), Point3(1, -1, -1))});
    std::normal_distribution<double> noise(0.0, 0.01);
    std::vector<Chain3> recon;
    for (const auto& c : t.chains) {
      Chain3 r;
      for (std::size_t i = 0; i < c.size(); i += 2) r.push_back(c[i] + Point3(noise(rng), noise(rng), noise(rng)));
      if (r.size() < 2) r.push_back(c.back());
      recon.push_back(r);
    }
    const Eigen::Matrix3d R = Eigen::AngleAxisd(0.7, Point3(1, 2, 3).normalized()).toRotationMatrix();
    const Point3 T(5, -3, 2);
    auto move = [&](const std::vector<Chain3>& cs) {
      std::vector<Chain3> out;
      for (const auto& c : cs) {
        Chain3 m;
        for (const auto& p : c) m.push_back(R * p + T);
        out.push_back(m);
      }
      return out;
    };
    GroundTruth t2 = t;
    t2.chains = move(t.chains);
    const auto moved = move(recon);
    const auto a = evaluate(std::span<const Chain3>(recon), t);
    const auto b = evaluate(std::span<const Chain3>(moved), t2);
    CHECK(std::abs(a.recall - b.recall) < 1e-9);
    CHECK(std::abs(a.precision - b.precision) < 1e-9);
    CHECK(std::abs(a.mae - b.mae) < 1e-9);
    CHECK(std::abs(a.rmse - b.rmse) < 1e-9);
    CHECK(a.recall > 0.5);
    CHECK(a.precision < 1.0);
  }
}

TEST_CASE("helix and cube construction") {
  const auto cube = cube_wireframe(Point3(1, 1, 1), 2.0);
  REQUIRE(cube.size() == 12);
  for (const auto& e : cube) CHECK((e.back() - e.front()).norm() == doctest::Approx(2.0));
  const auto h = helix(Point3::Zero(), 0.5, -0.8, 0.8, 1.5, 128);
  CHECK(h.size() == 193);
  for (const auto& p : h) CHECK(std::hypot(p.x(), p.y()) == doctest::Approx(0.5));
  CHECK(h.front().z() == doctest::Approx(-0.8));
  CHECK(h.back().z() == doctest::Approx(0.8));
}

}
