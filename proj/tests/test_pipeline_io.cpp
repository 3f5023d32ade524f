#include "support.hpp"

#include "edgeforge/image_io.hpp"
#include "edgeforge/ply.hpp"
#include "edgeforge/synth.hpp"

#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace edgeforge;
using namespace edgeforge::testing;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("edgeforge_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

const char* kMinimalScene = R"({
  "cameras": [
    {"id": 0, "K": [100, 0, 50, 0, 100, 50, 0, 0, 1], "R": [1, 0, 0, 0, 1, 0, 0, 0, 1], "C": [0, 0, 0], "width": 100, "height": 100},
    {"id": 1, "K": [100, 0, 50, 0, 100, 50, 0, 0, 1], "R": [1, 0, 0, 0, 1, 0, 0, 0, 1], "C": [1, 0, 0], "width": 100, "height": 100}
  ],
  "points": [
    {"id": 5, "xyz": [0.5, 0.25, 10], "obs": [{"view": 0, "uv": [55, 52.5]}, {"view": VIEW, "uv": [45, 52.5]}]}
  ],
  "edge_images": {"0": "a.pgm", "1": "b.pgm"}
})";

std::string minimal_scene(int second_view = 1) {
  std::string s = kMinimalScene;
  s.replace(s.find("VIEW"), 4, std::to_string(second_view));
  return s;
}

fs::path minimal_dir(const std::string& name) {
  const fs::path dir = fresh_dir(name);
  write_pgm(EdgeImage::blank(100, 100), dir / "a.pgm");
  write_pgm(EdgeImage::blank(100, 100), dir / "b.pgm");
  return dir;
}

Polyline3D chain3(const std::vector<Point3>& pts) {
  Polyline3D pl;
  for (const auto& p : pts) pl.points.push_back({p, {}, 0.0});
  return pl;
}

// Reads an ASCII PLY body without the library parser.
struct PlainPly {
  std::size_t vertices = 0;
  std::size_t edges = 0;
  std::vector<std::vector<std::string>> rows;
};

PlainPly plain_read(const std::string& text) {
  PlainPly out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line) && line != "end_header") {
    std::istringstream ls(line);
    std::string word, name;
    std::size_t n = 0;
    ls >> word;
    if (word == "element") {
      ls >> name >> n;
      (name == "vertex" ? out.vertices : out.edges) = n;
    }
  }
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<std::string> row;
    for (std::string tok; ls >> tok;) row.push_back(tok);
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace

TEST_SUITE("pipeline_io") {

TEST_CASE("load_scene: minimal scene") {
  const fs::path dir = minimal_dir("minimal");
  write_file(dir / "scene.json", minimal_scene());
  const Scene s = load_scene(dir / "scene.json");
  CHECK(s.cameras.size() == 2);
  REQUIRE(s.ref_points.size() == 1);
  CHECK(s.ref_points[0].id == 5);
  CHECK(s.ref_points[0].observations.at(1) == Point2(45, 52.5));
  CHECK(s.edge_image_path(1) == dir / "b.pgm");
  CHECK(s.camera(1)->center() == Point3(1, 0, 0));
  CHECK(scene_diagonal(s.ref_points) == 0.0);
}

TEST_CASE("load_scene: errors") {
  const fs::path dir = minimal_dir("errors");
  SUBCASE("dangling view") {
    try {
      parse_scene(minimal_scene(7), dir);
      FAIL("expected an error");
    } catch (const SceneError& e) {
      CHECK(e.code() == SceneErrc::DanglingViewReference);
      CHECK(std::string(e.what()).find('7') != std::string::npos);
    }
  }
  SUBCASE("missing edge image") {
    fs::remove(dir / "b.pgm");
    try {
      parse_scene(minimal_scene(), dir);
      FAIL("expected an error");
    } catch (const SceneError& e) {
      CHECK(e.code() == SceneErrc::MissingEdgeImage);
    }
    CHECK_NOTHROW(parse_scene(minimal_scene(), dir, false));
  }
  SUBCASE("syntax error reports a line") {
    try {
      parse_scene("{\n  \"cameras\": [\n  oops\n]}", dir);
      FAIL("expected an error");
    } catch (const SceneError& e) {
      CHECK(e.code() == SceneErrc::ParseError);
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  SUBCASE("bad field is named") {
    std::string s = minimal_scene();
    s.replace(s.find("\"K\": [100"), 9, "\"K\": [\"x\"");
    try {
      parse_scene(s, dir);
      FAIL("expected an error");
    } catch (const SceneError& e) {
      CHECK(e.code() == SceneErrc::ParseError);
      CHECK(std::string(e.what()).find("cameras[0].K") != std::string::npos);
    }
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_scene(dir / "none.json"), SceneError); }
}

TEST_CASE("scene round trip is byte-identical") {
  const fs::path dir = minimal_dir("roundtrip");
  write_file(dir / "scene.json", minimal_scene());
  const Scene s = load_scene(dir / "scene.json");
  save_scene(s, dir / "saved.json");
  const std::string once = read_file(dir / "saved.json");
  save_scene(load_scene(dir / "saved.json"), dir / "saved2.json");
  CHECK(read_file(dir / "saved2.json") == once);
  CHECK(once == scene_to_json(s));
}

TEST_CASE("config: defaults, json and validation") {
  const PipelineConfig d;
  CHECK(d.eps_px == 2.5);
  CHECK(d.alpha_r_deg == 20.0);
  CHECK(d.top_fraction == 0.10);
  CHECK(d.step_px == 10.0);
  CHECK(d.smooth_tol_px == 1.0);
  CHECK(d.min_loop_px == 4.0);
  CHECK(d.d_plmatch_px == 4.0);
  CHECK(d.d_sev_px == 3.0);
  CHECK(d.r_outer_rel == 0.01);
  CHECK(d.r_inner_ratio == doctest::Approx(1.0 / 3.0));
  CHECK(d.min_sim == 0.05);
  CHECK(outlier_threshold(10) == 6.0);

  const auto cfg = config_from_json(R"({"eps_px": 2.0, "d_sev_px": 2.5, "seed": 9})");
  CHECK(cfg.eps_px == 2.0);
  CHECK(cfg.d_sev_px == 2.5);
  CHECK(config_to_json(config_from_json(config_to_json(cfg))) == config_to_json(cfg));
  CHECK_THROWS_AS(config_from_json(R"({"eps": 2.0})"), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(R"({"eps_px": -1})"), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(R"({"r_inner_ratio": 1.0})"), std::invalid_argument);
}

TEST_CASE("sample_edges: spacing arithmetic") {
  const std::vector<Point3> seg{Point3(0, 0, 0), Point3(1, 0, 0)};
  const auto five = sample_chain(seg, 0.25);
  REQUIRE(five.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK((five[static_cast<std::size_t>(i)] - Point3(0.25 * i, 0, 0)).norm() < 1e-12);
  const auto two = sample_chain(seg, 3.0);
  REQUIRE(two.size() == 2);
  CHECK(two.front() == seg.front());
  CHECK(two.back() == seg.back());
  CHECK_THROWS_AS(sample_chain(seg, 0.0), std::invalid_argument);

  std::mt19937_64 rng(83);
  for (int i = 0; i < 200; ++i) {
    std::vector<Point3> chain{random_point(rng)};
    for (int k = 0; k < 1 + static_cast<int>(rng() % 8); ++k) chain.push_back(chain.back() + 0.3 * random_point(rng));
    const double spacing = std::uniform_real_distribution<double>(0.01, 0.5)(rng);
    const std::vector<Polyline3D> pls{chain3(chain)};
    const auto cloud = sample_edges(pls, spacing);
    REQUIRE(cloud.size() >= 2);
    CHECK((cloud.front().position - chain.front()).norm() == 0.0);
    CHECK((cloud.back().position - chain.back()).norm() == 0.0);
    for (std::size_t k = 0; k < cloud.size(); ++k) {
      CHECK(cloud[k].polyline == 0);
      double d = std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s + 1 < chain.size(); ++s) {
        const Point3 ab = chain[s + 1] - chain[s];
        const double t = std::clamp((cloud[k].position - chain[s]).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
        d = std::min(d, (chain[s] + t * ab - cloud[k].position).norm());
      }
      CHECK(d < 1e-9);
      if (k > 0) CHECK((cloud[k].position - cloud[k - 1].position).norm() <= spacing + 1e-9);
    }
  }
}

TEST_CASE("ply: counts, header and exact re-parse") {
  EdgeSetOutput out;
  out.polylines.push_back(chain3({Point3(0.1, 0.2, 0.3), Point3(1.0 / 3.0, -2.5e-7, 12345.678)}));
  SUBCASE("two-point wireframe") {
    const std::string text = ply_to_string(out, PlyMode::Wireframe);
    const auto plain = plain_read(text);
    CHECK(plain.vertices == 2);
    CHECK(plain.edges == 1);
    CHECK(plain.rows.size() == 3);
    CHECK(plain.rows[2] == std::vector<std::string>{"0", "1"});
    for (std::size_t i = 0; i < 2; ++i) {
      for (int c = 0; c < 3; ++c) {
        const float parsed = std::strtof(plain.rows[i][static_cast<std::size_t>(c)].c_str(), nullptr);
        CHECK(parsed == static_cast<float>(out.polylines[0].points[i].position[c]));
      }
    }
    const auto data = parse_ply(text);
    CHECK(data.edges == std::vector<std::pair<int, int>>{{0, 1}});
    CHECK(ply_chains(data).size() == 1);
  }
  SUBCASE("points mode") {
    out.sampled_cloud = sample_edges(out.polylines, 1e6);
    out.sampled_cloud.push_back({Point3(7, 8, 9), 3});
    const std::string text = ply_to_string(out, PlyMode::Points);
    const auto plain = plain_read(text);
    CHECK(plain.vertices == 3);
    CHECK(plain.edges == 0);
    CHECK(plain.rows.size() == 3);
    const auto data = parse_ply(text);
    CHECK(data.vertex_polyline == std::vector<int>{0, 0, 3});
  }
  SUBCASE("write failure") {
    CHECK_THROWS(export_ply(out, fs::path("/nonexistent_dir/x/y.ply"), PlyMode::Points));
  }
}

TEST_CASE("threads: explicit request, environment and coverage") {
  CHECK(resolve_thread_count(3) == 3);
  setenv("EDGEFORGE_THREADS", "2", 1);
  CHECK(resolve_thread_count(0) == 2);
  unsetenv("EDGEFORGE_THREADS");
  CHECK(resolve_thread_count(0) >= 1);
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i].fetch_add(1); });
  for (const auto& h : hits) CHECK(h.load() == 1);
}

TEST_CASE("run_pipeline: empty scene gives empty output") {
  const auto cams = arc_rig(3);
  std::map<ViewId, EdgeImage> images;
  for (const auto& c : cams) images.emplace(c.id(), EdgeImage::blank(c.width(), c.height()));
  const auto out = run_pipeline(cams, {}, images, PipelineConfig{});
  CHECK(out.polylines.empty());
  CHECK(out.sampled_cloud.empty());
}

TEST_CASE("run_pipeline: deterministic and within the contract") {
  SyntheticSpec spec;
  spec.polylines = cube_wireframe(Point3::Zero(), 2.0);
  spec.refs.on_edge = 120;
  spec.refs.off_edge = 20;
  const auto scene = generate(spec);
  PipelineConfig cfg;
  cfg.threads = 2;
  PipelineStats stats;
  const auto a = run_pipeline(scene.cameras, scene.refs, scene.images, cfg, {nullptr, &stats});
  cfg.threads = 1;
  const auto b = run_pipeline(scene.cameras, scene.refs, scene.images, cfg);
  CHECK(ply_to_string(a, PlyMode::Wireframe) == ply_to_string(b, PlyMode::Wireframe));
  CHECK(ply_to_string(a, PlyMode::Points) == ply_to_string(b, PlyMode::Points));
  CHECK_FALSE(a.polylines.empty());
  CHECK(stats.pecs > 0);
  CHECK(stats.pepcs > 0);
  const double k_v = outlier_threshold(median_observation_count(a.polylines));
  for (const auto& pl : a.polylines) {
    CHECK(pl.points.size() >= 2);
    double sum = 0.0;
    for (const auto& p : pl.points) {
      CHECK(p.observation_count() >= 3);
      CHECK(p.max_reproj_error <= cfg.eps_px);
      sum += static_cast<double>(p.observation_count());
    }
    CHECK(sum / static_cast<double>(pl.points.size()) >= k_v);
  }
  const auto m = evaluate(a.polylines, scene.truth);
  CHECK(m.recall > 0.9);
  CHECK(m.precision > 0.95);
}

TEST_CASE("run_pipeline: scene on disk") {
  SyntheticSpec spec;
  spec.polylines = {straight_segment(Point3(-1, -1, -1), Point3(1, 1, 1))};
  spec.refs.on_edge = 40;
  spec.refs.off_edge = 0;
  const fs::path dir = fresh_dir("disk");
  const fs::path scene_path = write_synthetic(generate(spec), dir);
  const Scene s = load_scene(scene_path);
  CHECK(s.cameras.size() == 6);
  const auto img = read_edge_image(s.edge_image_path(0));
  CHECK(img.count() > 0);
  std::ostringstream log;
  const auto out = run_pipeline(s, PipelineConfig{}, {&log, nullptr});
  CHECK_FALSE(log.str().empty());
  CHECK(log.str().front() == '{');
  const auto truth = ground_truth_from_json(read_file(dir / "ground_truth.json"));
  CHECK(truth.chains.size() == 1);
  CHECK(evaluate(out.polylines, truth).recall > 0.9);
}

}
