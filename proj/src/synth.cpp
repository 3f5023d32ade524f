#include "edgeforge/synth.hpp"

#include "edgeforge/image_io.hpp"
#include "edgeforge/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_map>

namespace edgeforge {

using nlohmann::json;

void SyntheticSpec::validate() const {
  if (rig.count < 2) throw std::invalid_argument("rig needs at least two cameras");
  if (!(rig.focal > 0.0) || rig.width <= 0 || rig.height_px <= 0) throw std::invalid_argument("invalid rig intrinsics");
  if (!(rig.orbit_radius > 0.0)) throw std::invalid_argument("orbit radius must be positive");
  for (double p : {noise.dropout, noise.spurious_density}) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("noise probabilities must lie in [0, 1]");
  }
  if (!(noise.jitter_px >= 0.0)) throw std::invalid_argument("jitter must be non-negative");
  if (refs.on_edge < 0 || refs.off_edge < 0 || refs.off_min < 0.0 || refs.off_max < refs.off_min) {
    throw std::invalid_argument("invalid reference point density");
  }
  if (!(raster_step_px > 0.0)) throw std::invalid_argument("raster step must be positive");
  for (const auto& c : polylines) {
    if (c.size() < 2) throw std::invalid_argument("ground-truth polylines need two points");
  }
}

Chain3 straight_segment(const Point3& a, const Point3& b) { return {a, b}; }

std::vector<Chain3> cube_wireframe(const Point3& center, double side) {
  const double h = side / 2.0;
  auto corner = [&](int i) {
    return Point3(center.x() + ((i & 1) ? h : -h), center.y() + ((i & 2) ? h : -h), center.z() + ((i & 4) ? h : -h));
  };
  std::vector<Chain3> edges;
  for (int i = 0; i < 8; ++i) {
    for (int bit : {1, 2, 4}) {
      if (!(i & bit)) edges.push_back(straight_segment(corner(i), corner(i | bit)));
    }
  }
  return edges;
}

Chain3 helix(const Point3& center, double radius, double z_begin, double z_end, double turns, int samples_per_turn) {
  const int n = std::max(2, static_cast<int>(std::ceil(turns * samples_per_turn)));
  Chain3 out;
  for (int i = 0; i <= n; ++i) {
    const double s = static_cast<double>(i) / n;
    const double a = 2.0 * std::numbers::pi * turns * s;
    out.emplace_back(center.x() + radius * std::cos(a), center.y() + radius * std::sin(a),
                     center.z() + z_begin + (z_end - z_begin) * s);
  }
  return out;
}

std::vector<CameraView> make_rig(const RigSpec& rig) {
  std::vector<CameraView> cams;
  for (int i = 0; i < rig.count; ++i) {
    const double a = (rig.phase_deg + 360.0 * i / rig.count) * std::numbers::pi / 180.0;
    const double z = rig.height + (i % 2 == 0 ? -rig.height_swing : rig.height_swing);
    const Point3 c = rig.look_at + Point3(rig.orbit_radius * std::cos(a), rig.orbit_radius * std::sin(a), z);
    cams.push_back(look_at_camera(i, rig.focal, rig.width, rig.height_px, c, rig.look_at));
  }
  return cams;
}

std::vector<std::array<long, 2>> line_pixels(const Point2& a, const Point2& b) {
  const bool steep = std::abs(b.y() - a.y()) > std::abs(b.x() - a.x());
  // Work in (major, minor) coordinates.
  double x0 = steep ? a.y() : a.x();
  double y0 = steep ? a.x() : a.y();
  double x1 = steep ? b.y() : b.x();
  double y1 = steep ? b.x() : b.y();
  const bool reversed = x0 > x1;
  if (reversed) {
    std::swap(x0, x1);
    std::swap(y0, y1);
  }
  const double slope = x1 > x0 ? (y1 - y0) / (x1 - x0) : 0.0;
  std::vector<std::array<long, 2>> out;
  auto plot = [&](long major, long minor) { out.push_back(steep ? std::array<long, 2>{minor, major} : std::array<long, 2>{major, minor}); };
  for (long x = std::lround(x0); x <= std::lround(x1); ++x) {
    const double xc = std::clamp(static_cast<double>(x), x0, x1);
    const double y = y0 + (xc - x0) * slope;
    const double lo = std::floor(y);
    const double frac = y - lo;
    if (1.0 - frac >= 0.5) plot(x, static_cast<long>(lo));
    if (frac >= 0.5) plot(x, static_cast<long>(lo) + 1);
  }
  if (reversed) std::reverse(out.begin(), out.end());
  return out;
}

void draw_line(EdgeImage& img, const Point2& a, const Point2& b) {
  for (const auto& [x, y] : line_pixels(a, b)) {
    if (x >= 0 && y >= 0 && x < img.width && y < img.height) img.set(static_cast<int>(x), static_cast<int>(y));
  }
}

void draw_polyline(EdgeImage& img, std::span<const Point2> pts) {
  // Pixels that an 8-connected walk does not need are dropped, so joints
  // between segments stay one pixel thin.
  std::vector<std::array<long, 2>> walk;
  auto adjacent = [](const std::array<long, 2>& p, const std::array<long, 2>& q) {
    return std::abs(p[0] - q[0]) <= 1 && std::abs(p[1] - q[1]) <= 1;
  };
  for (std::size_t i = 1; i < pts.size(); ++i) {
    for (const auto& q : line_pixels(pts[i - 1], pts[i])) {
      if (!walk.empty() && walk.back() == q) continue;
      while (walk.size() >= 2 && adjacent(walk[walk.size() - 2], q)) walk.pop_back();
      walk.push_back(q);
    }
  }
  if (pts.size() == 1) walk = line_pixels(pts[0], pts[0]);
  for (const auto& [x, y] : walk) {
    if (x >= 0 && y >= 0 && x < img.width && y < img.height) img.set(static_cast<int>(x), static_cast<int>(y));
  }
}

namespace {

double chain_length(const Chain3& c) {
  double s = 0.0;
  for (std::size_t i = 1; i < c.size(); ++i) s += (c[i] - c[i - 1]).norm();
  return s;
}

Point3 chain_point(const Chain3& c, double s) {
  for (std::size_t i = 1; i < c.size(); ++i) {
    const double len = (c[i] - c[i - 1]).norm();
    if (s <= len || i + 1 == c.size()) return c[i - 1] + (len > 0.0 ? std::clamp(s / len, 0.0, 1.0) : 0.0) * (c[i] - c[i - 1]);
    s -= len;
  }
  return c.front();
}

double chains_diagonal(std::span<const Chain3> chains) {
  bool any = false;
  Point3 lo = Point3::Zero();
  Point3 hi = Point3::Zero();
  for (const auto& c : chains) {
    for (const auto& p : c) {
      lo = any ? lo.cwiseMin(p) : p;
      hi = any ? hi.cwiseMax(p) : p;
      any = true;
    }
  }
  return (hi - lo).norm();
}

void rasterize(EdgeImage& img, const CameraView& cam, const Chain3& chain, double step_px, double jitter,
               std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, jitter > 0.0 ? jitter : 1.0);
  std::vector<Point2> pts;
  auto flush = [&] {
    draw_polyline(img, pts);
    pts.clear();
  };
  auto add = [&](const Point3& X) {
    if (cam.depth(X) <= 0.0) {
      flush();
      return;
    }
    Point2 p = project(cam, X);
    if (jitter > 0.0) p += Point2(noise(rng), noise(rng));
    pts.push_back(p);
  };
  for (std::size_t i = 1; i < chain.size(); ++i) {
    const Point3& a = chain[i - 1];
    const Point3& b = chain[i];
    int n = 1;
    if (cam.depth(a) > 0.0 && cam.depth(b) > 0.0) {
      n = std::max(1, static_cast<int>(std::ceil((project(cam, b) - project(cam, a)).norm() / step_px)));
    }
    for (int k = (i == 1 ? 0 : 1); k <= n; ++k) add(a + (b - a) * (static_cast<double>(k) / n));
  }
  flush();
}

json point3_json(const Point3& p) { return {p.x(), p.y(), p.z()}; }

Point3 point3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

SyntheticScene generate(const SyntheticSpec& spec) {
  spec.validate();
  SyntheticScene out;
  out.cameras = make_rig(spec.rig);
  out.truth.chains = spec.polylines;
  out.truth.scene_diagonal = chains_diagonal(spec.polylines);

  for (const auto& cam : out.cameras) {
    std::mt19937_64 rng(spec.seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(cam.id()) + 1);
    EdgeImage img = EdgeImage::blank(cam.width(), cam.height());
    for (const auto& chain : spec.polylines) rasterize(img, cam, chain, spec.raster_step_px, spec.noise.jitter_px, rng);
    if (spec.noise.dropout > 0.0) {
      std::bernoulli_distribution drop(spec.noise.dropout);
      for (auto& m : img.mask) {
        if (m && drop(rng)) m = 0;
      }
    }
    const auto strokes = static_cast<long>(std::lround(spec.noise.spurious_density * img.width * img.height));
    std::uniform_int_distribution<int> ux(0, img.width - 1);
    std::uniform_int_distribution<int> uy(0, img.height - 1);
    std::uniform_int_distribution<int> udir(0, 7);
    std::uniform_int_distribution<int> ulen(2, 3);
    static constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
    static constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};
    for (long s = 0; s < strokes; ++s) {
      const int x = ux(rng);
      const int y = uy(rng);
      const int d = udir(rng);
      const int len = ulen(rng);
      for (int k = 0; k < len; ++k) {
        const int px = x + k * kDx[d];
        const int py = y + k * kDy[d];
        if (px >= 0 && py >= 0 && px < img.width && py < img.height) img.set(px, py);
      }
    }
    out.images.emplace(cam.id(), std::move(img));
  }

  std::mt19937_64 rng(spec.seed);
  double total = 0.0;
  std::vector<double> lengths;
  for (const auto& c : spec.polylines) {
    lengths.push_back(chain_length(c));
    total += lengths.back();
  }
  auto random_edge_point = [&]() {
    double s = std::uniform_real_distribution<double>(0.0, total)(rng);
    for (std::size_t i = 0; i < spec.polylines.size(); ++i) {
      if (s <= lengths[i] || i + 1 == spec.polylines.size()) return chain_point(spec.polylines[i], std::min(s, lengths[i]));
      s -= lengths[i];
    }
    return Point3(Point3::Zero());
  };
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> offset(spec.refs.off_min, spec.refs.off_max);
  const int wanted = total > 0.0 ? spec.refs.on_edge + spec.refs.off_edge : 0;
  for (int k = 0; k < wanted; ++k) {
    Point3 X = random_edge_point();
    if (k >= spec.refs.on_edge) {
      Point3 dir(gauss(rng), gauss(rng), gauss(rng));
      if (dir.norm() == 0.0) dir = Point3::UnitX();
      X += dir.normalized() * offset(rng);
    }
    ReferencePoint r;
    r.id = static_cast<int>(out.refs.size());
    r.position = X;
    for (const auto& cam : out.cameras) {
      auto uv = try_project(cam, X);
      if (uv && cam.contains(*uv)) r.observations[cam.id()] = *uv;
    }
    if (r.observations.size() >= 2) out.refs.push_back(std::move(r));
  }
  return out;
}

std::string ground_truth_to_json(const GroundTruth& truth) {
  json chains = json::array();
  for (const auto& c : truth.chains) {
    json pts = json::array();
    for (const auto& p : c) pts.push_back(point3_json(p));
    chains.push_back(pts);
  }
  return json{{"scene_diagonal", truth.scene_diagonal}, {"chains", chains}}.dump(1) + "\n";
}

GroundTruth ground_truth_from_json(const std::string& text) {
  const json doc = json::parse(text);
  GroundTruth truth;
  truth.scene_diagonal = doc.at("scene_diagonal").get<double>();
  for (const auto& c : doc.at("chains")) {
    Chain3 chain;
    for (const auto& p : c) chain.push_back(point3_from(p));
    truth.chains.push_back(std::move(chain));
  }
  return truth;
}

std::filesystem::path write_synthetic(const SyntheticScene& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  Scene scene;
  scene.cameras = s.cameras;
  scene.ref_points = s.refs;
  scene.base_dir = dir;
  for (const auto& cam : s.cameras) {
    const std::string name = "view_" + std::to_string(cam.id()) + ".pgm";
    write_pgm(s.images.at(cam.id()), dir / name);
    scene.edge_image_paths[cam.id()] = name;
  }
  const auto path = dir / "scene.json";
  save_scene(scene, path);
  std::ofstream gt(dir / "ground_truth.json");
  if (!gt) throw std::runtime_error("cannot write ground truth in " + dir.string());
  gt << ground_truth_to_json(s.truth);
  return path;
}

SyntheticSpec cube_helix_spec() {
  SyntheticSpec spec;
  spec.polylines = cube_wireframe(Point3::Zero(), 2.0);
  spec.polylines.push_back(helix(Point3::Zero(), 0.5, -0.8, 0.8, 1.5));
  spec.noise.dropout = 0.05;
  spec.noise.jitter_px = 0.3;
  spec.refs.on_edge = 160;
  spec.refs.off_edge = 40;
  return spec;
}

SyntheticSpec helix_spec() {
  SyntheticSpec spec = cube_helix_spec();
  spec.polylines = {helix(Point3::Zero(), 0.5, -0.8, 0.8, 1.5)};
  // Same framing as the cube scene: the rig scales with the bounding sphere.
  const double scale = std::hypot(0.5, 0.8) / std::sqrt(3.0);
  spec.rig.orbit_radius *= scale;
  spec.rig.height *= scale;
  spec.rig.height_swing *= scale;
  spec.refs.off_min *= scale;
  spec.refs.off_max *= scale;
  return spec;
}

SyntheticSpec synthetic_spec_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("synthetic spec: ") + e.what());
  }
  SyntheticSpec spec;
  try {
    if (doc.contains("preset")) {
      const auto name = doc.at("preset").get<std::string>();
      if (name == "cube_helix") {
        spec = cube_helix_spec();
      } else if (name == "helix") {
        spec = helix_spec();
      } else {
        throw std::invalid_argument("unknown preset " + name);
      }
    }
    if (doc.contains("polylines")) {
      spec.polylines.clear();
      for (const auto& c : doc.at("polylines")) {
        Chain3 chain;
        for (const auto& p : c) chain.push_back(point3_from(p));
        spec.polylines.push_back(std::move(chain));
      }
    }
    for (const auto& shape : doc.value("shapes", json::array())) {
      const auto type = shape.at("type").get<std::string>();
      const Point3 center = shape.contains("center") ? point3_from(shape.at("center")) : Point3::Zero();
      if (type == "cube") {
        for (auto& e : cube_wireframe(center, shape.at("side").get<double>())) spec.polylines.push_back(std::move(e));
      } else if (type == "helix") {
        spec.polylines.push_back(helix(center, shape.at("radius").get<double>(), shape.at("z_begin").get<double>(),
                                       shape.at("z_end").get<double>(), shape.at("turns").get<double>(),
                                       shape.value("samples_per_turn", 128)));
      } else if (type == "segment") {
        spec.polylines.push_back(straight_segment(point3_from(shape.at("a")), point3_from(shape.at("b"))));
      } else {
        throw std::invalid_argument("unknown shape " + type);
      }
    }
    if (doc.contains("rig")) {
      const json& r = doc.at("rig");
      spec.rig.count = r.value("count", spec.rig.count);
      spec.rig.orbit_radius = r.value("orbit_radius", spec.rig.orbit_radius);
      spec.rig.height = r.value("height", spec.rig.height);
      spec.rig.height_swing = r.value("height_swing", spec.rig.height_swing);
      spec.rig.phase_deg = r.value("phase_deg", spec.rig.phase_deg);
      if (r.contains("look_at")) spec.rig.look_at = point3_from(r.at("look_at"));
      spec.rig.focal = r.value("focal", spec.rig.focal);
      spec.rig.width = r.value("width", spec.rig.width);
      spec.rig.height_px = r.value("height_px", spec.rig.height_px);
    }
    if (doc.contains("noise")) {
      const json& n = doc.at("noise");
      spec.noise.dropout = n.value("dropout", spec.noise.dropout);
      spec.noise.spurious_density = n.value("spurious_density", spec.noise.spurious_density);
      spec.noise.jitter_px = n.value("jitter_px", spec.noise.jitter_px);
    }
    if (doc.contains("refs")) {
      const json& r = doc.at("refs");
      spec.refs.on_edge = r.value("on_edge", spec.refs.on_edge);
      spec.refs.off_edge = r.value("off_edge", spec.refs.off_edge);
      spec.refs.off_min = r.value("off_min", spec.refs.off_min);
      spec.refs.off_max = r.value("off_max", spec.refs.off_max);
    }
    spec.raster_step_px = doc.value("raster_step_px", spec.raster_step_px);
    spec.seed = doc.value("seed", spec.seed);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("synthetic spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

namespace {

struct Segment3 {
  Point3 a;
  Point3 b;
};

double segment_distance(const Point3& p, const Segment3& s) {
  const Point3 d = s.b - s.a;
  const double len2 = d.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - s.a).dot(d) / len2, 0.0, 1.0) : 0.0;
  return (p - (s.a + t * d)).norm();
}

std::vector<Segment3> segments_of(std::span<const Chain3> chains) {
  std::vector<Segment3> out;
  for (const auto& c : chains) {
    if (c.size() == 1) out.push_back({c[0], c[0]});
    for (std::size_t i = 1; i < c.size(); ++i) out.push_back({c[i - 1], c[i]});
  }
  return out;
}

// Uniform grid answering "is any segment within r of p".
class SegmentGrid {
 public:
  SegmentGrid(std::vector<Segment3> segs, double r) : segs_(std::move(segs)), r_(r), cell_(std::max(r, 1e-12)) {
    for (std::size_t i = 0; i < segs_.size(); ++i) {
      const Point3 lo = segs_[i].a.cwiseMin(segs_[i].b).array() - r_;
      const Point3 hi = segs_[i].a.cwiseMax(segs_[i].b).array() + r_;
      const auto a = key(lo);
      const auto b = key(hi);
      for (long x = a[0]; x <= b[0]; ++x) {
        for (long y = a[1]; y <= b[1]; ++y) {
          for (long z = a[2]; z <= b[2]; ++z) cells_[hash({x, y, z})].push_back(i);
        }
      }
    }
  }

  bool within(const Point3& p) const {
    auto it = cells_.find(hash(key(p)));
    if (it == cells_.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(), [&](std::size_t i) { return segment_distance(p, segs_[i]) <= r_; });
  }

 private:
  std::array<long, 3> key(const Point3& p) const {
    return {static_cast<long>(std::floor(p.x() / cell_)), static_cast<long>(std::floor(p.y() / cell_)),
            static_cast<long>(std::floor(p.z() / cell_))};
  }
  static std::uint64_t hash(const std::array<long, 3>& k) {
    return (static_cast<std::uint64_t>(k[0]) * 73856093ull) ^ (static_cast<std::uint64_t>(k[1]) * 19349663ull) ^
           (static_cast<std::uint64_t>(k[2]) * 83492791ull);
  }

  std::vector<Segment3> segs_;
  double r_;
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

}  // namespace

Metrics evaluate(std::span<const Chain3> reconstructed, const GroundTruth& truth) {
  Metrics m;
  m.tau = 0.005 * truth.scene_diagonal;
  const double h = m.tau / 10.0;
  if (!(h > 0.0)) return m;

  const SegmentGrid recon_grid(segments_of(reconstructed), m.tau);
  double covered = 0.0;
  double total = 0.0;
  for (const auto& c : truth.chains) {
    const auto samples = sample_chain(c, h);
    const double len = chain_length(c);
    const std::size_t n = samples.size() - 1;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double w = n == 0 ? 0.0 : ((i == 0 || i == n) ? 0.5 : 1.0) * len / static_cast<double>(n);
      total += w;
      if (recon_grid.within(samples[i])) covered += w;
      ++m.truth_samples;
    }
  }
  m.recall = total > 0.0 ? covered / total : 0.0;

  const auto truth_segs = segments_of(truth.chains);
  std::size_t inside = 0;
  double sum = 0.0;
  double sum2 = 0.0;
  for (const auto& c : reconstructed) {
    if (c.empty()) continue;
    for (const auto& p : sample_chain(c, h)) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& s : truth_segs) best = std::min(best, segment_distance(p, s));
      ++m.reconstructed_samples;
      if (best <= m.tau) ++inside;
      sum += best;
      sum2 += best * best;
      m.max_distance = std::max(m.max_distance, best);
    }
  }
  if (m.reconstructed_samples > 0) {
    const auto n = static_cast<double>(m.reconstructed_samples);
    m.precision = static_cast<double>(inside) / n;
    m.mae = sum / n;
    m.rmse = std::sqrt(sum2 / n);
  }
  return m;
}

Metrics evaluate(std::span<const Polyline3D> reconstructed, const GroundTruth& truth) {
  std::vector<Chain3> chains;
  for (const auto& pl : reconstructed) {
    Chain3 c;
    for (const auto& p : pl.points) c.push_back(p.position);
    chains.push_back(std::move(c));
  }
  return evaluate(chains, truth);
}

}  // namespace edgeforge
