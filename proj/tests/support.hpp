#pragma once

#include "edgeforge/geometry.hpp"
#include "edgeforge/pepc.hpp"
#include "edgeforge/validation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace edgeforge::testing {

inline CameraView simple_camera(ViewId id, double f, double cx, double cy, const Point3& C = Point3::Zero(),
                                int width = 100, int height = 100) {
  Mat3 K;
  K << f, 0, cx, 0, f, cy, 0, 0, 1;
  return CameraView(id, K, Mat3::Identity(), C, width, height);
}

/// Camera on a sphere of the given radius around the origin, looking at it.
inline CameraView random_orbit_camera(ViewId id, std::mt19937_64& rng, double radius = 8.0) {
  std::uniform_real_distribution<double> az(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> el(-0.6, 0.9);
  const double a = az(rng);
  const double e = el(rng);
  const Point3 C(radius * std::cos(e) * std::cos(a), radius * std::cos(e) * std::sin(a), radius * std::sin(e));
  return look_at_camera(id, 800.0, 1000, 800, C, Point3::Zero());
}

inline Point3 random_point(std::mt19937_64& rng, double half = 1.0) {
  std::uniform_real_distribution<double> u(-half, half);
  return Point3(u(rng), u(rng), u(rng));
}

/// Brute-force triangulation oracle: coarse-to-fine grid search over a box
/// followed by Nelder-Mead on the summed squared reprojection error. Uses no
/// linear solve.
inline double oracle_cost(std::span<const ImageObservation> obs, const Point3& X) {
  double s = 0.0;
  for (const auto& o : obs) {
    const Point3 c = o.camera->to_camera(X);
    if (c.z() <= 1e-9) return std::numeric_limits<double>::infinity();
    const Point3 h = o.camera->K() * c;
    const Point2 p(h.x() / h.z(), h.y() / h.z());
    s += (p - o.uv).squaredNorm();
  }
  return s;
}

inline Point3 nelder_mead(const std::function<double(const Point3&)>& f, const Point3& start, double size,
                          int iterations = 4000) {
  std::array<Point3, 4> v{start, start, start, start};
  for (int i = 0; i < 3; ++i) v[static_cast<std::size_t>(i) + 1][i] += size;
  std::array<double, 4> fv{};
  for (std::size_t i = 0; i < 4; ++i) fv[i] = f(v[i]);
  for (int it = 0; it < iterations; ++it) {
    std::array<std::size_t, 4> idx{0, 1, 2, 3};
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = idx[0], worst = idx[3], second = idx[2];
    if ((v[worst] - v[best]).norm() < 1e-13) break;
    Point3 centroid = (v[idx[0]] + v[idx[1]] + v[idx[2]]) / 3.0;
    const Point3 xr = centroid + (centroid - v[worst]);
    const double fr = f(xr);
    if (fr < fv[best]) {
      const Point3 xe = centroid + 2.0 * (centroid - v[worst]);
      const double fe = f(xe);
      if (fe < fr) {
        v[worst] = xe;
        fv[worst] = fe;
      } else {
        v[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      v[worst] = xr;
      fv[worst] = fr;
    } else {
      const Point3 xc = centroid + 0.5 * (v[worst] - centroid);
      const double fc = f(xc);
      if (fc < fv[worst]) {
        v[worst] = xc;
        fv[worst] = fc;
      } else {
        for (std::size_t i = 0; i < 4; ++i) {
          if (i == best) continue;
          v[i] = v[best] + 0.5 * (v[i] - v[best]);
          fv[i] = f(v[i]);
        }
      }
    }
  }
  std::size_t b = 0;
  for (std::size_t i = 1; i < 4; ++i) {
    if (fv[i] < fv[b]) b = i;
  }
  return v[b];
}

struct OracleResult {
  Point3 point;
  double cost = 0.0;
};

inline OracleResult oracle_triangulate(std::span<const ImageObservation> obs, const Point3& box_center, double half) {
  auto f = [&](const Point3& X) { return oracle_cost(obs, X); };
  Point3 best = box_center;
  double best_cost = f(best);
  double h = half;
  Point3 c = box_center;
  for (int level = 0; level < 6; ++level) {
    const int n = 10;
    for (int i = -n; i <= n; ++i) {
      for (int j = -n; j <= n; ++j) {
        for (int k = -n; k <= n; ++k) {
          const Point3 X = c + Point3(i, j, k) * (h / n);
          const double v = f(X);
          if (v < best_cost) {
            best_cost = v;
            best = X;
          }
        }
      }
    }
    c = best;
    h /= 5.0;
  }
  for (int restart = 0; restart < 3; ++restart) best = nelder_mead(f, best, h);
  return {best, f(best)};
}

/// Selections with the seed, at most one candidate per other view and at
/// least three observations, by explicit enumeration.
inline std::int64_t enumerate_selections(std::span<const std::size_t> counts) {
  std::int64_t valid = 0;
  std::vector<std::size_t> choice(counts.size(), 0);
  while (true) {
    int picked = 1;
    for (auto c : choice) picked += c > 0 ? 1 : 0;
    if (picked >= 3) ++valid;
    std::size_t i = 0;
    while (i < choice.size() && choice[i] == counts[i]) choice[i++] = 0;
    if (i == choice.size()) break;
    ++choice[i];
  }
  return valid;
}

inline double turn_deg(const Point2& a, const Point2& b, const Point2& c) {
  const Point2 u = b - a;
  const Point2 v = c - b;
  const double cosv = std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0);
  return std::acos(cosv) * 180.0 / std::numbers::pi;
}

/// Longest contiguous run of segments with every interior turn <= alpha, by
/// checking all O(n^2) intervals.
inline double oracle_regular_length(const std::vector<Point2>& pts, double alpha) {
  const std::size_t m = pts.size() - 1;
  double best = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      bool ok = true;
      for (std::size_t k = i + 1; k <= j && ok; ++k) ok = turn_deg(pts[k - 1], pts[k], pts[k + 1]) <= alpha;
      if (!ok) continue;
      double len = 0.0;
      for (std::size_t k = i; k <= j; ++k) len += (pts[k + 1] - pts[k]).norm();
      best = std::max(best, len);
    }
  }
  return best;
}

inline std::vector<Point2> dense_samples(const std::vector<Point2>& pts, double step) {
  std::vector<Point2> out;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double len = (pts[i + 1] - pts[i]).norm();
    const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int k = 0; k < n; ++k) out.push_back(pts[i] + (pts[i + 1] - pts[i]) * (static_cast<double>(k) / n));
  }
  out.push_back(pts.back());
  return out;
}

inline double chain_distance(const Point2& p, const std::vector<Point2>& pts) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Point2 ab = pts[i + 1] - pts[i];
    const double l2 = ab.squaredNorm();
    const double t = l2 > 0.0 ? std::clamp((p - pts[i]).dot(ab) / l2, 0.0, 1.0) : 0.0;
    d = std::min(d, (pts[i] + t * ab - p).norm());
  }
  if (pts.size() == 1) d = (p - pts[0]).norm();
  return d;
}

/// Symmetric Hausdorff distance by dense sampling of both chains.
inline double dense_hausdorff(const std::vector<Point2>& a, const std::vector<Point2>& b, double step = 0.1) {
  double h = 0.0;
  for (const auto& p : dense_samples(a, step)) h = std::max(h, chain_distance(p, b));
  for (const auto& p : dense_samples(b, step)) h = std::max(h, chain_distance(p, a));
  return h;
}

inline std::vector<Point2> random_jagged(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> step(0.5, 6.0);
  std::uniform_real_distribution<double> turn(-1.6, 1.6);
  std::vector<Point2> pts{Point2(0, 0)};
  double heading = 0.0;
  for (int i = 1; i < n; ++i) {
    heading += turn(rng);
    pts.push_back(pts.back() + step(rng) * Point2(std::cos(heading), std::sin(heading)));
  }
  return pts;
}

inline Polyline2D chain_polyline(const std::vector<Point2>& pts) {
  std::vector<NodeId> ids(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) ids[i] = static_cast<NodeId>(i);
  return Polyline2D(ids, pts);
}

/// Graph holding the given chains as separate paths.
inline EdgeGraph2D chains_graph(const std::vector<std::vector<Point2>>& chains) {
  EdgeGraph2D g;
  for (const auto& c : chains) {
    NodeId prev = -1;
    for (const auto& p : c) {
      const NodeId id = g.add_node(p);
      if (prev >= 0) g.add_edge(prev, id);
      prev = id;
    }
  }
  return g;
}

/// Projection of a 3D chain into a camera, resampled every `step_px`.
inline std::vector<Point2> projected_chain(const CameraView& cam, const std::vector<Point3>& chain, double step_px = 2.0) {
  std::vector<Point2> out;
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    const double len = (project(cam, chain[i + 1]) - project(cam, chain[i])).norm();
    const int n = std::max(1, static_cast<int>(std::ceil(len / step_px)));
    for (int k = 0; k < n; ++k) out.push_back(project(cam, chain[i] + (chain[i + 1] - chain[i]) * (static_cast<double>(k) / n)));
  }
  out.push_back(project(cam, chain.back()));
  return out;
}

/// Four cameras on an arc around the origin, all looking at it.
inline std::vector<CameraView> arc_rig(int count = 4, double radius = 6.0) {
  std::vector<CameraView> cams;
  for (int i = 0; i < count; ++i) {
    const double a = (-50.0 + 100.0 * i / std::max(1, count - 1)) * std::numbers::pi / 180.0;
    const Point3 C(radius * std::cos(a), radius * std::sin(a), 1.5 + 0.8 * (i % 2));
    cams.push_back(look_at_camera(i, 900.0, 1000, 800, C, Point3::Zero()));
  }
  return cams;
}

/// Views whose polylines are the projections of the given 3D chains.
inline ViewSet views_of(const std::vector<CameraView>& cams, const std::vector<std::vector<Point3>>& chains,
                        const std::function<bool(ViewId, std::size_t)>& visible = {}) {
  std::vector<ViewData> views;
  for (const auto& cam : cams) {
    std::vector<std::vector<Point2>> proj;
    for (std::size_t i = 0; i < chains.size(); ++i) {
      if (visible && !visible(cam.id(), i)) continue;
      proj.push_back(projected_chain(cam, chains[i]));
    }
    views.push_back({cam, PolylineSet(chains_graph(proj))});
  }
  return ViewSet(std::move(views));
}

/// PEPC seeded at `seed_point` on polyline 0 of the seed view, with every
/// epipolar crossing on every other view as candidates.
inline Pepc make_pepc(const ViewSet& views, ViewId seed_view, const Point2& seed_point) {
  const ViewData& sv = views.at(seed_view);
  Pepc p;
  const auto cl = sv.edges.polyline(0).closest(seed_point);
  p.seed = {seed_view, cl.point, 0, cl.pos};
  for (const auto& v : views) {
    if (v.camera.id() == seed_view) continue;
    const Line2 l = epipolar_line(sv.camera, v.camera, cl.point);
    std::vector<CandidatePoint> cands;
    for (std::size_t i = 0; i < v.edges.size(); ++i) {
      for (auto& c : intersect_polyline_line(v.edges.polyline(static_cast<int>(i)), static_cast<int>(i), l)) {
        cands.push_back(c);
      }
    }
    if (!cands.empty()) p.candidates[v.camera.id()] = std::move(cands);
  }
  return p;
}

inline std::vector<Point3> segment3(const Point3& a, const Point3& b) { return {a, b}; }

}  // namespace edgeforge::testing
