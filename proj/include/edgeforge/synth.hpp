#pragma once

#include "edgeforge/scene.hpp"
#include "edgeforge/validation.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace edgeforge {

using Chain3 = std::vector<Point3>;

struct RigSpec {
  int count = 6;
  double orbit_radius = 7.0;
  double height = 3.0;
  double height_swing = 0.5;  ///< alternating +/- offset applied to the camera heights
  double phase_deg = 15.0;
  Point3 look_at = Point3::Zero();
  double focal = 1000.0;
  int width = 1024;
  int height_px = 768;
};

struct NoiseSpec {
  double dropout = 0.0;           ///< per edge-pixel removal probability
  double spurious_density = 0.0;  ///< clutter strokes per pixel
  double jitter_px = 0.0;         ///< sigma of the 2D vertex jitter
};

struct RefPointSpec {
  int on_edge = 160;
  int off_edge = 40;
  double off_min = 0.05;  ///< world offset range of off-edge points
  double off_max = 0.25;
};

struct SyntheticSpec {
  std::vector<Chain3> polylines;
  RigSpec rig;
  NoiseSpec noise;
  RefPointSpec refs;
  double raster_step_px = 3.0;  ///< projected resampling step before jitter
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument.
  void validate() const;
};

struct GroundTruth {
  std::vector<Chain3> chains;
  double scene_diagonal = 0.0;
};

struct SyntheticScene {
  std::vector<CameraView> cameras;
  std::vector<ReferencePoint> refs;
  std::map<ViewId, EdgeImage> images;
  GroundTruth truth;
};

Chain3 straight_segment(const Point3& a, const Point3& b);
/// The 12 edges of an axis-aligned cube.
std::vector<Chain3> cube_wireframe(const Point3& center, double side);
/// Helix about the z axis through `center`, sampled `samples_per_turn` times a turn.
Chain3 helix(const Point3& center, double radius, double z_begin, double z_end, double turns, int samples_per_turn = 128);

/// Orbiting rig around the look-at point.
std::vector<CameraView> make_rig(const RigSpec& rig);

/// Thresholded anti-aliased line: per step along the major axis, the pixel
/// that receives at least half of the coverage.
void draw_line(EdgeImage& img, const Point2& a, const Point2& b);
/// Ordered pixel walk of the line from a to b.
std::vector<std::array<long, 2>> line_pixels(const Point2& a, const Point2& b);
/// Joined line walk; pixels that 8-connectivity does not need are dropped.
void draw_polyline(EdgeImage& img, std::span<const Point2> pts);

SyntheticScene generate(const SyntheticSpec& spec);

/// Writes scene.json, view_<id>.pgm and ground_truth.json; returns the scene path.
std::filesystem::path write_synthetic(const SyntheticScene& s, const std::filesystem::path& dir);

SyntheticSpec synthetic_spec_from_json(const std::string& text);
std::string ground_truth_to_json(const GroundTruth& truth);
GroundTruth ground_truth_from_json(const std::string& text);

/// Cube of side 2 and a helix inside it, 6 views, 5% dropout, 0.3 px jitter.
SyntheticSpec cube_helix_spec();
/// The helix alone with the same rig and noise.
SyntheticSpec helix_spec();

struct Metrics {
  double tau = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
  double max_distance = 0.0;
  std::size_t truth_samples = 0;
  std::size_t reconstructed_samples = 0;
};

/// Recall over ground-truth arc length and precision over reconstructed
/// points at tau = 0.5% of the diagonal, with both sides sampled at tau / 10.
Metrics evaluate(std::span<const Chain3> reconstructed, const GroundTruth& truth);
Metrics evaluate(std::span<const Polyline3D> reconstructed, const GroundTruth& truth);

}  // namespace edgeforge
