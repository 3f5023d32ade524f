#pragma once

#include "edgeforge/pec_matching.hpp"

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace edgeforge {

enum class SceneErrc { ParseError, MissingEdgeImage, DanglingViewReference, IoError };

class SceneError : public std::runtime_error {
 public:
  SceneError(SceneErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  SceneErrc code() const noexcept { return code_; }

 private:
  SceneErrc code_;
};

struct Scene {
  std::vector<CameraView> cameras;
  std::vector<ReferencePoint> ref_points;
  /// Paths as written in the scene file; relative ones resolve against base_dir.
  std::map<ViewId, std::string> edge_image_paths;
  std::filesystem::path base_dir;

  std::filesystem::path edge_image_path(ViewId view) const;
  const CameraView* camera(ViewId view) const;
};

/// Parses and validates a scene document. `check_files` additionally
/// requires every edge image to exist on disk.
Scene parse_scene(const std::string& text, const std::filesystem::path& base_dir, bool check_files = true);
Scene load_scene(const std::filesystem::path& path);

/// Canonical form: sorted keys, shortest round-trip numbers, cameras and
/// points in file order.
std::string scene_to_json(const Scene& scene);
void save_scene(const Scene& scene, const std::filesystem::path& path);

/// Diagonal of the axis-aligned box around all reference points (0 if none).
double scene_diagonal(std::span<const ReferencePoint> refs);

}  // namespace edgeforge
