#pragma once

#include "edgeforge/pipeline.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace edgeforge {

enum class PlyMode { Points, Wireframe };

/// ASCII PLY. Points mode writes the sampled cloud with a polyline index per
/// vertex; wireframe mode writes polyline vertices and consecutive edges.
std::string ply_to_string(const EdgeSetOutput& out, PlyMode mode);
void export_ply(const EdgeSetOutput& out, const std::filesystem::path& path, PlyMode mode);

struct PlyData {
  std::vector<Point3> vertices;
  std::vector<int> vertex_polyline;  ///< empty when the file has no polyline property
  std::vector<std::pair<int, int>> edges;
};

/// Reads ASCII PLY vertices (x, y, z, optional polyline) and edges.
PlyData read_ply(const std::filesystem::path& path);
PlyData parse_ply(const std::string& text);

/// Chains formed by runs of edges where each starts at the previous end.
std::vector<std::vector<Point3>> ply_chains(const PlyData& data);

}  // namespace edgeforge
