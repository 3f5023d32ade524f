#pragma once

#include "edgeforge/edge_graph.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace edgeforge {

class ImageIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads a binary PGM (P4 or P5) or 8-bit grayscale PNG. Gray levels >= 128
/// are edge pixels; P4 set bits are black, i.e. gray level 0.
EdgeImage read_edge_image(const std::filesystem::path& path);

/// Writes P5 with edge pixels at 255.
void write_pgm(const EdgeImage& img, const std::filesystem::path& path);

}  // namespace edgeforge
