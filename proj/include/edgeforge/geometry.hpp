#pragma once

#include <Eigen/Core>

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace edgeforge {

using Point2 = Eigen::Vector2d;
using Point3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat34 = Eigen::Matrix<double, 3, 4>;
using ViewId = int;

enum class GeometryErrc {
  InvalidCamera,
  NonPositiveDepth,
  DegenerateBaseline,
  InsufficientObservations,
  IllConditioned,
  CheiralityViolation,
};

const char* to_string(GeometryErrc code);

class GeometryError : public std::runtime_error {
 public:
  GeometryError(GeometryErrc code, const std::string& what);
  GeometryErrc code() const noexcept { return code_; }

 private:
  GeometryErrc code_;
};

/// Undistorted pinhole camera. R maps world to camera axes, C is the center in
/// world coordinates, so a world point X has camera coordinates R (X - C).
/// Pixel centers sit at integer coordinates.
class CameraView {
 public:
  /// Throws GeometryError(InvalidCamera) when R is not a rotation, the focal
  /// length is not positive, or the image size is empty.
  CameraView(ViewId id, const Mat3& K, const Mat3& R, const Point3& C, int width, int height);

  ViewId id() const noexcept { return id_; }
  const Mat3& K() const noexcept { return K_; }
  const Mat3& R() const noexcept { return R_; }
  const Point3& center() const noexcept { return C_; }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double focal() const noexcept { return K_(0, 0); }

  Mat34 projection_matrix() const;
  Point3 to_camera(const Point3& X) const { return R_ * (X - C_); }
  double depth(const Point3& X) const { return R_.row(2).dot(X - C_); }
  bool contains(const Point2& p) const;
  /// Unit world-frame direction of the viewing ray through pixel p.
  Point3 ray_direction(const Point2& p) const;

 private:
  ViewId id_;
  Mat3 K_;
  Mat3 K_inv_;
  Mat3 R_;
  Point3 C_;
  int width_;
  int height_;
};

/// Camera looking from `center` towards `target`, with image y pointing
/// roughly along -`up`.
CameraView look_at_camera(ViewId id, double focal, int width, int height, const Point3& center,
                          const Point3& target, const Point3& up = Point3::UnitZ());

/// Implicit image line a u + b v + c = 0 with a^2 + b^2 = 1.
struct Line2 {
  double a = 0.0;
  double b = 1.0;
  double c = 0.0;

  /// Normalizes homogeneous coefficients; empty when (a, b) vanishes.
  static std::optional<Line2> from_homogeneous(const Eigen::Vector3d& l);
  double signed_distance(const Point2& p) const { return a * p.x() + b * p.y() + c; }
  double distance(const Point2& p) const;
};

Point2 project(const CameraView& cam, const Point3& X);
std::optional<Point2> try_project(const CameraView& cam, const Point3& X) noexcept;

/// F such that x_b^T F x_a = 0 for corresponding homogeneous pixels.
Mat3 fundamental_matrix(const CameraView& a, const CameraView& b);
/// Homogeneous image of a's center in b. The last coordinate may be zero.
Eigen::Vector3d epipole(const CameraView& a, const CameraView& b);

Line2 epipolar_line(const CameraView& a, const CameraView& b, const Point2& p_a);
std::optional<Line2> try_epipolar_line(const CameraView& a, const CameraView& b, const Point2& p_a) noexcept;

/// Non-owning: the camera must outlive the observation.
struct ImageObservation {
  const CameraView* camera = nullptr;
  Point2 uv = Point2::Zero();
};

struct TriangulationResult {
  Point3 point = Point3::Zero();
  double max_reproj_error = 0.0;
  std::vector<double> per_view_errors;
};

struct TriangulationOptions {
  int max_iterations = 20;
  double step_tolerance = 1e-10;
  double rank_tolerance = 1e-10;
};

/// DLT on normalized coordinates followed by damped Gauss-Newton on pixel
/// reprojection error.
TriangulationResult triangulate(std::span<const ImageObservation> obs,
                                const TriangulationOptions& options = {});
std::optional<TriangulationResult> try_triangulate(std::span<const ImageObservation> obs,
                                                   GeometryErrc* error = nullptr,
                                                   const TriangulationOptions& options = {}) noexcept;

/// Sum of squared pixel residuals of X against the observations.
double reprojection_cost(std::span<const ImageObservation> obs, const Point3& X);

/// Pixel radius of the image of a sphere, f * r / depth(center).
double sphere_projection_radius(const CameraView& cam, const Point3& center, double sphere_radius);

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b, double* t_out = nullptr);

}  // namespace edgeforge
