#include "edgeforge/geometry.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace edgeforge {

const char* to_string(GeometryErrc code) {
  switch (code) {
    case GeometryErrc::InvalidCamera: return "InvalidCamera";
    case GeometryErrc::NonPositiveDepth: return "NonPositiveDepth";
    case GeometryErrc::DegenerateBaseline: return "DegenerateBaseline";
    case GeometryErrc::InsufficientObservations: return "InsufficientObservations";
    case GeometryErrc::IllConditioned: return "IllConditioned";
    case GeometryErrc::CheiralityViolation: return "CheiralityViolation";
  }
  return "Unknown";
}

GeometryError::GeometryError(GeometryErrc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

CameraView::CameraView(ViewId id, const Mat3& K, const Mat3& R, const Point3& C, int width, int height)
    : id_(id), K_(K), R_(R), C_(C), width_(width), height_(height) {
  if (!K.allFinite() || !R.allFinite() || !C.allFinite()) {
    throw GeometryError(GeometryErrc::InvalidCamera, "non-finite camera parameters");
  }
  if ((R * R.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
      std::abs(R.determinant() - 1.0) > 1e-9) {
    throw GeometryError(GeometryErrc::InvalidCamera, "R is not a rotation");
  }
  if (!(K(0, 0) > 0.0) || !(K(1, 1) > 0.0) || std::abs(K(2, 2) - 1.0) > 1e-12 || K(1, 0) != 0.0 ||
      K(2, 0) != 0.0 || K(2, 1) != 0.0) {
    throw GeometryError(GeometryErrc::InvalidCamera, "K must be upper triangular with positive focal");
  }
  if (width <= 0 || height <= 0) {
    throw GeometryError(GeometryErrc::InvalidCamera, "image size must be positive");
  }
  K_inv_ = K.inverse();
}

Mat34 CameraView::projection_matrix() const {
  Mat34 P;
  P.leftCols<3>() = K_ * R_;
  P.col(3) = -K_ * R_ * C_;
  return P;
}

bool CameraView::contains(const Point2& p) const {
  return p.x() >= 0.0 && p.y() >= 0.0 && p.x() < width_ && p.y() < height_;
}

Point3 CameraView::ray_direction(const Point2& p) const {
  return (R_.transpose() * (K_inv_ * Eigen::Vector3d(p.x(), p.y(), 1.0))).normalized();
}

CameraView look_at_camera(ViewId id, double focal, int width, int height, const Point3& center,
                          const Point3& target, const Point3& up) {
  const Point3 z = (target - center).normalized();
  const Point3 x = z.cross(up).normalized();
  const Point3 y = z.cross(x);
  Mat3 R;
  R.row(0) = x.transpose();
  R.row(1) = y.transpose();
  R.row(2) = z.transpose();
  Mat3 K = Mat3::Identity();
  K(0, 0) = focal;
  K(1, 1) = focal;
  K(0, 2) = 0.5 * (width - 1);
  K(1, 2) = 0.5 * (height - 1);
  return CameraView(id, K, R, center, width, height);
}

std::optional<Line2> Line2::from_homogeneous(const Eigen::Vector3d& l) {
  const double n = std::hypot(l.x(), l.y());
  if (!(n > 0.0) || !std::isfinite(n)) return std::nullopt;
  return Line2{l.x() / n, l.y() / n, l.z() / n};
}

double Line2::distance(const Point2& p) const { return std::abs(signed_distance(p)); }

std::optional<Point2> try_project(const CameraView& cam, const Point3& X) noexcept {
  const Eigen::Vector3d Xc = cam.to_camera(X);
  if (!(Xc.z() > 0.0)) return std::nullopt;
  const Eigen::Vector3d h = cam.K() * Xc;
  return Point2(h.x() / h.z(), h.y() / h.z());
}

Point2 project(const CameraView& cam, const Point3& X) {
  auto p = try_project(cam, X);
  if (!p) throw GeometryError(GeometryErrc::NonPositiveDepth, "point is not in front of the camera");
  return *p;
}

namespace {

Mat3 skew(const Eigen::Vector3d& v) {
  Mat3 S;
  S << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return S;
}

bool same_center(const CameraView& a, const CameraView& b) {
  return (a.center() - b.center()).norm() <= 1e-12;
}

}  // namespace

Eigen::Vector3d epipole(const CameraView& a, const CameraView& b) {
  return b.projection_matrix() * a.center().homogeneous();
}

Mat3 fundamental_matrix(const CameraView& a, const CameraView& b) {
  if (same_center(a, b)) {
    throw GeometryError(GeometryErrc::DegenerateBaseline, "camera centers coincide");
  }
  // F = [e_b]_x P_b P_a^+, where P_b P_a^+ is the infinite homography.
  const Mat3 H_inf = b.K() * b.R() * a.R().transpose() * a.K().inverse();
  return skew(epipole(a, b)) * H_inf;
}

std::optional<Line2> try_epipolar_line(const CameraView& a, const CameraView& b, const Point2& p_a) noexcept {
  if (same_center(a, b)) return std::nullopt;
  // Line through the epipole and the vanishing point of the viewing ray.
  const Eigen::Vector3d d = a.R().transpose() * (a.K().inverse() * Eigen::Vector3d(p_a.x(), p_a.y(), 1.0));
  const Eigen::Vector3d vanishing = b.K() * (b.R() * d);
  return Line2::from_homogeneous(epipole(a, b).cross(vanishing));
}

Line2 epipolar_line(const CameraView& a, const CameraView& b, const Point2& p_a) {
  if (same_center(a, b)) {
    throw GeometryError(GeometryErrc::DegenerateBaseline, "camera centers coincide");
  }
  auto l = try_epipolar_line(a, b, p_a);
  if (!l) throw GeometryError(GeometryErrc::IllConditioned, "point coincides with the epipole");
  return *l;
}

double reprojection_cost(std::span<const ImageObservation> obs, const Point3& X) {
  double cost = 0.0;
  for (const auto& o : obs) {
    const Eigen::Vector3d h = o.camera->K() * o.camera->to_camera(X);
    const double du = h.x() / h.z() - o.uv.x();
    const double dv = h.y() / h.z() - o.uv.y();
    cost += du * du + dv * dv;
  }
  return cost;
}

namespace {

std::optional<Point3> dlt(std::span<const ImageObservation> obs, double rank_tolerance, GeometryErrc* error) {
  // Normalized camera coordinates and a world frame centered on the cameras
  // keep the design matrix well scaled.
  Point3 centroid = Point3::Zero();
  for (const auto& o : obs) centroid += o.camera->center();
  centroid /= static_cast<double>(obs.size());
  double scale = 0.0;
  for (const auto& o : obs) scale = std::max(scale, (o.camera->center() - centroid).norm());
  if (!(scale > 0.0)) {
    if (error) *error = GeometryErrc::DegenerateBaseline;
    return std::nullopt;
  }

  Eigen::MatrixXd A(2 * obs.size(), 4);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const CameraView& cam = *obs[i].camera;
    const Eigen::Vector3d xn = cam.K().inverse() * Eigen::Vector3d(obs[i].uv.x(), obs[i].uv.y(), 1.0);
    Mat34 P;
    P.leftCols<3>() = cam.R();
    P.col(3) = cam.R() * (centroid - cam.center()) / scale;
    Eigen::RowVector4d r0 = xn.x() * P.row(2) - P.row(0);
    Eigen::RowVector4d r1 = xn.y() * P.row(2) - P.row(1);
    A.row(2 * i) = r0 / std::max(r0.norm(), 1e-300);
    A.row(2 * i + 1) = r1 / std::max(r1.norm(), 1e-300);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (!(s(2) > rank_tolerance * s(0))) {
    if (error) *error = GeometryErrc::IllConditioned;
    return std::nullopt;
  }
  const Eigen::Vector4d Y = svd.matrixV().col(3);
  if (std::abs(Y(3)) <= rank_tolerance * Y.head<3>().norm()) {
    if (error) *error = GeometryErrc::IllConditioned;
    return std::nullopt;
  }
  Point3 X = centroid + scale * Y.head<3>() / Y(3);
  if (!X.allFinite()) {
    if (error) *error = GeometryErrc::IllConditioned;
    return std::nullopt;
  }
  return X;
}

void refine(std::span<const ImageObservation> obs, Point3& X, const TriangulationOptions& options) {
  double cost = reprojection_cost(obs, X);
  double lambda = -1.0;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    Mat3 JtJ = Mat3::Zero();
    Eigen::Vector3d Jtr = Eigen::Vector3d::Zero();
    for (const auto& o : obs) {
      const Mat3 KR = o.camera->K() * o.camera->R();
      const Eigen::Vector3d h = KR * (X - o.camera->center());
      const double u = h.x() / h.z();
      const double v = h.y() / h.z();
      Eigen::Matrix<double, 2, 3> J;
      J.row(0) = (KR.row(0) - u * KR.row(2)) / h.z();
      J.row(1) = (KR.row(1) - v * KR.row(2)) / h.z();
      const Eigen::Vector2d r(u - o.uv.x(), v - o.uv.y());
      JtJ += J.transpose() * J;
      Jtr += J.transpose() * r;
    }
    if (lambda < 0.0) lambda = 1e-6 * JtJ.diagonal().maxCoeff();
    Mat3 A = JtJ;
    A.diagonal() += lambda * JtJ.diagonal();
    const Eigen::Vector3d step = A.ldlt().solve(-Jtr);
    if (!step.allFinite()) break;
    const Point3 candidate = X + step;
    const double new_cost = reprojection_cost(obs, candidate);
    if (std::isfinite(new_cost) && new_cost <= cost) {
      X = candidate;
      cost = new_cost;
      lambda *= 0.1;
      if (step.norm() < options.step_tolerance * std::max(1.0, X.norm())) break;
    } else {
      lambda *= 10.0;
      if (step.norm() < options.step_tolerance * std::max(1.0, X.norm())) break;
    }
  }
}

}  // namespace

std::optional<TriangulationResult> try_triangulate(std::span<const ImageObservation> obs, GeometryErrc* error,
                                                   const TriangulationOptions& options) noexcept {
  if (obs.size() < 2) {
    if (error) *error = GeometryErrc::InsufficientObservations;
    return std::nullopt;
  }
  for (std::size_t i = 0; i < obs.size(); ++i) {
    for (std::size_t j = i + 1; j < obs.size(); ++j) {
      if ((obs[i].camera->center() - obs[j].camera->center()).norm() <= 1e-12) {
        if (error) *error = GeometryErrc::DegenerateBaseline;
        return std::nullopt;
      }
    }
  }
  auto X = dlt(obs, options.rank_tolerance, error);
  if (!X) return std::nullopt;
  for (const auto& o : obs) {
    if (!(o.camera->depth(*X) > 0.0)) {
      if (error) *error = GeometryErrc::CheiralityViolation;
      return std::nullopt;
    }
  }
  refine(obs, *X, options);

  TriangulationResult result;
  result.point = *X;
  result.per_view_errors.reserve(obs.size());
  for (const auto& o : obs) {
    auto p = try_project(*o.camera, *X);
    if (!p) {
      if (error) *error = GeometryErrc::CheiralityViolation;
      return std::nullopt;
    }
    const double e = (*p - o.uv).norm();
    result.per_view_errors.push_back(e);
    result.max_reproj_error = std::max(result.max_reproj_error, e);
  }
  return result;
}

TriangulationResult triangulate(std::span<const ImageObservation> obs, const TriangulationOptions& options) {
  GeometryErrc code = GeometryErrc::IllConditioned;
  auto r = try_triangulate(obs, &code, options);
  if (!r) throw GeometryError(code, "triangulation failed");
  return *r;
}

double sphere_projection_radius(const CameraView& cam, const Point3& center, double sphere_radius) {
  const double d = cam.depth(center);
  if (!(d > 0.0)) throw GeometryError(GeometryErrc::NonPositiveDepth, "sphere center behind camera");
  return cam.focal() * sphere_radius / d;
}

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b, double* t_out) {
  const Point2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  if (t_out) *t_out = t;
  return (a + t * ab - p).norm();
}

}  // namespace edgeforge
