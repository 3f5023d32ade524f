#include "edgeforge/scene.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace edgeforge {

using nlohmann::json;

std::filesystem::path Scene::edge_image_path(ViewId view) const {
  std::filesystem::path p(edge_image_paths.at(view));
  return p.is_absolute() ? p : base_dir / p;
}

const CameraView* Scene::camera(ViewId view) const {
  for (const auto& c : cameras) {
    if (c.id() == view) return &c;
  }
  return nullptr;
}

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw SceneError(SceneErrc::ParseError, "field " + field + ": " + what);
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) field_error(where + "." + key, "missing");
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) field_error(where, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) field_error(where, "expected an integer");
  return j.get<int>();
}

template <int N>
Eigen::Matrix<double, N, 1> numbers(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != N) field_error(where, "expected " + std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v(i) = number(j[static_cast<std::size_t>(i)], where + "[" + std::to_string(i) + "]");
  return v;
}

Mat3 matrix(const json& j, const std::string& where) {
  const auto v = numbers<9>(j, where);
  Mat3 m;
  m << v(0), v(1), v(2), v(3), v(4), v(5), v(6), v(7), v(8);
  return m;
}

json matrix_json(const Mat3& m) {
  json a = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) a.push_back(m(r, c));
  }
  return a;
}

}  // namespace

Scene parse_scene(const std::string& text, const std::filesystem::path& base_dir, bool check_files) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = text.substr(0, std::min<std::size_t>(e.byte, text.size()));
    const auto line = 1 + std::count(upto.begin(), upto.end(), '\n');
    throw SceneError(SceneErrc::ParseError, "line " + std::to_string(line) + ": " + e.what());
  }
  Scene scene;
  scene.base_dir = base_dir;

  const json& cams = require(doc, "cameras", "scene");
  if (!cams.is_array()) field_error("cameras", "expected an array");
  std::set<ViewId> ids;
  for (std::size_t i = 0; i < cams.size(); ++i) {
    const std::string where = "cameras[" + std::to_string(i) + "]";
    const json& c = cams[i];
    const int id = integer(require(c, "id", where), where + ".id");
    if (!ids.insert(id).second) field_error(where + ".id", "duplicate view id " + std::to_string(id));
    try {
      scene.cameras.emplace_back(id, matrix(require(c, "K", where), where + ".K"), matrix(require(c, "R", where), where + ".R"),
                                 numbers<3>(require(c, "C", where), where + ".C"),
                                 integer(require(c, "width", where), where + ".width"),
                                 integer(require(c, "height", where), where + ".height"));
    } catch (const GeometryError& e) {
      field_error(where, e.what());
    }
  }

  const json& pts = require(doc, "points", "scene");
  if (!pts.is_array()) field_error("points", "expected an array");
  std::set<int> point_ids;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::string where = "points[" + std::to_string(i) + "]";
    const json& p = pts[i];
    ReferencePoint r;
    r.id = integer(require(p, "id", where), where + ".id");
    if (!point_ids.insert(r.id).second) field_error(where + ".id", "duplicate point id");
    r.position = numbers<3>(require(p, "xyz", where), where + ".xyz");
    const json& obs = require(p, "obs", where);
    if (!obs.is_array()) field_error(where + ".obs", "expected an array");
    for (std::size_t k = 0; k < obs.size(); ++k) {
      const std::string ow = where + ".obs[" + std::to_string(k) + "]";
      const int view = integer(require(obs[k], "view", ow), ow + ".view");
      if (!ids.count(view)) {
        throw SceneError(SceneErrc::DanglingViewReference,
                         ow + " references unknown view " + std::to_string(view));
      }
      r.observations[view] = numbers<2>(require(obs[k], "uv", ow), ow + ".uv");
    }
    if (r.observations.size() < 2) field_error(where + ".obs", "a reference point needs at least two observations");
    scene.ref_points.push_back(std::move(r));
  }

  const json& images = require(doc, "edge_images", "scene");
  if (!images.is_object()) field_error("edge_images", "expected an object");
  for (const auto& [key, value] : images.items()) {
    int view = 0;
    try {
      std::size_t used = 0;
      view = std::stoi(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      field_error("edge_images." + key, "key must be a view id");
    }
    if (!ids.count(view)) {
      throw SceneError(SceneErrc::DanglingViewReference, "edge_images references unknown view " + key);
    }
    if (!value.is_string()) field_error("edge_images." + key, "expected a path");
    scene.edge_image_paths[view] = value.get<std::string>();
  }
  for (ViewId id : ids) {
    if (!scene.edge_image_paths.count(id)) {
      throw SceneError(SceneErrc::MissingEdgeImage, "view " + std::to_string(id) + " has no edge image");
    }
    if (check_files && !std::filesystem::exists(scene.edge_image_path(id))) {
      throw SceneError(SceneErrc::MissingEdgeImage,
                       "edge image for view " + std::to_string(id) + " not found: " + scene.edge_image_path(id).string());
    }
  }
  return scene;
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SceneError(SceneErrc::IoError, "cannot open scene " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str(), path.parent_path());
}

std::string scene_to_json(const Scene& scene) {
  json doc;
  doc["cameras"] = json::array();
  for (const auto& c : scene.cameras) {
    doc["cameras"].push_back({{"id", c.id()},
                              {"K", matrix_json(c.K())},
                              {"R", matrix_json(c.R())},
                              {"C", {c.center().x(), c.center().y(), c.center().z()}},
                              {"width", c.width()},
                              {"height", c.height()}});
  }
  doc["points"] = json::array();
  for (const auto& r : scene.ref_points) {
    json obs = json::array();
    for (const auto& [view, uv] : r.observations) obs.push_back({{"view", view}, {"uv", {uv.x(), uv.y()}}});
    doc["points"].push_back({{"id", r.id}, {"xyz", {r.position.x(), r.position.y(), r.position.z()}}, {"obs", obs}});
  }
  doc["edge_images"] = json::object();
  for (const auto& [view, path] : scene.edge_image_paths) doc["edge_images"][std::to_string(view)] = path;
  return doc.dump(1) + "\n";
}

void save_scene(const Scene& scene, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw SceneError(SceneErrc::IoError, "cannot write scene " + path.string());
  out << scene_to_json(scene);
}

double scene_diagonal(std::span<const ReferencePoint> refs) {
  if (refs.empty()) return 0.0;
  Point3 lo = refs.front().position;
  Point3 hi = lo;
  for (const auto& r : refs) {
    lo = lo.cwiseMin(r.position);
    hi = hi.cwiseMax(r.position);
  }
  return (hi - lo).norm();
}

}  // namespace edgeforge
