#include "edgeforge/ply.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace edgeforge {

namespace {

void put_float(std::string& out, double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, static_cast<float>(v));
  out.append(buf, end);
}

void put_vertex(std::string& out, const Point3& p) {
  put_float(out, p.x());
  out += ' ';
  put_float(out, p.y());
  out += ' ';
  put_float(out, p.z());
}

}  // namespace

std::string ply_to_string(const EdgeSetOutput& data, PlyMode mode) {
  std::string out = "ply\nformat ascii 1.0\ncomment edgeforge\n";
  if (mode == PlyMode::Points) {
    out += "element vertex " + std::to_string(data.sampled_cloud.size()) + "\n";
    out += "property float x\nproperty float y\nproperty float z\nproperty int polyline\nend_header\n";
    for (const auto& s : data.sampled_cloud) {
      put_vertex(out, s.position);
      out += ' ' + std::to_string(s.polyline) + '\n';
    }
    return out;
  }
  std::size_t vertices = 0;
  std::size_t edges = 0;
  for (const auto& pl : data.polylines) {
    vertices += pl.points.size();
    if (!pl.points.empty()) edges += pl.points.size() - 1;
  }
  out += "element vertex " + std::to_string(vertices) + "\n";
  out += "property float x\nproperty float y\nproperty float z\n";
  out += "element edge " + std::to_string(edges) + "\n";
  out += "property int vertex1\nproperty int vertex2\nend_header\n";
  for (const auto& pl : data.polylines) {
    for (const auto& p : pl.points) {
      put_vertex(out, p.position);
      out += '\n';
    }
  }
  std::size_t base = 0;
  for (const auto& pl : data.polylines) {
    for (std::size_t i = 1; i < pl.points.size(); ++i) {
      out += std::to_string(base + i - 1) + ' ' + std::to_string(base + i) + '\n';
    }
    base += pl.points.size();
  }
  return out;
}

void export_ply(const EdgeSetOutput& data, const std::filesystem::path& path, PlyMode mode) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << ply_to_string(data, mode);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

PlyData parse_ply(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "ply") throw std::runtime_error("not a PLY file");

  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> props;
  };
  std::vector<Element> elements;
  bool ascii = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      ascii = fmt == "ascii";
    } else if (word == "element") {
      Element e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (word == "property") {
      if (elements.empty()) throw std::runtime_error("PLY property before element");
      std::string type, name;
      ls >> type;
      if (type == "list") throw std::runtime_error("PLY list properties are not supported");
      ls >> name;
      elements.back().props.push_back(name);
    } else if (word == "end_header") {
      break;
    }
  }
  if (!ascii) throw std::runtime_error("only ASCII PLY is supported");

  PlyData data;
  for (const auto& e : elements) {
    for (std::size_t k = 0; k < e.count; ++k) {
      if (!std::getline(in, line)) throw std::runtime_error("PLY body shorter than header");
      std::istringstream ls(line);
      std::map<std::string, double> values;
      for (const auto& name : e.props) {
        double v = 0.0;
        if (!(ls >> v)) throw std::runtime_error("malformed PLY record in element " + e.name);
        values[name] = v;
      }
      if (e.name == "vertex") {
        data.vertices.emplace_back(values["x"], values["y"], values["z"]);
        if (values.count("polyline")) data.vertex_polyline.push_back(static_cast<int>(values["polyline"]));
      } else if (e.name == "edge") {
        data.edges.emplace_back(static_cast<int>(values["vertex1"]), static_cast<int>(values["vertex2"]));
      }
    }
  }
  return data;
}

PlyData read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_ply(ss.str());
}

std::vector<std::vector<Point3>> ply_chains(const PlyData& data) {
  std::vector<std::vector<Point3>> chains;
  int last = -1;
  for (const auto& [a, b] : data.edges) {
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= data.vertices.size() ||
        static_cast<std::size_t>(b) >= data.vertices.size()) {
      throw std::runtime_error("PLY edge references a missing vertex");
    }
    if (a != last || chains.empty()) chains.push_back({data.vertices[static_cast<std::size_t>(a)]});
    chains.back().push_back(data.vertices[static_cast<std::size_t>(b)]);
    last = b;
  }
  return chains;
}

}  // namespace edgeforge
