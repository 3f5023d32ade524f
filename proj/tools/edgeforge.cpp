#include "edgeforge/image_io.hpp"
#include "edgeforge/pipeline.hpp"
#include "edgeforge/ply.hpp"
#include "edgeforge/synth.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace edgeforge;

namespace {

constexpr int kInputError = 2;
constexpr int kInvariantBreach = 3;

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::map<ViewId, EdgeImage> load_images(const Scene& scene) {
  std::map<ViewId, EdgeImage> images;
  for (const auto& cam : scene.cameras) images.emplace(cam.id(), read_edge_image(scene.edge_image_path(cam.id())));
  return images;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view 3D edge reconstruction from edge images and sparse reference points"};
  app.require_subcommand(1);

  std::string scene_path;
  std::string out_path;
  std::string config_path;
  std::string points_out;
  std::string debug_log;
  std::string svg_path;
  std::string in_path;
  std::string spec_path;
  int view = 0;
  double spacing = 0.0;

  auto* extract = app.add_subcommand("extract-graph", "Filtered edge graph of one view as JSON");
  extract->add_option("scene", scene_path, "Scene JSON")->required();
  extract->add_option("--view", view, "View id")->required();
  extract->add_option("--out", out_path, "Output graph JSON")->required();
  extract->add_option("--svg", svg_path, "Optional polyline overlay");

  auto* match = app.add_subcommand("match", "Potential edge correspondences as JSON");
  match->add_option("scene", scene_path, "Scene JSON")->required();
  match->add_option("--out", out_path, "Output PEC JSON")->required();
  match->add_option("--config", config_path, "Pipeline config JSON");

  auto* reconstruct = app.add_subcommand("reconstruct", "Full pipeline; writes a wireframe PLY");
  reconstruct->add_option("scene", scene_path, "Scene JSON")->required();
  reconstruct->add_option("--config", config_path, "Pipeline config JSON");
  reconstruct->add_option("--out", out_path, "Output wireframe PLY")->required();
  reconstruct->add_option("--points-out", points_out, "Sampled point cloud PLY");
  reconstruct->add_option("--debug-log", debug_log, "Per-stage diagnostics as JSON lines");

  auto* sample = app.add_subcommand("sample", "Samples a wireframe PLY into a point cloud PLY");
  sample->add_option("--in", in_path, "Wireframe PLY")->required();
  sample->add_option("--spacing", spacing, "Sample spacing in world units")->required()->check(CLI::PositiveNumber);
  sample->add_option("--out", out_path, "Output point PLY")->required();

  auto* synth = app.add_subcommand("synth", "Writes a synthetic scene with ground truth");
  synth->add_option("--spec", spec_path, "Synthetic spec JSON")->required();
  synth->add_option("--out-dir", out_path, "Output directory")->required();

  std::string truth_path;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Scores a wireframe PLY against synthetic ground truth");
  evaluate_cmd->add_option("--in", in_path, "Wireframe PLY")->required();
  evaluate_cmd->add_option("--truth", truth_path, "Ground-truth JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  try {
    PipelineConfig cfg;
    if (!config_path.empty()) cfg = config_from_json(read_text(config_path));

    if (*extract) {
      const Scene scene = load_scene(scene_path);
      const CameraView* cam = scene.camera(view);
      if (!cam) throw std::invalid_argument("unknown view " + std::to_string(view));
      const EdgeImage img = read_edge_image(scene.edge_image_path(view));
      const EdgeGraphParams params = graph_params(cfg);
      const EdgeGraph2D g = process_edge_image(img, params);
      write_text(out_path, graph_to_json(g));
      if (!svg_path.empty()) {
        const auto pls = extract_polylines(g);
        write_text(svg_path, polylines_to_svg(img.width, img.height, pls));
      }
    } else if (*match) {
      const Scene scene = load_scene(scene_path);
      const ViewSet views = build_views(scene.cameras, load_images(scene), cfg, resolve_thread_count(cfg.threads));
      const auto pecs = match_views(views, scene.ref_points, cfg);
      write_text(out_path, pecs_to_json(pecs));
    } else if (*reconstruct) {
      const Scene scene = load_scene(scene_path);
      std::ofstream log;
      RunOptions options;
      if (!debug_log.empty()) {
        log.open(debug_log);
        if (!log) throw std::runtime_error("cannot write " + debug_log);
        options.debug_log = &log;
      }
      const EdgeSetOutput out = run_pipeline(scene, cfg, options);
      export_ply(out, out_path, PlyMode::Wireframe);
      if (!points_out.empty()) export_ply(out, points_out, PlyMode::Points);
      std::cout << out.polylines.size() << " polylines, " << out.sampled_cloud.size() << " sampled points\n";
    } else if (*sample) {
      const auto chains = ply_chains(read_ply(in_path));
      EdgeSetOutput out;
      out.sample_spacing = spacing;
      for (std::size_t i = 0; i < chains.size(); ++i) {
        for (const auto& p : sample_chain(chains[i], spacing)) out.sampled_cloud.push_back({p, static_cast<int>(i)});
      }
      export_ply(out, out_path, PlyMode::Points);
    } else if (*evaluate_cmd) {
      const auto chains = ply_chains(read_ply(in_path));
      const Metrics m = evaluate(std::span<const Chain3>(chains), ground_truth_from_json(read_text(truth_path)));
      std::cout << "tau " << m.tau << "\nrecall " << m.recall << "\nprecision " << m.precision << "\nmae " << m.mae
                << "\nrmse " << m.rmse << "\nmax_distance " << m.max_distance << "\n";
    } else if (*synth) {
      const auto spec = synthetic_spec_from_json(read_text(spec_path));
      const auto path = write_synthetic(generate(spec), out_path);
      std::cout << path.string() << "\n";
    }
  } catch (const InvariantBreach& e) {
    std::cerr << "invariant breach: " << e.what() << "\n";
    return kInvariantBreach;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return 0;
}
