#pragma once

#include "edgeforge/scene.hpp"
#include "edgeforge/validation.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace edgeforge {

struct PipelineConfig {
  double eps_px = 2.5;
  double alpha_r_deg = 20.0;
  double top_fraction = 0.10;
  double min_loop_px = 4.0;
  double smooth_tol_px = 1.0;
  double d_plmatch_px = 4.0;
  double d_sev_px = 3.0;
  double step_px = 10.0;
  double pec_sample_step_px = 10.0;
  double min_sim = 0.05;
  double r_outer_rel = 0.01;        ///< outer PEPC radius as a fraction of the scene diagonal
  double r_inner_ratio = 1.0 / 3.0;  ///< inner radius relative to the outer one
  double seed_merge_px = 2.0;
  double min_crossing_deg = 30.0;     ///< growth ignores flatter epipolar crossings
  double sample_spacing = 0.0;        ///< world units; 0 picks 0.0025 x scene diagonal
  int threads = 0;                    ///< 0 reads EDGEFORGE_THREADS, then the hardware count
  bool bridge_gaps = true;            ///< close one-pixel gaps in the edge images
  int max_gap_px = 3;                 ///< endpoint linking distance, 0 disables

  /// Throws std::invalid_argument naming the offending key.
  void validate() const;
};

PipelineConfig config_from_json(const std::string& text);
std::string config_to_json(const PipelineConfig& cfg);
EdgeGraphParams graph_params(const PipelineConfig& cfg);

struct SampledPoint {
  Point3 position = Point3::Zero();
  int polyline = 0;
};

struct EdgeSetOutput {
  std::vector<Polyline3D> polylines;
  std::vector<SampledPoint> sampled_cloud;
  double sample_spacing = 0.0;
};

struct PipelineStats {
  std::map<ViewId, std::size_t> polylines_per_view;
  std::size_t pecs = 0;
  std::size_t pepcs = 0;
  std::map<std::string, std::size_t> resolve_counts;
  std::size_t grown = 0;
  std::size_t after_outlier_filter = 0;
  double scene_diagonal = 0.0;
};

struct RunOptions {
  std::ostream* debug_log = nullptr;  ///< one JSON object per line
  PipelineStats* stats = nullptr;
};

/// Raised when a reconstructed point breaks the reprojection contract.
class InvariantBreach : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Loads the edge images referenced by the scene and runs the pipeline.
EdgeSetOutput run_pipeline(const Scene& scene, const PipelineConfig& cfg, const RunOptions& options = {});
EdgeSetOutput run_pipeline(std::span<const CameraView> cameras, std::span<const ReferencePoint> refs,
                           const std::map<ViewId, EdgeImage>& images, const PipelineConfig& cfg,
                           const RunOptions& options = {});

/// Per-view graph extraction, shared by the pipeline and the CLI.
ViewSet build_views(std::span<const CameraView> cameras, const std::map<ViewId, EdgeImage>& images,
                    const PipelineConfig& cfg, int threads);

/// PECs for prepared views.
std::vector<Pec> match_views(const ViewSet& views, std::span<const ReferencePoint> refs, const PipelineConfig& cfg);

/// Equally spaced points along each chain, both endpoints included, spacing
/// at most `spacing`.
std::vector<Point3> sample_chain(std::span<const Point3> chain, double spacing);
std::vector<SampledPoint> sample_edges(std::span<const Polyline3D> polylines, double spacing);

/// Worker count: explicit request, then EDGEFORGE_THREADS, then hardware.
int resolve_thread_count(int requested);
/// Runs f(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f);

}  // namespace edgeforge
