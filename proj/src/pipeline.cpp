#include "edgeforge/pipeline.hpp"

#include "edgeforge/image_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace edgeforge {

using nlohmann::json;

namespace {

struct ConfigField {
  const char* key;
  double PipelineConfig::*member;
};

constexpr ConfigField kFields[] = {
    {"eps_px", &PipelineConfig::eps_px},
    {"alpha_r_deg", &PipelineConfig::alpha_r_deg},
    {"top_fraction", &PipelineConfig::top_fraction},
    {"min_loop_px", &PipelineConfig::min_loop_px},
    {"smooth_tol_px", &PipelineConfig::smooth_tol_px},
    {"d_plmatch_px", &PipelineConfig::d_plmatch_px},
    {"d_sev_px", &PipelineConfig::d_sev_px},
    {"step_px", &PipelineConfig::step_px},
    {"pec_sample_step_px", &PipelineConfig::pec_sample_step_px},
    {"min_sim", &PipelineConfig::min_sim},
    {"r_outer_rel", &PipelineConfig::r_outer_rel},
    {"r_inner_ratio", &PipelineConfig::r_inner_ratio},
    {"seed_merge_px", &PipelineConfig::seed_merge_px},
    {"min_crossing_deg", &PipelineConfig::min_crossing_deg},
    {"sample_spacing", &PipelineConfig::sample_spacing},
};

}  // namespace

void PipelineConfig::validate() const {
  for (const auto& f : kFields) {
    const double v = this->*f.member;
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(f.key) + " must be finite");
    const bool may_be_zero = std::string_view(f.key) == "sample_spacing" || std::string_view(f.key) == "seed_merge_px" ||
                             std::string_view(f.key) == "min_crossing_deg";
    if (v < 0.0 || (v == 0.0 && !may_be_zero)) throw std::invalid_argument(std::string(f.key) + " must be positive");
  }
  if (r_inner_ratio >= 1.0) throw std::invalid_argument("r_inner_ratio must be below 1");
  if (top_fraction > 1.0) throw std::invalid_argument("top_fraction must not exceed 1");
  if (min_sim > 1.0) throw std::invalid_argument("min_sim must not exceed 1");
  if (threads < 0) throw std::invalid_argument("threads must not be negative");
}

PipelineConfig config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
  PipelineConfig cfg;
  for (const auto& [key, value] : doc.items()) {
    if (key == "threads") {
      if (!value.is_number_integer()) throw std::invalid_argument("threads must be an integer");
      cfg.threads = value.get<int>();
      continue;
    }
    if (key == "seed") continue;
    if (key == "bridge_gaps") {
      if (!value.is_boolean()) throw std::invalid_argument("bridge_gaps must be a boolean");
      cfg.bridge_gaps = value.get<bool>();
      continue;
    }
    if (key == "max_gap_px") {
      if (!value.is_number_integer() || value.get<int>() < 0) throw std::invalid_argument("max_gap_px must be a non-negative integer");
      cfg.max_gap_px = value.get<int>();
      continue;
    }
    const auto* field = std::find_if(std::begin(kFields), std::end(kFields), [&](const ConfigField& f) { return key == f.key; });
    if (field == std::end(kFields)) throw std::invalid_argument("unknown config key " + key);
    if (!value.is_number()) throw std::invalid_argument(key + " must be a number");
    cfg.*(field->member) = value.get<double>();
  }
  cfg.validate();
  return cfg;
}

std::string config_to_json(const PipelineConfig& cfg) {
  json doc;
  for (const auto& f : kFields) doc[f.key] = cfg.*f.member;
  doc["threads"] = cfg.threads;
  doc["bridge_gaps"] = cfg.bridge_gaps;
  doc["max_gap_px"] = cfg.max_gap_px;
  return doc.dump(1) + "\n";
}

EdgeGraphParams graph_params(const PipelineConfig& cfg) {
  return {cfg.min_loop_px, cfg.smooth_tol_px, cfg.alpha_r_deg, cfg.top_fraction, cfg.bridge_gaps, cfg.max_gap_px};
}

int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("EDGEFORGE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

ViewSet build_views(std::span<const CameraView> cameras, const std::map<ViewId, EdgeImage>& images,
                    const PipelineConfig& cfg, int threads) {
  const EdgeGraphParams params = graph_params(cfg);
  std::vector<std::optional<PolylineSet>> sets(cameras.size());
  parallel_for(cameras.size(), threads, [&](std::size_t i) {
    const EdgeImage& img = images.at(cameras[i].id());
    sets[i].emplace(process_edge_image(img, params));
  });
  std::vector<ViewData> views;
  for (std::size_t i = 0; i < cameras.size(); ++i) views.push_back({cameras[i], std::move(*sets[i])});
  return ViewSet(std::move(views));
}

std::vector<Pec> match_views(const ViewSet& views, std::span<const ReferencePoint> refs, const PipelineConfig& cfg) {
  return detect_communities(build_similarity_graph(views, refs, cfg.d_plmatch_px, cfg.min_sim));
}

std::vector<Point3> sample_chain(std::span<const Point3> chain, double spacing) {
  if (!(spacing > 0.0)) throw std::invalid_argument("sample spacing must be positive");
  std::vector<Point3> out;
  if (chain.empty()) return out;
  std::vector<double> cum{0.0};
  for (std::size_t i = 1; i < chain.size(); ++i) cum.push_back(cum.back() + (chain[i] - chain[i - 1]).norm());
  const double total = cum.back();
  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(total / spacing - 1e-12)));
  std::size_t seg = 0;
  for (std::size_t k = 0; k <= n; ++k) {
    if (k == n) {
      out.push_back(chain.back());
      break;
    }
    const double s = total * static_cast<double>(k) / static_cast<double>(n);
    while (seg + 2 < cum.size() && cum[seg + 1] < s) ++seg;
    if (chain.size() == 1) {
      out.push_back(chain.front());
      continue;
    }
    const double len = cum[seg + 1] - cum[seg];
    const double t = len > 0.0 ? std::clamp((s - cum[seg]) / len, 0.0, 1.0) : 0.0;
    out.push_back(chain[seg] + t * (chain[seg + 1] - chain[seg]));
  }
  return out;
}

std::vector<SampledPoint> sample_edges(std::span<const Polyline3D> polylines, double spacing) {
  std::vector<SampledPoint> out;
  for (std::size_t i = 0; i < polylines.size(); ++i) {
    std::vector<Point3> chain;
    for (const auto& p : polylines[i].points) chain.push_back(p.position);
    for (const auto& q : sample_chain(chain, spacing)) out.push_back({q, static_cast<int>(i)});
  }
  return out;
}

namespace {

json point_json(const Point2& p) { return {p.x(), p.y()}; }

bool same_seed(const PepcSeed& a, const PepcSeed& b) {
  return a.view == b.view && a.polyline == b.polyline && a.pos.segment == b.pos.segment && a.pos.t == b.pos.t;
}

struct PepcResult {
  ResolveStatus status = ResolveStatus::NoValidSelection;
  std::size_t selections_tested = 0;
  std::vector<ViewId> integrated;
  std::optional<Polyline3D> polyline;
};

PepcResult grow_pepc(const ViewSet& views, const Pepc& pepc, std::size_t index, const PipelineConfig& cfg,
                     const GrowthParams& params) {
  PepcResult result;
  auto outcome = resolve_pepc(views, pepc, params);
  result.status = outcome.status;
  result.selections_tested = outcome.selections_tested;
  if (!outcome.accepted) return result;

  Polyline3D pl = follow_edge(views, outcome.accepted->point, outcome.accepted->directions, params);
  pl.provenance = index;
  for (const auto& [view, cands] : pepc.candidates) {
    if (view == outcome.selection->view_a || view == outcome.selection->view_b || cands.empty()) continue;
    std::optional<IntegrateResult> chosen;
    int compatible = 0;
    for (const auto& c : cands) {
      auto r = integrate_view(views, pl, view, c, params);
      if (r.accepted) {
        ++compatible;
        chosen = std::move(r);
      }
    }
    if (compatible == 1) {
      pl = std::move(chosen->polyline);
      result.integrated.push_back(view);
    }
  }
  pl = refine_visibility(views, std::move(pl), cfg.d_sev_px, params);
  if (pl.points.size() >= 2) result.polyline = std::move(pl);
  return result;
}

}  // namespace

EdgeSetOutput run_pipeline(std::span<const CameraView> cameras, std::span<const ReferencePoint> refs,
                           const std::map<ViewId, EdgeImage>& images, const PipelineConfig& cfg,
                           const RunOptions& options) {
  cfg.validate();
  const int threads = resolve_thread_count(cfg.threads);
  const GrowthParams params{cfg.eps_px, cfg.step_px, 0.5, cfg.min_crossing_deg};
  std::ostream* log = options.debug_log;

  const ViewSet views = build_views(cameras, images, cfg, threads);
  const double diagonal = scene_diagonal(refs);
  const double r_outer = cfg.r_outer_rel * diagonal;
  const double r_inner = cfg.r_inner_ratio * r_outer;
  const double spacing = cfg.sample_spacing > 0.0 ? cfg.sample_spacing : 0.0025 * diagonal;

  PipelineStats local_stats;
  PipelineStats& stats = options.stats ? *options.stats : local_stats;
  stats = PipelineStats{};
  stats.scene_diagonal = diagonal;
  for (const auto& v : views) stats.polylines_per_view[v.camera.id()] = v.edges.size();
  if (log) {
    for (const auto& v : views) *log << json{{"stage", "graph"}, {"view", v.camera.id()}, {"polylines", v.edges.size()}}.dump() << "\n";
  }

  const std::vector<Pec> pecs = match_views(views, refs, cfg);
  stats.pecs = pecs.size();

  std::vector<std::vector<Pepc>> from_refs(refs.size());
  parallel_for(refs.size(), threads, [&](std::size_t i) {
    from_refs[i] = pepc_from_ref_point(refs[i], views, r_inner, r_outer);
  });
  std::vector<Pepc> ref_pepcs;
  for (auto& batch : from_refs) {
    for (auto& p : batch) ref_pepcs.push_back(std::move(p));
  }
  sort_pepcs(ref_pepcs, views);
  ref_pepcs = merge_close_seeds(std::move(ref_pepcs), views, cfg.seed_merge_px);

  std::vector<std::vector<Pepc>> from_pecs(pecs.size());
  parallel_for(pecs.size(), threads, [&](std::size_t i) {
    from_pecs[i] = pepc_from_pec(pecs[i], static_cast<int>(i), views, cfg.pec_sample_step_px);
  });
  std::vector<Pepc> pepcs = std::move(ref_pepcs);
  for (auto& batch : from_pecs) {
    for (auto& p : batch) pepcs.push_back(std::move(p));
  }
  stats.pepcs = pepcs.size();

  std::vector<PepcResult> results(pepcs.size());
  parallel_for(pepcs.size(), threads, [&](std::size_t i) { results[i] = grow_pepc(views, pepcs[i], i, cfg, params); });

  std::vector<Polyline3D> grown;
  std::vector<const PepcSeed*> kept_seeds;
  for (std::size_t i = 0; i < results.size(); ++i) {
    auto& r = results[i];
    ++stats.resolve_counts[to_string(r.status)];
    bool duplicate = false;
    if (r.polyline) {
      duplicate = std::any_of(kept_seeds.begin(), kept_seeds.end(),
                              [&](const PepcSeed* s) { return same_seed(*s, pepcs[i].seed); });
    }
    if (log) {
      json line{{"stage", "pepc"},
                {"index", i},
                {"source", pepcs[i].provenance.source == PepcSource::RefPoint ? "ref_point" : "pec"},
                {"source_id", pepcs[i].provenance.id},
                {"seed_view", pepcs[i].seed.view},
                {"seed", point_json(pepcs[i].seed.point)},
                {"status", to_string(r.status)},
                {"selections_tested", r.selections_tested},
                {"integrated_views", r.integrated}};
      if (r.polyline) line["points"] = r.polyline->points.size();
      if (duplicate) line["duplicate"] = true;
      *log << line.dump() << "\n";
    }
    if (!r.polyline || duplicate) continue;
    kept_seeds.push_back(&pepcs[i].seed);
    grown.push_back(std::move(*r.polyline));
  }
  stats.grown = grown.size();

  EdgeSetOutput out;
  out.polylines = filter_outliers(std::move(grown));
  stats.after_outlier_filter = out.polylines.size();
  if (log) {
    *log << json{{"stage", "outliers"},
                 {"median_observations", median_observation_count(out.polylines)},
                 {"kept", out.polylines.size()},
                 {"grown", stats.grown}}
                .dump()
         << "\n";
  }

  for (const auto& pl : out.polylines) {
    for (const auto& p : pl.points) {
      if (!satisfies_contract(views, p, cfg.eps_px)) {
        throw InvariantBreach("reconstructed point from PEPC " + std::to_string(pl.provenance) +
                              " breaks the reprojection bound");
      }
    }
  }

  out.sample_spacing = spacing;
  if (spacing > 0.0) out.sampled_cloud = sample_edges(out.polylines, spacing);
  return out;
}

EdgeSetOutput run_pipeline(const Scene& scene, const PipelineConfig& cfg, const RunOptions& options) {
  std::map<ViewId, EdgeImage> images;
  for (const auto& cam : scene.cameras) images.emplace(cam.id(), read_edge_image(scene.edge_image_path(cam.id())));
  return run_pipeline(scene.cameras, scene.ref_points, images, cfg, options);
}

}  // namespace edgeforge
