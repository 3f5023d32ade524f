#pragma once

#include "edgeforge/pec_matching.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace edgeforge {

struct CandidatePoint {
  Point2 point = Point2::Zero();
  int polyline = -1;
  ChainPos pos;
};

struct Circle {
  Point2 center = Point2::Zero();
  double radius = 0.0;
};

/// Crossings of the chain with the line, ordered along the chain. A vertex
/// lying on the line (within 1e-9) is reported once.
std::vector<CandidatePoint> intersect_polyline_line(const Polyline2D& pl, int polyline_id, const Line2& line,
                                                    const std::optional<Circle>& clip = std::nullopt);

struct PepcSeed {
  ViewId view = 0;
  Point2 point = Point2::Zero();
  int polyline = -1;
  ChainPos pos;
};

enum class PepcSource { RefPoint, Pec };

struct PepcProvenance {
  PepcSource source = PepcSource::RefPoint;
  int id = 0;
};

/// Potential edge-point correspondence: a seed observation and, for other
/// views, the 2D edge-points that may correspond to it.
struct Pepc {
  PepcSeed seed;
  std::map<ViewId, std::vector<CandidatePoint>> candidates;
  PepcProvenance provenance;
};

/// Seeds are the closest chain points of polylines crossing the inner circle
/// around r's reprojection in each observing view; candidates lie on the
/// seed's epipolar line inside the outer circle of every other observing view.
/// Only PEPCs with at least two candidate views are returned.
std::vector<Pepc> pepc_from_ref_point(const ReferencePoint& r, const ViewSet& views, double r_inner, double r_outer);

/// Seeds sampled every `sample_step` px along the matched polylines of the
/// view with the longest matched length; candidates only on matched polylines.
std::vector<Pepc> pepc_from_pec(const Pec& pec, int pec_id, const ViewSet& views, double sample_step);

/// Initial view used by pepc_from_pec, or empty when the PEC has no views.
std::optional<ViewId> pec_initial_view(const Pec& pec, const ViewSet& views);

/// Selections that contain the seed and at least two further correspondences:
/// prod(|C_i| + 1) - sum |C_i| - 1.
std::int64_t count_selections(std::span<const std::size_t> candidate_counts);
std::int64_t count_selections(const Pepc& pepc);

/// Drops seeds that lie within `min_gap` px (along the same polyline of the
/// same view) of an earlier seed. Order is preserved.
std::vector<Pepc> merge_close_seeds(std::vector<Pepc> pepcs, const ViewSet& views, double min_gap = 2.0);

/// Canonical ordering: provenance, then seed view, polyline and arc length.
void sort_pepcs(std::vector<Pepc>& pepcs, const ViewSet& views);

std::string pepcs_to_json(std::span<const Pepc> pepcs);

}  // namespace edgeforge
