#pragma once

#include "edgeforge/pepc.hpp"

#include <array>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace edgeforge {

struct GrowthParams {
  double eps_px = 2.5;    ///< maximum reprojection error of an accepted 3D edge-point
  double step_px = 10.0;  ///< edge-following step along the seed view
  double min_step_px = 0.5;
  double min_crossing_deg = 30.0;  ///< growth ignores epipolar crossings flatter than this
};

struct PointObservation {
  ViewId view = 0;
  Point2 uv = Point2::Zero();
  int polyline = -1;
  ChainPos pos;
};

struct EdgePoint3D {
  Point3 position = Point3::Zero();
  std::vector<PointObservation> observations;  ///< ascending view id
  double max_reproj_error = 0.0;

  const PointObservation* find(ViewId view) const;
  std::size_t observation_count() const { return observations.size(); }
};

/// Chain directions, relative to the forward orientation, of the seed view
/// followed by the two auxiliary views.
struct DirectionTriple {
  std::array<ViewId, 3> views{};
  std::array<int, 3> signs{1, 1, 1};
};

struct Polyline3D {
  std::vector<EdgePoint3D> points;
  ViewId seed_view = 0;
  std::size_t anchor = 0;              ///< index of the point grown from the PEPC seed
  std::map<ViewId, int> directions;    ///< followed views and their chain direction
  std::size_t provenance = 0;          ///< index of the originating PEPC

  double length() const;
};

/// Seed plus one candidate in each of two other views.
struct Selection {
  PepcSeed seed;
  ViewId view_a = 0;
  CandidatePoint cand_a;
  ViewId view_b = 0;
  CandidatePoint cand_b;
};

/// Triangulates the observations; empty on geometric failure or when the
/// maximum reprojection error exceeds eps.
std::optional<EdgePoint3D> make_edge_point(const ViewSet& views, std::vector<PointObservation> obs, double eps);

/// First crossing of the line met when walking the chain from `from` in
/// direction `dir` (+1 towards the chain end, -1 towards its start).
std::optional<CandidatePoint> first_intersection(const Polyline2D& pl, int polyline_id, const ChainPos& from, int dir,
                                                 const Line2& line);

/// Angle between the line and the chain segment at pos, in [0, 90].
double crossing_angle_deg(const Polyline2D& pl, const ChainPos& pos, const Line2& line);

struct ValidatedSelection {
  EdgePoint3D point;
  DirectionTriple directions;
};

/// Accepts a three-view selection when it triangulates within eps and
/// exactly one of the four relative orientation combinations survives a
/// first edge-following step in either orientation.
std::optional<ValidatedSelection> validate_selection(const ViewSet& views, const Selection& sel, const GrowthParams& params);

enum class ResolveStatus { Accepted, NoValidSelection, Ambiguous, TooFewViews };
const char* to_string(ResolveStatus s);

struct ResolveOutcome {
  ResolveStatus status = ResolveStatus::NoValidSelection;
  std::optional<ValidatedSelection> accepted;
  std::optional<Selection> selection;
  std::size_t selections_tested = 0;
};

/// Enumerates the three-view selections over auxiliary view pairs (most
/// candidates first). A pair with exactly one valid selection is accepted, a
/// pair with several rejects the PEPC, a pair with none defers to the next.
ResolveOutcome resolve_pepc(const ViewSet& views, const Pepc& pepc, const GrowthParams& params);

/// Grows a 3D polyline from a validated point in both orientations.
Polyline3D follow_edge(const ViewSet& views, const EdgePoint3D& start, const DirectionTriple& dirs,
                       const GrowthParams& params);

struct IntegrateResult {
  Polyline3D polyline;
  bool accepted = false;
};

/// Adds a new view through a candidate observation of the anchor point,
/// propagates it along the chain and re-extends both ends.
IntegrateResult integrate_view(const ViewSet& views, Polyline3D pl, ViewId view, const CandidatePoint& candidate,
                               const GrowthParams& params);

/// Attaches observations from views that do not yet see a point, when a
/// single polyline lies within d_sev of its projection and both neighbouring
/// points agree with that polyline.
Polyline3D refine_visibility(const ViewSet& views, Polyline3D pl, double d_sev, const GrowthParams& params);

double median_observation_count(std::span<const Polyline3D> edges);
/// k_v = max(4, v_M / 2 + 1), not rounded.
double outlier_threshold(double median_count);
/// Drops polylines whose mean per-point observation count is below k_v.
std::vector<Polyline3D> filter_outliers(std::vector<Polyline3D> edges);

/// Re-triangulates the observations and checks the eps contract.
bool satisfies_contract(const ViewSet& views, const EdgePoint3D& p, double eps);

}  // namespace edgeforge
