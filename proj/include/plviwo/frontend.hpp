#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "plviwo/camera.hpp"
#include "plviwo/so3.hpp"
#include "plviwo/types.hpp"

namespace plviwo {

enum class DirectionClass { X, Y, Z, None };

inline const char* to_string(DirectionClass c) {
  switch (c) {
    case DirectionClass::X: return "X";
    case DirectionClass::Y: return "Y";
    case DirectionClass::Z: return "Z";
    case DirectionClass::None: return "None";
  }
  return "?";
}

struct TrackedPoint {
  int64_t id = 0;
  Vec2d uv = Vec2d::Zero();
};

// Per-frame record of a 2D line: segment, point-feature ids assigned to it,
// and the vanishing-point direction class.
struct LineObservation {
  int64_t line_id = 0;  // 0 while unmatched
  Segment2Dd seg;
  std::set<int64_t> assigned_point_ids;
  DirectionClass dir_class = DirectionClass::None;
};

// A vanishing point is either a finite pixel location or, for directions
// (nearly) parallel to the image plane, a pure pixel-space direction.
struct VanishingPoint {
  bool at_infinity = false;
  Vec2d value = Vec2d::Zero();  // pixel position, or unit direction if at_infinity
};

struct VanishingPoints {
  VanishingPoint vp_x, vp_y, vp_z;

  const VanishingPoint& operator[](int axis) const {
    return axis == 0 ? vp_x : (axis == 1 ? vp_y : vp_z);
  }
};

// Projects the three IMU axes through R_CI (IMU frame -> camera frame).
VanishingPoints compute_vanishing_points(const PinholeCamerad& cam, const Rotation3d& R_CI);

DirectionClass classify_segment(const Segment2Dd& seg, const VanishingPoints& vps,
                                double threshold = 0.97);

// Euclidean distance from a point to a segment (endpoint distance outside the
// projection interval, perpendicular distance inside).
double point_segment_distance(const Vec2d& p, const Segment2Dd& seg);

// pair (point index, segment index); a point may appear with several segments.
using PointSegmentAssignment = std::vector<std::pair<size_t, size_t>>;

// A point is assigned when its projection falls strictly between the
// endpoints and the perpendicular distance is below max_dist.
PointSegmentAssignment assign_points_to_segments(const std::vector<TrackedPoint>& points,
                                                 const std::vector<Segment2Dd>& segs,
                                                 double max_dist = 3.0);

struct MergeParams {
  double angle_tol = 3.0 * M_PI / 180.0;
  double gap_tol = 10.0;      // px
  double lateral_tol = 3.0;   // px
};

std::vector<Segment2Dd> merge_segments(const std::vector<Segment2Dd>& segs,
                                       const MergeParams& params = {});

std::vector<Segment2Dd> filter_short(const std::vector<Segment2Dd>& segs, double min_len = 30.0);

struct TrackParams {
  double pos_tol = 30.0;               // px, midpoint displacement
  double dir_tol = 5.0 * M_PI / 180.0; // rad
  double assign_dist = 3.0;            // px, stage-2 sample-to-segment distance
};

using LineMatchList = std::vector<std::pair<size_t, size_t>>;  // (prev idx, cur idx)

// Stage 1: match lines through shared point-feature tracks. point_matches
// maps prev-frame point ids to cur-frame point ids.
LineMatchList track_lines_stage1(const std::vector<LineObservation>& prev,
                                 const std::vector<LineObservation>& cur,
                                 const std::unordered_map<int64_t, int64_t>& point_matches,
                                 const TrackParams& params = {});

// Stage 2: recover untracked lines by pushing five sampled points (endpoints,
// midpoint, quarter points) through a point tracker, then applying the
// stage-1 rules to the surviving samples.
using SampleTracker = std::function<std::optional<Vec2d>(const Vec2d&)>;

LineMatchList track_lines_stage2(const std::vector<LineObservation>& untracked_prev,
                                 const std::vector<LineObservation>& cur,
                                 const SampleTracker& sample_tracker,
                                 const TrackParams& params = {});

}  // namespace plviwo
