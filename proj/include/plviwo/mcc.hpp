#pragma once

#include <vector>

#include "plviwo/camera.hpp"
#include "plviwo/estimator.hpp"
#include "plviwo/pose.hpp"
#include "plviwo/types.hpp"

namespace plviwo {

// Camera poses predicted from IMU + wheel only (no visual corrections),
// indexed like the clone window the tracks refer to.
struct PredictedPoses {
  std::vector<Pose3d> cam_from_world;
};

// Mean reprojection magnitude of the track against a point triangulated from
// the predicted poses. Throws (triangulation errors) when the track cannot be
// triangulated; callers treat that as a failed check.
double mcc_residual(const PointTrack& track, const PredictedPoses& poses,
                    const PinholeCamerad& cam);

// First max_count tracks (in id order) whose residual stays below the
// threshold. Tracks that fail to triangulate are skipped.
std::vector<size_t> select_static_points(const std::vector<PointTrack>& tracks,
                                         const PredictedPoses& poses, const PinholeCamerad& cam,
                                         size_t max_count = 70, double threshold_px = 3.0);

}  // namespace plviwo
