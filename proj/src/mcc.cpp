#include "plviwo/mcc.hpp"

#include <algorithm>

#include "plviwo/triangulation.hpp"

namespace plviwo {

double mcc_residual(const PointTrack& track, const PredictedPoses& poses,
                    const PinholeCamerad& cam) {
  std::vector<PointObservation> obs;
  obs.reserve(track.obs.size());
  for (const auto& [ci, uv] : track.obs) {
    obs.emplace_back(poses.cam_from_world.at(ci), uv);
  }
  const Vec3d p = triangulate_point(obs, cam);
  double sum = 0;
  for (const auto& [pose, uv] : obs) {
    sum += (uv - project_point(cam, pose, p)).norm();
  }
  return sum / static_cast<double>(obs.size());
}

std::vector<size_t> select_static_points(const std::vector<PointTrack>& tracks,
                                         const PredictedPoses& poses, const PinholeCamerad& cam,
                                         size_t max_count, double threshold_px) {
  std::vector<size_t> order(tracks.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return tracks[a].id < tracks[b].id; });

  std::vector<size_t> selected;
  for (size_t i : order) {
    if (selected.size() >= max_count) break;
    try {
      if (mcc_residual(tracks[i], poses, cam) < threshold_px) selected.push_back(i);
    } catch (const Error&) {
      // failed triangulation counts as failing the check
    }
  }
  return selected;
}

}  // namespace plviwo
