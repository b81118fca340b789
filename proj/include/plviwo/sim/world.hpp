#pragma once

#include <cstdint>
#include <vector>

#include "plviwo/estimator.hpp"
#include "plviwo/frontend.hpp"
#include "plviwo/triangulation.hpp"
#include "plviwo/types.hpp"
#include "plviwo/wheel.hpp"

namespace plviwo::sim {

// piecewise-constant unicycle inputs; v must be continuous across segments
struct MotionPrimitive {
  double duration = 1.0;
  double v = 1.0;  // m/s
  double w = 0.0;  // rad/s
};

struct LineLandmark {
  Vec3d e1 = Vec3d::Zero();
  Vec3d e2 = Vec3d::Zero();
};

struct DynamicObject {
  Vec3d start = Vec3d::Zero();
  Vec3d velocity = Vec3d::Zero();  // m/s, world frame
  double t_on = 0;                 // active interval
  double t_off = 1e18;
};

struct Calib {
  PinholeCamerad cam = PinholeCamerad(400, 400, 320, 240);
  Pose3d T_CI;  // IMU -> camera
  Pose3d T_WI;  // IMU -> wheel
  WheelIntrinsics wheel;
  Vec3d gravity = Vec3d(0, 0, 9.81);
  double imu_rate = 100;
  double wheel_rate = 100;
  double cam_rate = 10;
  int image_width = 640;
  int image_height = 480;
};

// camera that looks along the vehicle's +x axis (x right, y down, z forward)
Rotation3d forward_camera_rotation();

struct WorldSpec {
  std::vector<MotionPrimitive> primitives;
  std::vector<Vec3d> landmarks;
  std::vector<LineLandmark> lines;
  std::vector<DynamicObject> dynamics;
  Calib calib;
  NoiseParams inject;        // injection sigmas; zero disables a noise source
  bool inject_noise = true;  // false: exact noiseless streams
  Vec3d gyro_bias = Vec3d::Zero();
  Vec3d accel_bias = Vec3d::Zero();
  uint64_t seed = 0;
};

void validate_world(const WorldSpec& spec);

struct FramePointObs {
  int64_t id = 0;
  Vec2d uv = Vec2d::Zero();
};

struct FrameLineObs {
  int64_t id = 0;
  Segment2Dd seg;
};

struct CameraFrame {
  double t = 0;
  std::vector<FramePointObs> points;
  std::vector<FrameLineObs> lines;
};

struct GroundTruth {
  double t = 0;
  Pose3d T_GI;            // IMU -> world
  Vec3d v_world = Vec3d::Zero();
};

struct SensorStreams {
  std::vector<ImuSample> imu;
  std::vector<WheelMeasurement> wheel;
  std::vector<CameraFrame> frames;
  std::vector<GroundTruth> truth;  // at camera times
};

// planar ground-truth pose of the wheel frame at time t (wheel -> world)
Pose3d wheel_pose_at(const std::vector<MotionPrimitive>& primitives, double t);

SensorStreams simulate_world(const WorldSpec& spec);

struct PipelineFlags {
  bool points = true;
  bool lines = true;
  bool wheel = true;
  bool mcc = true;
};

struct ViwoConfig {
  size_t window = 11;
  NoiseParams filter_noise;
  int max_points = 70;
  double mcc_threshold = 3.0;
  int min_track_obs = 3;
  double min_seg_len = 30.0;
  TrackParams track;
  MergeParams merge;
  RefinementConfig refine;  // LM, 5 iterations

  ViwoConfig() {
    refine.w_pl = 2500.0;
    refine.w_d = 160000.0;
  }
};

struct ViwoResult {
  std::vector<std::pair<double, Pose3d>> trajectory;  // (t, estimated T_GI)
  double ate_rmse = 0;
  int point_updates = 0;
  int line_updates = 0;
  int gated_lines = 0;
  int wheel_updates = 0;
  int mcc_rejected = 0;
};

ViwoResult run_viwo(const SensorStreams& streams, const Calib& calib, const PipelineFlags& flags,
                    const ViwoConfig& cfg = {});

double ate_rmse(const std::vector<std::pair<double, Pose3d>>& trajectory,
                const std::vector<GroundTruth>& truth);

// a corridor world with landmarks and heading-aligned lines along the path
WorldSpec make_default_world(uint64_t seed, bool with_dynamics);

}  // namespace plviwo::sim
