#pragma once

#include <cstdint>
#include <vector>

#include "plviwo/camera.hpp"
#include "plviwo/line.hpp"
#include "plviwo/pose.hpp"
#include "plviwo/triangulation.hpp"
#include "plviwo/types.hpp"

namespace plviwo {

struct NoiseParams {
  double sigma_g = 1.7e-4;    // gyro white noise  (rad/s/sqrt(Hz))
  double sigma_a = 2.0e-3;    // accel white noise (m/s^2/sqrt(Hz))
  double sigma_bg = 1.9e-5;   // gyro bias random walk
  double sigma_ba = 3.0e-3;   // accel bias random walk
  double sigma_px = 1.0;      // point pixel noise
  double sigma_l = 1.0;       // line endpoint pixel noise
  double sigma_w = 1.0e-2;    // wheel rate noise (rad/s)
  double sigma_p = 2.0e-2;    // planar-motion uncertainty
};

void validate_filter_noise(const NoiseParams& noise);

struct ImuState {
  Rotation3d R_IG;            // world -> IMU
  Vec3d p = Vec3d::Zero();    // IMU position in world
  Vec3d v = Vec3d::Zero();    // velocity in world
  Vec3d bg = Vec3d::Zero();
  Vec3d ba = Vec3d::Zero();
};

struct Clone {
  double t = 0;
  Rotation3d R_IG;
  Vec3d p = Vec3d::Zero();
};

struct CloneWindow {
  std::vector<Clone> clones;
  size_t max_size = 11;

  size_t size() const { return clones.size(); }
  bool full() const { return clones.size() >= max_size; }
};

// Error state is [dtheta dp dv dbg dba | per clone (dtheta dp)], with the
// left-multiplicative rotation error R = Exp(dtheta) * R_hat.
struct EstimatorState {
  double t = 0;
  ImuState imu;
  CloneWindow window;
  MatXd cov = 1e-4 * MatXd::Identity(15, 15);
  Vec3d gravity = Vec3d(0, 0, 9.81);  // a_m = R (a_world + g) + ba convention
  NoiseParams noise;

  int dim() const { return 15 + 6 * static_cast<int>(window.size()); }
};

struct ImuSample {
  double t = 0;
  Vec3d w = Vec3d::Zero();  // rad/s
  Vec3d a = Vec3d::Zero();  // m/s^2
};

// Mean map of one constant-input step (midpoint rotation for the velocity and
// position updates).
ImuState imu_step_mean(const ImuState& x, const Vec3d& w_m, const Vec3d& a_m, double dt,
                       const Vec3d& gravity);

struct ImuStepJacobians {
  Eigen::Matrix<double, 15, 15> F;
  Eigen::Matrix<double, 15, 12> G;  // noise order: n_g, n_a, n_bg, n_ba
};

ImuStepJacobians imu_step_jacobians(const ImuState& x, const Vec3d& w_m, const Vec3d& a_m,
                                    double dt);

// Propagates mean and covariance through the sample list (pairs are averaged,
// one step per interval).
void propagate(EstimatorState& state, const std::vector<ImuSample>& samples);

void augment_clone(EstimatorState& state, double t);
void marginalize_oldest(EstimatorState& state);

// Joseph-form EKF update; throws SingularInnovation when S is not invertible.
void ekf_update(EstimatorState& state, const MatXd& H, const VecXd& r, const MatXd& R_noise);

// 95% chi-square quantile (Wilson-Hilferty approximation).
double chi2_quantile_95(int dof);

// Left null-space projection of the feature Jacobian (Eq.-16 style): H_x, r
// are replaced by Qn^T H_x, Qn^T r with Qn^T H_f = 0. Returns false when H_f
// has no left null space (too few rows).
bool nullspace_project(MatXd& H_x, MatXd& H_f, VecXd& r);

// world -> IMU transform of a clone, and world -> camera with extrinsic T_CI.
Pose3d clone_pose_world_to_imu(const Clone& c);
Pose3d camera_pose_from_clone(const Clone& c, const Pose3d& T_CI);

struct PointTrack {
  int64_t id = 0;
  std::vector<std::pair<size_t, Vec2d>> obs;  // (clone index, pixel)
};

enum class TrackStatus { Accepted, RejectedChi2, TriangulationFailed, TooFewObservations };

std::vector<TrackStatus> point_update(EstimatorState& state, const std::vector<PointTrack>& tracks,
                                      const PinholeCamerad& cam, const Pose3d& T_CI);

struct LineUpdateCandidate {
  int64_t id = 0;
  PluckerLined line;  // refined, world frame
  std::vector<std::pair<size_t, Segment2Dd>> obs;  // (clone index, segment)
};

std::vector<TrackStatus> line_update(EstimatorState& state,
                                     const std::vector<LineUpdateCandidate>& lines,
                                     const PinholeCamerad& cam, const Pose3d& T_CI);

// Measurement Jacobian blocks of a line's image residual with respect to one
// clone's error state; exposed for the finite-difference checks.
struct LineCloneJacobian {
  Vec2d r;
  Eigen::Matrix<double, 2, 4> H_line;   // wrt orthonormal delta
  Eigen::Matrix<double, 2, 6> H_clone;  // wrt (dtheta, dp) of the clone
  bool valid = false;
};

LineCloneJacobian line_clone_jacobian(const PinholeCamerad& cam, const Pose3d& T_CI,
                                      const Clone& clone, const Segment2Dd& seg,
                                      const OrthonormalLined& lo);

}  // namespace plviwo
