#pragma once

#include <utility>
#include <vector>

#include "plviwo/estimator.hpp"
#include "plviwo/pose.hpp"
#include "plviwo/types.hpp"

namespace plviwo {

struct WheelMeasurement {
  double t = 0;
  double w_ml = 0;  // left wheel rate, rad/s
  double w_mr = 0;  // right wheel rate, rad/s
};

struct WheelIntrinsics {
  double r_l = 0.3;  // wheel radii, m
  double r_r = 0.3;
  double b = 0.5;    // baselink length, m
};

// SE(2)-constrained SE(3) relative-pose observation between two clone times.
// z = (0, 0, dtheta, dx, dy, 0): roll/pitch rotation and z displacement are
// pinned to zero under the planar-motion assumption.
struct WheelPreintegration {
  Vec6d z = Vec6d::Zero();
  Mat6d cov = Mat6d::Zero();
  double t_start = 0;
  double t_end = 0;
};

// body linear and angular rate from the two wheel rates
std::pair<double, double> body_rates(const WheelMeasurement& m, const WheelIntrinsics& k);

// midpoint integration of the unicycle model starting at local theta = 0;
// sigma_w drives the observed slots, sigma_p pads the constrained ones.
WheelPreintegration preintegrate(const std::vector<WheelMeasurement>& ms,
                                 const WheelIntrinsics& k, const NoiseParams& noise);

// relative wheel-frame pose between two IMU clones; T_WI maps IMU -> wheel.
Vec6d predict_wheel(const Clone& clone_prev, const Clone& clone_cur, const Pose3d& T_WI);

// measurement Jacobian of predict_wheel wrt the two clones' error states
// (columns: prev dtheta, prev dp, cur dtheta, cur dp).
Eigen::Matrix<double, 6, 12> predict_wheel_jacobian(const Clone& clone_prev,
                                                    const Clone& clone_cur, const Pose3d& T_WI);

// EKF update against the clones at pre.t_start / pre.t_end.
void wheel_update(EstimatorState& state, const WheelPreintegration& pre, const Pose3d& T_WI);

}  // namespace plviwo
