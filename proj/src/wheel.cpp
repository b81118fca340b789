#include "plviwo/wheel.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace plviwo {

std::pair<double, double> body_rates(const WheelMeasurement& m, const WheelIntrinsics& k) {
  const double v = (m.w_mr * k.r_r + m.w_ml * k.r_l) / 2.0;
  const double w = (m.w_mr * k.r_r - m.w_ml * k.r_l) / k.b;
  return {v, w};
}

WheelPreintegration preintegrate(const std::vector<WheelMeasurement>& ms,
                                 const WheelIntrinsics& k, const NoiseParams& noise) {
  if (ms.size() < 2) {
    throw_error(ErrorCode::NonMonotonicTime, "preintegration needs at least two samples");
  }
  double theta = 0, x = 0, y = 0;
  Mat3d P = Mat3d::Zero();  // (theta, x, y)

  // wheel-rate noise enters through the body-rate map
  Eigen::Matrix<double, 2, 2> Hn;
  Hn << -k.r_l / k.b, k.r_r / k.b,   // d(w)/d(n_l, n_r)
      k.r_l / 2.0, k.r_r / 2.0;      // d(v)/d(n_l, n_r)

  for (size_t i = 0; i + 1 < ms.size(); ++i) {
    const double dt = ms[i + 1].t - ms[i].t;
    if (dt < 0) throw_error(ErrorCode::NonMonotonicTime, "wheel samples must be time-ordered");
    if (dt == 0) continue;
    const auto [v1, w1] = body_rates(ms[i], k);
    const auto [v2, w2] = body_rates(ms[i + 1], k);
    const double v = 0.5 * (v1 + v2);
    const double w = 0.5 * (w1 + w2);

    // exact arc for the interval-constant rates; L'Hopital branch below
    double dx, dy, dx_dth, dy_dth, dx_dv, dy_dv, dx_dw, dy_dw;
    if (std::abs(w) > 1e-9) {
      const double th1 = theta + w * dt;
      const double dsin = std::sin(th1) - std::sin(theta);
      const double dcos = std::cos(th1) - std::cos(theta);
      dx = (v / w) * dsin;
      dy = -(v / w) * dcos;
      dx_dth = (v / w) * dcos;
      dy_dth = (v / w) * dsin;
      dx_dv = dsin / w;
      dy_dv = -dcos / w;
      dx_dw = -(v / (w * w)) * dsin + (v / w) * std::cos(th1) * dt;
      dy_dw = (v / (w * w)) * dcos + (v / w) * std::sin(th1) * dt;
    } else {
      const double th_mid = theta + 0.5 * w * dt;
      const double c = std::cos(th_mid), s = std::sin(th_mid);
      dx = v * c * dt;
      dy = v * s * dt;
      dx_dth = -v * s * dt;
      dy_dth = v * c * dt;
      dx_dv = c * dt;
      dy_dv = s * dt;
      dx_dw = -0.5 * v * s * dt * dt;
      dy_dw = 0.5 * v * c * dt * dt;
    }

    Mat3d Phi = Mat3d::Identity();
    Phi(1, 0) = dx_dth;
    Phi(2, 0) = dy_dth;

    Eigen::Matrix<double, 3, 2> Gi;  // wrt (n_w, n_v)
    Gi << dt, 0,
        dx_dw, dx_dv,
        dy_dw, dy_dv;
    const Eigen::Matrix<double, 3, 2> Gn = Gi * Hn;
    const Mat2d Q = (noise.sigma_w * noise.sigma_w / dt) * Mat2d::Identity();

    P = (Phi * P * Phi.transpose() + Gn * Q * Gn.transpose()).eval();
    x += dx;
    y += dy;
    theta += w * dt;
  }

  WheelPreintegration out;
  out.t_start = ms.front().t;
  out.t_end = ms.back().t;
  out.z << 0, 0, theta, x, y, 0;
  // observed slots carry the propagated covariance, constrained slots sigma_p
  const int obs_slots[3] = {2, 3, 4};
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) out.cov(obs_slots[a], obs_slots[b]) = P(a, b);
  }
  out.cov(0, 0) += noise.sigma_p * noise.sigma_p;
  out.cov(1, 1) += noise.sigma_p * noise.sigma_p;
  out.cov(5, 5) += noise.sigma_p * noise.sigma_p;
  return out;
}

Vec6d predict_wheel(const Clone& clone_prev, const Clone& clone_cur, const Pose3d& T_WI) {
  const Mat3d R_WI = T_WI.rotation.matrix();
  const Vec3d c = T_WI.inverse().translation;  // wheel origin in the IMU frame
  const Mat3d R1 = clone_prev.R_IG.matrix();
  const Mat3d R2 = clone_cur.R_IG.matrix();

  const Mat3d M = R_WI * R1 * R2.transpose() * R_WI.transpose();
  const Vec3d rot = so3_log(M);
  const Vec3d trans = R_WI * R1 * (clone_cur.p + R2.transpose() * c - clone_prev.p - R1.transpose() * c);
  Vec6d z;
  z << rot, trans;
  return z;
}

Eigen::Matrix<double, 6, 12> predict_wheel_jacobian(const Clone& clone_prev,
                                                    const Clone& clone_cur, const Pose3d& T_WI) {
  const Mat3d R_WI = T_WI.rotation.matrix();
  const Vec3d c = T_WI.inverse().translation;
  const Mat3d R1 = clone_prev.R_IG.matrix();
  const Mat3d R2 = clone_cur.R_IG.matrix();

  const Mat3d M = R_WI * R1 * R2.transpose() * R_WI.transpose();
  const Vec3d rot = so3_log(M);
  // the -R1^T c lever arm cancels against the leading R1 and drops out of the
  // rotation-error derivative
  const Vec3d q = R1 * (clone_cur.p + R2.transpose() * c - clone_prev.p);

  Eigen::Matrix<double, 6, 12> H = Eigen::Matrix<double, 6, 12>::Zero();
  H.block<3, 3>(0, 0) = so3_left_jacobian_inverse(rot) * R_WI;
  H.block<3, 3>(0, 6) = -so3_right_jacobian_inverse(rot) * R_WI;
  H.block<3, 3>(3, 0) = -R_WI * skew(q);
  H.block<3, 3>(3, 3) = -R_WI * R1;
  H.block<3, 3>(3, 6) = R_WI * R1 * R2.transpose() * skew(c);
  H.block<3, 3>(3, 9) = R_WI * R1;
  return H;
}

void wheel_update(EstimatorState& state, const WheelPreintegration& pre, const Pose3d& T_WI) {
  int i_prev = -1, i_cur = -1;
  for (size_t i = 0; i < state.window.size(); ++i) {
    if (std::abs(state.window.clones[i].t - pre.t_start) < 1e-9) i_prev = static_cast<int>(i);
    if (std::abs(state.window.clones[i].t - pre.t_end) < 1e-9) i_cur = static_cast<int>(i);
  }
  if (i_prev < 0 || i_cur < 0) {
    throw_error(ErrorCode::MissingClone, "no clones at the preintegration boundaries");
  }
  const Clone& c1 = state.window.clones[i_prev];
  const Clone& c2 = state.window.clones[i_cur];

  const Vec6d r = pre.z - predict_wheel(c1, c2, T_WI);
  const Eigen::Matrix<double, 6, 12> Hw = predict_wheel_jacobian(c1, c2, T_WI);

  MatXd H = MatXd::Zero(6, state.dim());
  H.block<6, 6>(0, 15 + 6 * i_prev) = Hw.leftCols<6>();
  H.block<6, 6>(0, 15 + 6 * i_cur) = Hw.rightCols<6>();
  ekf_update(state, H, r, pre.cov);
}

}  // namespace plviwo
