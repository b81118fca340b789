#include "plviwo/estimator.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace plviwo {

void validate_filter_noise(const NoiseParams& noise) {
  const double vals[] = {noise.sigma_g, noise.sigma_a, noise.sigma_bg, noise.sigma_ba,
                         noise.sigma_px, noise.sigma_l, noise.sigma_w, noise.sigma_p};
  for (double v : vals) {
    if (!(v > 0)) throw_error(ErrorCode::InvalidConfig, "filter noise parameters must be > 0");
  }
}

ImuState imu_step_mean(const ImuState& x, const Vec3d& w_m, const Vec3d& a_m, double dt,
                       const Vec3d& gravity) {
  const Vec3d w = w_m - x.bg;
  const Vec3d a = a_m - x.ba;
  const Rotation3d dR_half = Rotation3d::exp((-0.5 * dt * w).eval());
  const Rotation3d R_mid = dR_half * x.R_IG;
  const Vec3d a_world = R_mid.inverse() * a - gravity;
  ImuState out = x;
  out.R_IG = Rotation3d::exp((-dt * w).eval()) * x.R_IG;
  out.v = x.v + dt * a_world;
  out.p = x.p + dt * x.v + 0.5 * dt * dt * a_world;
  return out;
}

ImuStepJacobians imu_step_jacobians(const ImuState& x, const Vec3d& w_m, const Vec3d& a_m,
                                    double dt) {
  const Vec3d w = w_m - x.bg;
  const Vec3d a = a_m - x.ba;
  const Mat3d Gamma = so3_exp((-dt * w).eval());
  const Mat3d Gamma2 = so3_exp((-0.5 * dt * w).eval());
  const Mat3d Jr_full = so3_right_jacobian((-dt * w).eval());
  const Mat3d Jr_half = so3_right_jacobian((-0.5 * dt * w).eval());
  const Mat3d Rt = x.R_IG.matrix().transpose();
  const Vec3d m_hat = Gamma2.transpose() * a;  // accel seen through the midpoint rotation

  ImuStepJacobians out;
  out.F.setIdentity();
  out.G.setZero();

  const Mat3d Mv = Rt * skew(m_hat);          // d(a_world)/d(dtheta)
  const Mat3d Mg = Mv * Jr_half * (0.5 * dt); // d(a_world)/d(dbg)
  const Mat3d Ma = -Rt * Gamma2.transpose();  // d(a_world)/d(dba)

  out.F.block<3, 3>(0, 0) = Gamma;
  out.F.block<3, 3>(0, 9) = Gamma * Jr_full * dt;
  out.F.block<3, 3>(3, 0) = 0.5 * dt * dt * Mv;
  out.F.block<3, 3>(3, 6) = dt * Mat3d::Identity();
  out.F.block<3, 3>(3, 9) = 0.5 * dt * dt * Mg;
  out.F.block<3, 3>(3, 12) = 0.5 * dt * dt * Ma;
  out.F.block<3, 3>(6, 0) = dt * Mv;
  out.F.block<3, 3>(6, 9) = dt * Mg;
  out.F.block<3, 3>(6, 12) = dt * Ma;

  // white noises enter like the corresponding bias errors
  out.G.block<3, 3>(0, 0) = out.F.block<3, 3>(0, 9);
  out.G.block<3, 3>(3, 0) = out.F.block<3, 3>(3, 9);
  out.G.block<3, 3>(3, 3) = out.F.block<3, 3>(3, 12);
  out.G.block<3, 3>(6, 0) = out.F.block<3, 3>(6, 9);
  out.G.block<3, 3>(6, 3) = out.F.block<3, 3>(6, 12);
  out.G.block<3, 3>(9, 6) = Mat3d::Identity();
  out.G.block<3, 3>(12, 9) = Mat3d::Identity();
  return out;
}

namespace {

void symmetrize(MatXd& m) { m = (0.5 * (m + m.transpose())).eval(); }

// clamp tiny negative eigenvalues that slip in through roundoff
void project_psd(MatXd& m) {
  symmetrize(m);
  Eigen::SelfAdjointEigenSolver<MatXd> es(m);
  if (es.eigenvalues().minCoeff() >= -1e-9) return;
  VecXd ev = es.eigenvalues().cwiseMax(0.0);
  m = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  symmetrize(m);
}

}  // namespace

void propagate(EstimatorState& state, const std::vector<ImuSample>& samples) {
  if (samples.size() < 2) return;
  for (size_t i = 0; i + 1 < samples.size(); ++i) {
    const double dt = samples[i + 1].t - samples[i].t;
    if (dt < 0) throw_error(ErrorCode::NonMonotonicTime, "IMU samples must be time-ordered");
    if (dt == 0) continue;
    const Vec3d w_m = 0.5 * (samples[i].w + samples[i + 1].w);
    const Vec3d a_m = 0.5 * (samples[i].a + samples[i + 1].a);

    const ImuStepJacobians j = imu_step_jacobians(state.imu, w_m, a_m, dt);
    state.imu = imu_step_mean(state.imu, w_m, a_m, dt, state.gravity);

    Eigen::Matrix<double, 12, 12> Q = Eigen::Matrix<double, 12, 12>::Zero();
    const NoiseParams& n = state.noise;
    Q.block<3, 3>(0, 0) = (n.sigma_g * n.sigma_g / dt) * Mat3d::Identity();
    Q.block<3, 3>(3, 3) = (n.sigma_a * n.sigma_a / dt) * Mat3d::Identity();
    Q.block<3, 3>(6, 6) = (n.sigma_bg * n.sigma_bg * dt) * Mat3d::Identity();
    Q.block<3, 3>(9, 9) = (n.sigma_ba * n.sigma_ba * dt) * Mat3d::Identity();

    const int d = state.dim();
    state.cov.topLeftCorner(15, 15) =
        (j.F * state.cov.topLeftCorner(15, 15) * j.F.transpose() + j.G * Q * j.G.transpose())
            .eval();
    if (d > 15) {
      state.cov.topRightCorner(15, d - 15) = (j.F * state.cov.topRightCorner(15, d - 15)).eval();
      state.cov.bottomLeftCorner(d - 15, 15) = state.cov.topRightCorner(15, d - 15).transpose();
    }
    symmetrize(state.cov);
  }
  state.t = samples.back().t;
}

void augment_clone(EstimatorState& state, double t) {
  if (state.window.full()) throw_error(ErrorCode::WindowFull, "clone window is full");
  if (!state.window.clones.empty() && t <= state.window.clones.back().t) {
    throw_error(ErrorCode::NonMonotonicTime, "clone timestamps must increase");
  }
  const int d = state.dim();
  MatXd J = MatXd::Zero(6, d);
  J.block<3, 3>(0, 0) = Mat3d::Identity();
  J.block<3, 3>(3, 3) = Mat3d::Identity();

  MatXd cov(d + 6, d + 6);
  cov.topLeftCorner(d, d) = state.cov;
  cov.bottomLeftCorner(6, d) = J * state.cov;
  cov.topRightCorner(d, 6) = cov.bottomLeftCorner(6, d).transpose();
  cov.bottomRightCorner(6, 6) = J * state.cov * J.transpose();
  state.cov = std::move(cov);
  state.window.clones.push_back({t, state.imu.R_IG, state.imu.p});
  symmetrize(state.cov);
}

void marginalize_oldest(EstimatorState& state) {
  if (state.window.clones.empty()) throw_error(ErrorCode::WindowEmpty, "no clone to marginalize");
  const int d = state.dim();
  MatXd cov(d - 6, d - 6);
  cov.topLeftCorner(15, 15) = state.cov.topLeftCorner(15, 15);
  if (d > 21) {
    cov.topRightCorner(15, d - 21) = state.cov.topRightCorner(15, d - 21);
    cov.bottomLeftCorner(d - 21, 15) = state.cov.bottomLeftCorner(d - 21, 15);
    cov.bottomRightCorner(d - 21, d - 21) = state.cov.bottomRightCorner(d - 21, d - 21);
  }
  state.cov = std::move(cov);
  state.window.clones.erase(state.window.clones.begin());
}

void ekf_update(EstimatorState& state, const MatXd& H, const VecXd& r, const MatXd& R_noise) {
  if (H.rows() == 0) return;
  const MatXd PHt = state.cov * H.transpose();
  MatXd S = H * PHt + R_noise;
  symmetrize(S);
  Eigen::LDLT<MatXd> ldlt(S);
  if (ldlt.info() != Eigen::Success) {
    throw_error(ErrorCode::SingularInnovation, "innovation covariance not decomposable");
  }
  const MatXd K = ldlt.solve(PHt.transpose()).transpose();
  if (!K.allFinite()) {
    throw_error(ErrorCode::SingularInnovation, "singular innovation covariance");
  }
  const VecXd dx = K * r;

  const int d = state.dim();
  const MatXd IKH = MatXd::Identity(d, d) - K * H;
  state.cov = (IKH * state.cov * IKH.transpose() + K * R_noise * K.transpose()).eval();
  project_psd(state.cov);

  state.imu.R_IG = Rotation3d::exp(dx.segment<3>(0)) * state.imu.R_IG;
  state.imu.p += dx.segment<3>(3);
  state.imu.v += dx.segment<3>(6);
  state.imu.bg += dx.segment<3>(9);
  state.imu.ba += dx.segment<3>(12);
  for (size_t i = 0; i < state.window.size(); ++i) {
    Clone& c = state.window.clones[i];
    c.R_IG = Rotation3d::exp(dx.segment<3>(15 + 6 * i)) * c.R_IG;
    c.p += dx.segment<3>(18 + 6 * i);
  }
}

double chi2_quantile_95(int dof) {
  const double k = static_cast<double>(dof);
  const double z = 1.6448536269514722;  // normal 95% quantile
  const double a = 2.0 / (9.0 * k);
  const double t = 1.0 - a + z * std::sqrt(a);
  return k * t * t * t;
}

Pose3d clone_pose_world_to_imu(const Clone& c) {
  return Pose3d(c.R_IG, -(c.R_IG * c.p));
}

Pose3d camera_pose_from_clone(const Clone& c, const Pose3d& T_CI) {
  return T_CI * clone_pose_world_to_imu(c);
}

namespace {

struct StackedUpdate {
  MatXd H;
  VecXd r;
  int rows = 0;

  void reserve(int max_rows, int dim) {
    H = MatXd::Zero(max_rows, dim);
    r = VecXd::Zero(max_rows);
  }
  void append(const MatXd& Hi, const VecXd& ri) {
    H.middleRows(rows, Hi.rows()) = Hi;
    r.segment(rows, ri.size()) = ri;
    rows += static_cast<int>(Hi.rows());
  }
};

// null-space projection followed by the 95% chi-square gate
bool nullspace_and_gate(const EstimatorState& state, MatXd& H_x, MatXd& H_f, VecXd& r,
                        double sigma) {
  if (!nullspace_project(H_x, H_f, r)) return false;
  const int rows = static_cast<int>(r.size());
  MatXd S = H_x * state.cov * H_x.transpose() + sigma * sigma * MatXd::Identity(rows, rows);
  symmetrize(S);
  const double gamma = r.dot(S.ldlt().solve(r));
  return gamma < chi2_quantile_95(rows);
}

}  // namespace

bool nullspace_project(MatXd& H_x, MatXd& H_f, VecXd& r) {
  const int m = static_cast<int>(H_f.rows());
  const int k = static_cast<int>(H_f.cols());
  if (m <= k) return false;
  const Eigen::HouseholderQR<MatXd> qr(H_f);
  const MatXd Q = qr.householderQ();
  const MatXd Qn = Q.rightCols(m - k);
  H_x = (Qn.transpose() * H_x).eval();
  r = (Qn.transpose() * r).eval();
  H_f = (Qn.transpose() * H_f).eval();
  return true;
}

std::vector<TrackStatus> point_update(EstimatorState& state, const std::vector<PointTrack>& tracks,
                                      const PinholeCamerad& cam, const Pose3d& T_CI) {
  const int d = state.dim();
  std::vector<TrackStatus> status(tracks.size(), TrackStatus::TooFewObservations);

  int max_rows = 0;
  for (const auto& t : tracks) max_rows += 2 * static_cast<int>(t.obs.size());
  StackedUpdate stacked;
  stacked.reserve(max_rows, d);

  for (size_t ti = 0; ti < tracks.size(); ++ti) {
    const PointTrack& track = tracks[ti];
    if (track.obs.size() < 3) continue;

    std::vector<PointObservation> pobs;
    pobs.reserve(track.obs.size());
    for (const auto& [ci, uv] : track.obs) {
      pobs.emplace_back(camera_pose_from_clone(state.window.clones.at(ci), T_CI), uv);
    }
    Vec3d p_G;
    try {
      p_G = triangulate_point(pobs, cam);
    } catch (const Error&) {
      status[ti] = TrackStatus::TriangulationFailed;
      continue;
    }

    const int m = 2 * static_cast<int>(track.obs.size());
    MatXd H_x = MatXd::Zero(m, d);
    MatXd H_f = MatXd::Zero(m, 3);
    VecXd res(m);
    bool ok = true;
    const Mat3d R_CI = T_CI.rotation.matrix();
    for (size_t k = 0; k < track.obs.size(); ++k) {
      const auto& [ci, uv] = track.obs[k];
      const Clone& c = state.window.clones.at(ci);
      const Vec3d q = c.R_IG * (p_G - c.p);
      const Vec3d pc = T_CI.rotation * q + T_CI.translation;
      if (pc.z() <= 1e-6) {
        ok = false;
        break;
      }
      Eigen::Matrix<double, 2, 3> dpi;
      dpi << cam.fx / pc.z(), 0, -cam.fx * pc.x() / (pc.z() * pc.z()),
             0, cam.fy / pc.z(), -cam.fy * pc.y() / (pc.z() * pc.z());
      res.segment<2>(2 * k) =
          uv - Vec2d(cam.fx * pc.x() / pc.z() + cam.cx, cam.fy * pc.y() / pc.z() + cam.cy);
      H_f.block<2, 3>(2 * k, 0) = dpi * R_CI * c.R_IG.matrix();
      H_x.block<2, 3>(2 * k, 15 + 6 * ci) = -dpi * R_CI * skew(q);
      H_x.block<2, 3>(2 * k, 18 + 6 * ci) = -dpi * R_CI * c.R_IG.matrix();
    }
    if (!ok) {
      status[ti] = TrackStatus::TriangulationFailed;
      continue;
    }

    if (!nullspace_and_gate(state, H_x, H_f, res, state.noise.sigma_px)) {
      status[ti] = TrackStatus::RejectedChi2;
      continue;
    }
    stacked.append(H_x, res);
    status[ti] = TrackStatus::Accepted;
  }

  if (stacked.rows > 0) {
    const MatXd H = stacked.H.topRows(stacked.rows);
    const VecXd r = stacked.r.head(stacked.rows);
    const MatXd R = state.noise.sigma_px * state.noise.sigma_px *
                    MatXd::Identity(stacked.rows, stacked.rows);
    ekf_update(state, H, r, R);
  }
  return status;
}

LineCloneJacobian line_clone_jacobian(const PinholeCamerad& cam, const Pose3d& T_CI,
                                      const Clone& clone, const Segment2Dd& seg,
                                      const OrthonormalLined& lo) {
  LineCloneJacobian out;
  const PluckerLined L = plucker_from_orthonormal(lo);
  const Pose3d T_CG = camera_pose_from_clone(clone, T_CI);
  const PluckerLined Lc = plucker_transform(T_CG, L);
  const ImageLineResidual ir = image_line_residual(cam, seg, Lc.n);
  if (!ir.valid) return out;

  const PluckerTangent tan = plucker_tangent(lo);
  const Mat3d R_CG = T_CG.rotation.matrix();
  const Vec3d t_CG = T_CG.translation;
  const Eigen::Matrix<double, 3, 4> dnc_dline = R_CG * tan.dn + skew(t_CG) * R_CG * tan.dv;

  const Mat3d R_CI = T_CI.rotation.matrix();
  const Mat3d R_hat = clone.R_IG.matrix();
  const Vec3d B = R_CG * L.v;  // direction in camera frame
  Eigen::Matrix<double, 3, 6> dnc_dclone;
  dnc_dclone.leftCols<3>() = -R_CI * skew(R_hat * L.n) -
                             skew(B) * R_CI * skew(R_hat * clone.p) +
                             skew(t_CG) * (-R_CI * skew(R_hat * L.v));
  dnc_dclone.rightCols<3>() = skew(B) * R_CI * R_hat;

  out.r = ir.r;
  out.H_line = ir.dr_dnc * dnc_dline;
  out.H_clone = ir.dr_dnc * dnc_dclone;
  out.valid = true;
  return out;
}

std::vector<TrackStatus> line_update(EstimatorState& state,
                                     const std::vector<LineUpdateCandidate>& lines,
                                     const PinholeCamerad& cam, const Pose3d& T_CI) {
  const int d = state.dim();
  std::vector<TrackStatus> status(lines.size(), TrackStatus::TooFewObservations);

  int max_rows = 0;
  for (const auto& l : lines) max_rows += 2 * static_cast<int>(l.obs.size());
  StackedUpdate stacked;
  stacked.reserve(max_rows, d);

  for (size_t li = 0; li < lines.size(); ++li) {
    const LineUpdateCandidate& cand = lines[li];
    if (cand.obs.size() < 3) continue;  // need 2m > 4 rows after projection

    OrthonormalLined lo;
    try {
      lo = orthonormal_from_plucker(cand.line);
    } catch (const Error&) {
      status[li] = TrackStatus::TriangulationFailed;
      continue;
    }

    const int m = 2 * static_cast<int>(cand.obs.size());
    MatXd H_x = MatXd::Zero(m, d);
    MatXd H_f = MatXd::Zero(m, 4);
    VecXd res(m);
    bool ok = true;
    for (size_t k = 0; k < cand.obs.size(); ++k) {
      const auto& [ci, seg] = cand.obs[k];
      const LineCloneJacobian j =
          line_clone_jacobian(cam, T_CI, state.window.clones.at(ci), seg, lo);
      if (!j.valid) {
        ok = false;
        break;
      }
      res.segment<2>(2 * k) = -j.r;  // residual is (0 - predicted distance)
      H_f.block<2, 4>(2 * k, 0) = j.H_line;
      H_x.block<2, 6>(2 * k, 15 + 6 * ci) = j.H_clone;
    }
    if (!ok) {
      status[li] = TrackStatus::TriangulationFailed;
      continue;
    }

    if (!nullspace_and_gate(state, H_x, H_f, res, state.noise.sigma_l)) {
      status[li] = TrackStatus::RejectedChi2;
      continue;
    }
    stacked.append(H_x, res);
    status[li] = TrackStatus::Accepted;
  }

  if (stacked.rows > 0) {
    const MatXd H = stacked.H.topRows(stacked.rows);
    const VecXd r = stacked.r.head(stacked.rows);
    const MatXd R =
        state.noise.sigma_l * state.noise.sigma_l * MatXd::Identity(stacked.rows, stacked.rows);
    ekf_update(state, H, r, R);
  }
  return status;
}

}  // namespace plviwo
