#include "plviwo/triangulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace plviwo {

Vec3d triangulate_point(const std::vector<PointObservation>& obs, const PinholeCamerad& cam) {
  if (obs.size() < 2) {
    throw_error(ErrorCode::IllConditioned, "point triangulation needs at least two views");
  }
  const size_t n = obs.size();
  MatXd A(2 * n, 3);
  VecXd b(2 * n);
  for (size_t i = 0; i < n; ++i) {
    const Mat3d R = obs[i].first.rotation.matrix();
    const Vec3d t = obs[i].first.translation;
    const Vec2d xn = cam.normalized_from_pixel(obs[i].second);
    A.row(2 * i) = xn.x() * R.row(2) - R.row(0);
    A.row(2 * i + 1) = xn.y() * R.row(2) - R.row(1);
    b(2 * i) = t.x() - xn.x() * t.z();
    b(2 * i + 1) = t.y() - xn.y() * t.z();
  }
  Eigen::JacobiSVD<MatXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VecXd sv = svd.singularValues();
  if (sv(0) <= 0.0 || sv(0) / sv(2) > 1e8) {
    throw_error(ErrorCode::IllConditioned, "degenerate baseline for point triangulation");
  }
  Vec3d p = svd.solve(b);

  // short Gauss-Newton polish on pixel reprojection
  for (int iter = 0; iter < 3; ++iter) {
    Mat3d H = Mat3d::Zero();
    Vec3d g = Vec3d::Zero();
    bool ok = true;
    for (const auto& [pose, uv] : obs) {
      const Vec3d pc = pose * p;
      if (pc.z() <= 1e-6) {
        ok = false;
        break;
      }
      Eigen::Matrix<double, 2, 3> dpi;
      dpi << cam.fx / pc.z(), 0, -cam.fx * pc.x() / (pc.z() * pc.z()),
             0, cam.fy / pc.z(), -cam.fy * pc.y() / (pc.z() * pc.z());
      const Eigen::Matrix<double, 2, 3> J = dpi * pose.rotation.matrix();
      const Vec2d r = uv - Vec2d(cam.fx * pc.x() / pc.z() + cam.cx,
                                 cam.fy * pc.y() / pc.z() + cam.cy);
      H += J.transpose() * J;
      g += J.transpose() * r;
    }
    if (!ok) break;
    const Vec3d dp = H.ldlt().solve(g);
    if (!dp.allFinite()) break;
    p += dp;
  }

  if ((obs.front().first * p).z() <= 1e-6) {
    throw_error(ErrorCode::NegativeDepth, "triangulated point behind the anchor camera");
  }
  return p;
}

PluckerLined init_line_point_direction(const Vec3d& p, DirectionClass dir_class,
                                       const Rotation3d& R_IG) {
  Vec3d axis;
  switch (dir_class) {
    case DirectionClass::X: axis = Vec3d::UnitX(); break;
    case DirectionClass::Y: axis = Vec3d::UnitY(); break;
    case DirectionClass::Z: axis = Vec3d::UnitZ(); break;
    case DirectionClass::None:
      throw_error(ErrorCode::NoStrategy, "point+direction needs a classified direction");
  }
  const Vec3d v = R_IG.inverse() * axis;  // IMU axis expressed in the world frame
  return plucker_through_point(p, v);
}

PluckerLined init_line_two_points(const Vec3d& p1, const Vec3d& p2) {
  return plucker_from_two_points(p1, p2);
}

namespace {

struct Plane {
  Vec3d n;   // unit normal, world frame
  double d;  // plane is n . x + d = 0
};

Plane backproject_plane(const LineObservationEntry& e, const PinholeCamerad& cam) {
  const Vec3d rs((e.seg.ps.x() - cam.cx) / cam.fx, (e.seg.ps.y() - cam.cy) / cam.fy, 1.0);
  const Vec3d re((e.seg.pe.x() - cam.cx) / cam.fx, (e.seg.pe.y() - cam.cy) / cam.fy, 1.0);
  const Vec3d m = rs.cross(re).normalized();  // camera-frame normal
  Plane pl;
  pl.n = e.pose_CG.rotation.inverse() * m;
  pl.d = m.dot(e.pose_CG.translation);
  return pl;
}

std::optional<PluckerLined> intersect_planes(const Plane& a, const Plane& b) {
  const Vec3d v = a.n.cross(b.n);
  if (v.norm() < 1e-6) return std::nullopt;
  // moment n = p x v for a point p on both planes
  const Vec3d n = a.d * b.n - b.d * a.n;
  return PluckerLined(n, v);
}

}  // namespace

PluckerLined init_line_planes(const LineObservationSet& obs, const PinholeCamerad& cam) {
  if (obs.entries.size() < 2) {
    throw_error(ErrorCode::ParallelPlanes, "plane intersection needs at least two views");
  }

  std::vector<PluckerLined> candidates;
  if (obs.has_stereo()) {
    // same-timestep left/right pairs first
    std::vector<const LineObservationEntry*> lefts;
    int planes_used = 0;
    for (const auto& e : obs.entries) {
      if (!e.right_cam) lefts.push_back(&e);
    }
    for (const auto& l : lefts) {
      for (const auto& e : obs.entries) {
        if (e.right_cam && e.frame == l->frame) {
          if (auto c = intersect_planes(backproject_plane(*l, cam), backproject_plane(e, cam))) {
            candidates.push_back(*c);
          }
          planes_used += 2;
        }
      }
    }
    if (planes_used < 5) {
      // supplement with consecutive left-camera planes
      for (size_t i = 0; i + 1 < lefts.size(); ++i) {
        if (auto c = intersect_planes(backproject_plane(*lefts[i], cam),
                                      backproject_plane(*lefts[i + 1], cam))) {
          candidates.push_back(*c);
        }
      }
    }
  } else {
    const Plane ref = backproject_plane(obs.entries.front(), cam);
    for (size_t i = 1; i < obs.entries.size(); ++i) {
      if (auto c = intersect_planes(ref, backproject_plane(obs.entries[i], cam))) {
        candidates.push_back(*c);
      }
    }
  }

  if (candidates.empty()) {
    throw_error(ErrorCode::ParallelPlanes, "all back-projected planes are (near) parallel");
  }

  // unit-normalize, sign-align to the first candidate, then average
  Vec3d n_sum = Vec3d::Zero();
  Vec3d v_sum = Vec3d::Zero();
  const Vec3d v_ref = candidates.front().v.normalized();
  for (auto c : candidates) {
    const double s = c.v.norm();
    c.n /= s;
    c.v /= s;
    if (c.v.dot(v_ref) < 0) {
      c.n = -c.n;
      c.v = -c.v;
    }
    n_sum += c.n;
    v_sum += c.v;
  }
  Vec3d n_avg = n_sum / static_cast<double>(candidates.size());
  Vec3d v_avg = v_sum / static_cast<double>(candidates.size());
  const Vec3d v_hat = v_avg.normalized();
  n_avg -= n_avg.dot(v_hat) * v_hat;  // restore n . v = 0
  return PluckerLined(n_avg, v_avg);
}

LineInit select_and_init(const LineTriangulationAux& aux, const LineObservationSet& obs,
                         const PinholeCamerad& cam) {
  if (aux.known_direction && !aux.points_on_line.empty()) {
    return {plucker_through_point(aux.points_on_line.front(), *aux.known_direction),
            InitStrategy::PointDirection};
  }
  if (aux.points_on_line.size() >= 2) {
    return {init_line_two_points(aux.points_on_line[0], aux.points_on_line[1]),
            InitStrategy::TwoPoints};
  }
  if (obs.entries.size() >= 2) {
    return {init_line_planes(obs, cam), InitStrategy::Planes};
  }
  throw_error(ErrorCode::NoStrategy, "no direction, fewer than two points, no usable planes");
}

// --- Jacobian blocks ----------------------------------------------------------

PluckerTangent plucker_tangent(const OrthonormalLined& lo) {
  const Mat3d U = lo.U.matrix();
  const double c = std::cos(lo.phi), s = std::sin(lo.phi);
  PluckerTangent t;
  t.dn.leftCols<3>() = -c * U * skew(Vec3d::UnitX());
  t.dn.col(3) = -s * U.col(0);
  t.dv.leftCols<3>() = -s * U * skew(Vec3d::UnitY());
  t.dv.col(3) = c * U.col(1);
  return t;
}

ImageLineResidual image_line_residual(const PinholeCamerad& cam, const Segment2Dd& seg,
                                      const Vec3d& n_cam) {
  ImageLineResidual out;
  const Vec3d l = cam.K_L() * n_cam;
  const double s2 = l.x() * l.x() + l.y() * l.y();
  if (s2 <= 1e-12) return out;
  const double s = std::sqrt(s2);
  const Vec3d ps(seg.ps.x(), seg.ps.y(), 1.0);
  const Vec3d pe(seg.pe.x(), seg.pe.y(), 1.0);
  out.r = Vec2d(ps.dot(l) / s, pe.dot(l) / s);
  Eigen::Matrix<double, 2, 3> dr_dl;
  const Vec3d dl_ds(l.x(), l.y(), 0.0);
  dr_dl.row(0) = ps.transpose() / s - (ps.dot(l) / (s2 * s)) * dl_ds.transpose();
  dr_dl.row(1) = pe.transpose() / s - (pe.dot(l) / (s2 * s)) * dl_ds.transpose();
  out.dr_dnc = dr_dl * cam.K_L();
  out.valid = true;
  return out;
}

LineResidualJacobian line_residual_jacobian(const PinholeCamerad& cam, const Pose3d& pose_CG,
                                            const Segment2Dd& seg, const OrthonormalLined& lo) {
  LineResidualJacobian out;
  const PluckerLined L = plucker_from_orthonormal(lo);
  const PluckerLined Lc = plucker_transform(pose_CG, L);
  const ImageLineResidual ir = image_line_residual(cam, seg, Lc.n);
  if (!ir.valid) return out;
  const PluckerTangent t = plucker_tangent(lo);
  const Mat3d R = pose_CG.rotation.matrix();
  const Eigen::Matrix<double, 3, 4> dnc = R * t.dn + skew(pose_CG.translation) * R * t.dv;
  out.r = ir.r;
  out.J = ir.dr_dnc * dnc;
  out.valid = true;
  return out;
}

PointResidualJacobian point_residual_jacobian(const Vec3d& p, const OrthonormalLined& lo) {
  const PluckerLined L = plucker_from_orthonormal(lo);
  const PluckerTangent t = plucker_tangent(lo);
  const double vn = L.v.norm();
  const Vec3d e = L.v.cross(p) + L.n;
  PointResidualJacobian out;
  out.r = e / vn;
  const Mat3d dr_dn = Mat3d::Identity() / vn;
  const Mat3d dr_dv = -skew(p) / vn - e * (L.v.transpose() / (vn * vn * vn));
  out.J = dr_dn * t.dn + dr_dv * t.dv;
  return out;
}

DirectionResidualJacobian direction_residual_jacobian(const Vec3d& d_ref,
                                                      const OrthonormalLined& lo) {
  const PluckerLined L = plucker_from_orthonormal(lo);
  const PluckerTangent t = plucker_tangent(lo);
  const double vn = L.v.norm();
  const Vec3d vhat = L.v / vn;
  DirectionResidualJacobian out;
  out.r = vhat - d_ref;
  out.J = ((Mat3d::Identity() - vhat * vhat.transpose()) / vn) * t.dv;
  return out;
}

// --- refinement ----------------------------------------------------------------

namespace {

struct Problem {
  const PinholeCamerad* cam = nullptr;
  const LineObservationSet* obs = nullptr;
  const LineTriangulationAux* aux = nullptr;
  Vec3d d_ref = Vec3d::Zero();
  bool use_direction = false;
  double w_l = 1, w_pl = 1, w_d = 1;

  // residual dimension
  int rows() const {
    return 2 * static_cast<int>(obs->entries.size()) +
           3 * static_cast<int>(aux->points_on_line.size()) + (use_direction ? 3 : 0);
  }

  // returns false if any residual is degenerate/non-finite at this estimate
  bool evaluate(const OrthonormalLined& lo, VecXd* r, MatXd* J, RefineReport* breakdown) const {
    const int m = rows();
    if (r) r->setZero(m);
    if (J) J->setZero(m, 4);
    double cl = 0, cp = 0, cd = 0;
    int row = 0;
    const double sl = std::sqrt(w_l), sp = std::sqrt(w_pl), sd = std::sqrt(w_d);
    for (const auto& e : obs->entries) {
      const LineResidualJacobian lr = line_residual_jacobian(*cam, e.pose_CG, e.seg, lo);
      if (!lr.valid || !lr.r.allFinite()) return false;
      if (r) r->segment<2>(row) = sl * lr.r;
      if (J) J->block<2, 4>(row, 0) = sl * lr.J;
      cl += w_l * lr.r.squaredNorm();
      row += 2;
    }
    for (const auto& p : aux->points_on_line) {
      const PointResidualJacobian pr = point_residual_jacobian(p, lo);
      if (!pr.r.allFinite()) return false;
      if (r) r->segment<3>(row) = sp * pr.r;
      if (J) J->block<3, 4>(row, 0) = sp * pr.J;
      cp += w_pl * pr.r.squaredNorm();
      row += 3;
    }
    if (use_direction) {
      const DirectionResidualJacobian dr = direction_residual_jacobian(d_ref, lo);
      if (!dr.r.allFinite()) return false;
      if (r) r->segment<3>(row) = sd * dr.r;
      if (J) J->block<3, 4>(row, 0) = sd * dr.J;
      cd += w_d * dr.r.squaredNorm();
      row += 3;
    }
    if (breakdown) {
      breakdown->cost_endpoints = cl;
      breakdown->cost_points = cp;
      breakdown->cost_direction = cd;
    }
    return true;
  }
};

Vec4d clamp_step(Vec4d delta, double max_step) {
  const double n = delta.norm();
  if (n > max_step) delta *= max_step / n;
  return delta;
}

}  // namespace

RefineResult refine_line(const PluckerLined& init, const LineObservationSet& obs,
                         const LineTriangulationAux& aux, const PinholeCamerad& cam,
                         const RefinementConfig& cfg) {
  OrthonormalLined lo = orthonormal_from_plucker(init);

  Problem prob;
  prob.cam = &cam;
  prob.obs = &obs;
  prob.aux = &aux;
  prob.w_l = cfg.w_l;
  prob.w_pl = cfg.w_pl;
  prob.w_d = cfg.w_d;
  if (aux.known_direction) {
    prob.use_direction = true;
    // align the reference once so the residual is small near the init
    prob.d_ref = (init.v.dot(*aux.known_direction) < 0) ? -(*aux.known_direction)
                                                        : *aux.known_direction;
  }

  RefineResult out;
  out.line = init;

  VecXd r;
  MatXd J;
  RefineReport bd;
  if (!prob.evaluate(lo, &r, &J, &bd)) {
    throw_error(ErrorCode::SingularNormalEquations, "degenerate residuals at the initial line");
  }
  double cost = r.squaredNorm();
  out.report.initial_cost = cost;

  double lambda = cfg.lambda_init;
  int iters = 0;
  bool converged = false;
  for (int it = 0; it < cfg.max_iters && !converged; ++it) {
    const Mat4<double> A = (J.transpose() * J).eval();
    const Vec4d g = J.transpose() * r;

    if (cfg.method == RefineMethod::GaussNewton) {
      Vec4d delta = A.ldlt().solve(-g);
      if (!delta.allFinite()) {
        delta = (A + 1e-12 * Mat4<double>::Identity()).ldlt().solve(-g);
      }
      if (!delta.allFinite()) break;
      delta = clamp_step(delta, cfg.max_step);
      const OrthonormalLined cand = orthonormal_retract(lo, delta);
      VecXd rc;
      MatXd Jc;
      RefineReport bdc;
      if (!prob.evaluate(cand, &rc, &Jc, &bdc)) break;  // keep last valid estimate
      lo = cand;
      r.swap(rc);
      J.swap(Jc);
      bd = bdc;
      cost = r.squaredNorm();
      ++iters;
      continue;
    }

    // Levenberg-Marquardt
    bool stepped = false;
    while (lambda <= cfg.lambda_cap) {
      const Vec4d delta =
          clamp_step((A + lambda * Mat4<double>::Identity()).ldlt().solve(-g), cfg.max_step);
      if (delta.allFinite()) {
        const OrthonormalLined cand = orthonormal_retract(lo, delta);
        VecXd rc;
        MatXd Jc;
        RefineReport bdc;
        if (prob.evaluate(cand, &rc, &Jc, &bdc) && rc.squaredNorm() < cost) {
          const double drop = cost - rc.squaredNorm();
          lo = cand;
          r.swap(rc);
          J.swap(Jc);
          bd = bdc;
          cost = r.squaredNorm();
          lambda = std::max(lambda / cfg.lambda_scale, 1e-12);
          stepped = true;
          ++iters;
          if (drop < cfg.tol) converged = true;
          break;
        }
      }
      lambda *= cfg.lambda_scale;
    }
    if (!stepped) {
      if (lambda > cfg.lambda_cap && iters == 0 && cost > cfg.tol) {
        throw_error(ErrorCode::SingularNormalEquations,
                    "no damped step reduces the cost from the initial estimate");
      }
      break;
    }
  }

  out.line = plucker_from_orthonormal(lo);
  out.report.iterations = iters;
  out.report.final_cost = cost;
  out.report.cost_endpoints = bd.cost_endpoints;
  out.report.cost_points = bd.cost_points;
  out.report.cost_direction = bd.cost_direction;
  return out;
}

}  // namespace plviwo
