#pragma once

#include <cmath>

#include "plviwo/line.hpp"
#include "plviwo/pose.hpp"
#include "plviwo/types.hpp"

namespace plviwo {

template <typename S>
struct PinholeCamera {
  S fx = S(1), fy = S(1), cx = S(0), cy = S(0);

  PinholeCamera() = default;
  PinholeCamera(S fx_, S fy_, S cx_, S cy_) : fx(fx_), fy(fy_), cx(cx_), cy(cy_) {
    if (fx <= S(0) || fy <= S(0)) {
      throw_error(ErrorCode::InvalidConfig, "focal lengths must be positive");
    }
  }

  Mat3<S> K() const {
    Mat3<S> k = Mat3<S>::Zero();
    k(0, 0) = fx;
    k(1, 1) = fy;
    k(0, 2) = cx;
    k(1, 2) = cy;
    k(2, 2) = S(1);
    return k;
  }

  // Line-projection intrinsic: maps the camera-frame moment vector to pixel
  // line coefficients so that l^T [u v 1]^T = 0 for pixels of points on the
  // line.
  Mat3<S> K_L() const {
    Mat3<S> k = Mat3<S>::Zero();
    k(0, 0) = fy;
    k(1, 1) = fx;
    k(2, 0) = -fy * cx;
    k(2, 1) = -fx * cy;
    k(2, 2) = fx * fy;
    return k;
  }

  Vec2<S> normalized_from_pixel(const Vec2<S>& uv) const {
    return Vec2<S>((uv.x() - cx) / fx, (uv.y() - cy) / fy);
  }

  Vec2<S> pixel_from_normalized(const Vec2<S>& xn) const {
    return Vec2<S>(fx * xn.x() + cx, fy * xn.y() + cy);
  }
};

using PinholeCamerad = PinholeCamera<double>;

template <typename S>
struct Segment2D {
  Vec2<S> ps = Vec2<S>::Zero();
  Vec2<S> pe = Vec2<S>::Zero();

  Segment2D() = default;
  Segment2D(const Vec2<S>& ps_, const Vec2<S>& pe_) : ps(ps_), pe(pe_) {}

  S length() const { return (pe - ps).norm(); }
  Vec2<S> midpoint() const { return S(0.5) * (ps + pe); }
  Vec2<S> direction() const { return (pe - ps).normalized(); }
};

using Segment2Dd = Segment2D<double>;

template <typename S, typename D>
Vec2<S> project_point(const PinholeCamera<S>& cam, const Pose3<S>& pose_cam_from_world,
                      const Eigen::MatrixBase<D>& p_world) {
  const Vec3<S> pc = pose_cam_from_world * p_world;
  if (pc.z() <= S(1e-6)) {
    throw_error(ErrorCode::NonPositiveDepth, "point behind or on the camera plane");
  }
  return Vec2<S>(cam.fx * pc.x() / pc.z() + cam.cx, cam.fy * pc.y() / pc.z() + cam.cy);
}

// Pixel-line coefficients of a camera-frame line: l = K_L * n.
template <typename S>
Vec3<S> project_line(const PinholeCamera<S>& cam, const PluckerLine<S>& line_cam) {
  if (line_cam.n.norm() <= S(1e-9)) {
    throw_error(ErrorCode::DegenerateProjection, "line passes through the camera center");
  }
  return cam.K_L() * line_cam.n;
}

// Signed point-to-line distances of the segment endpoints against pixel line
// coefficients l, each normalized by sqrt(l1^2 + l2^2).
template <typename D, typename S = typename D::Scalar>
Vec2<S> line_endpoint_residual(const Eigen::MatrixBase<D>& l, const Segment2D<S>& seg) {
  const S s2 = l.x() * l.x() + l.y() * l.y();
  if (s2 <= S(1e-12)) {
    throw_error(ErrorCode::DegenerateLine, "image line has no finite direction");
  }
  const S s = std::sqrt(s2);
  const S ds = (l.x() * seg.ps.x() + l.y() * seg.ps.y() + l.z()) / s;
  const S de = (l.x() * seg.pe.x() + l.y() * seg.pe.y() + l.z()) / s;
  return Vec2<S>(ds, de);
}

}  // namespace plviwo
