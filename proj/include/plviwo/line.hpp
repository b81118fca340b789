#pragma once

#include <cmath>
#include <type_traits>

#include "plviwo/pose.hpp"
#include "plviwo/so3.hpp"
#include "plviwo/types.hpp"

namespace plviwo {

// Plucker coordinates (n, v): v spans the line direction and n = p x v for
// any point p on the line. The pair is homogeneous: (n, v) and s*(n, v)
// describe the same line for any s != 0.
template <typename S>
struct PluckerLine {
  Vec3<S> n = Vec3<S>::Zero();
  Vec3<S> v = Vec3<S>::Zero();

  PluckerLine() = default;
  PluckerLine(const Vec3<S>& n_, const Vec3<S>& v_) : n(n_), v(v_) {}
  template <typename D1, typename D2,
            typename = std::enable_if_t<!(std::is_same_v<D1, Vec3<S>> && std::is_same_v<D2, Vec3<S>>)>>
  PluckerLine(const Eigen::MatrixBase<D1>& n_, const Eigen::MatrixBase<D2>& v_) : n(n_), v(v_) {}
};

using PluckerLined = PluckerLine<double>;

// Line through two points, n = p1 x p2. Direction is oriented p1 -> p2 so
// that the moment convention n = p x v holds.
template <typename D1, typename D2>
PluckerLine<typename D1::Scalar> plucker_from_two_points(const Eigen::MatrixBase<D1>& p1_,
                                                         const Eigen::MatrixBase<D2>& p2_) {
  using S = typename D1::Scalar;
  const Vec3<S> p1 = p1_, p2 = p2_;
  const Vec3<S> d = p2 - p1;
  const S len = d.norm();
  if (len <= S(1e-6)) {
    throw_error(ErrorCode::CoincidentPoints, "two-point line needs distinct points");
  }
  // divide the moment by the same length that normalizes the direction, so
  // (n, v) stays one homogeneous pair
  return PluckerLine<S>(p1.cross(p2) / len, d / len);
}

template <typename D1, typename D2>
PluckerLine<typename D1::Scalar> plucker_through_point(const Eigen::MatrixBase<D1>& p,
                                                       const Eigen::MatrixBase<D2>& v) {
  using S = typename D1::Scalar;
  return PluckerLine<S>(Vec3<S>(p).cross(Vec3<S>(v)), v);
}

// Frame change of a line, same source->target semantics as Pose3:
// n' = R n + [t]x R v, v' = R v.
template <typename S>
PluckerLine<S> plucker_transform(const Pose3<S>& pose, const PluckerLine<S>& line) {
  const Vec3<S> Rv = pose.rotation * line.v;
  return PluckerLine<S>(pose.rotation * line.n + pose.translation.cross(Rv), Rv);
}

// Perpendicular distance of a point to the line, ||v x p + n|| / ||v||.
template <typename D, typename S>
S point_line_distance_3d(const Eigen::MatrixBase<D>& p, const PluckerLine<S>& line) {
  return (line.v.cross(Vec3<S>(p)) + line.n).norm() / line.v.norm();
}

// Vector form of the same distance (its norm equals the distance); smooth at
// zero, which the refinement Jacobians need.
template <typename D, typename S>
Vec3<S> point_line_residual_3d(const Eigen::MatrixBase<D>& p, const PluckerLine<S>& line) {
  return (line.v.cross(Vec3<S>(p)) + line.n) / line.v.norm();
}

// Minimal 4-DoF line parameterization: U in SO(3), phi encoding the 2x2
// rotation with cos(phi) ~ ||n|| and sin(phi) ~ ||v||.
template <typename S>
struct OrthonormalLine {
  Rotation3<S> U;
  S phi = S(0);

  OrthonormalLine() = default;
  OrthonormalLine(const Rotation3<S>& U_, S phi_) : U(U_), phi(phi_) {}
};

using OrthonormalLined = OrthonormalLine<double>;

template <typename S>
OrthonormalLine<S> orthonormal_from_plucker(const PluckerLine<S>& line) {
  const S nn = line.n.norm();
  const S nv = line.v.norm();
  if (nn <= S(1e-12)) {
    throw_error(ErrorCode::DegenerateLine, "line through the origin has no orthonormal form");
  }
  if (nv <= S(1e-12)) {
    throw_error(ErrorCode::DegenerateLine, "zero direction vector");
  }
  Mat3<S> U;
  U.col(0) = line.n / nn;
  U.col(1) = line.v / nv;
  U.col(2) = line.n.cross(line.v).normalized();
  return OrthonormalLine<S>(Rotation3<S>(U), std::atan2(nv, nn));
}

// Unit-scale representative: |(n, v)| = 1.
template <typename S>
PluckerLine<S> plucker_from_orthonormal(const OrthonormalLine<S>& lo) {
  const Mat3<S> U = lo.U.matrix();
  return PluckerLine<S>((std::cos(lo.phi) * U.col(0)).eval(),
                        (std::sin(lo.phi) * U.col(1)).eval());
}

template <typename S, typename D>
OrthonormalLine<S> orthonormal_retract(const OrthonormalLine<S>& lo,
                                       const Eigen::MatrixBase<D>& delta) {
  const Vec4<S> d = delta;
  return OrthonormalLine<S>(lo.U * Rotation3<S>::exp(d.template head<3>()), lo.phi + d(3));
}

}  // namespace plviwo
