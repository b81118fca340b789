#pragma once

#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "plviwo/types.hpp"

namespace plviwo {

template <typename Derived>
Mat3<typename Derived::Scalar> skew(const Eigen::MatrixBase<Derived>& v) {
  using S = typename Derived::Scalar;
  Mat3<S> m;
  m << S(0), -v.z(), v.y(), v.z(), S(0), -v.x(), -v.y(), v.x(), S(0);
  return m;
}

// Rodrigues formula with a Taylor branch below 1e-8 rad.
template <typename Derived>
Mat3<typename Derived::Scalar> so3_exp(const Eigen::MatrixBase<Derived>& w) {
  using S = typename Derived::Scalar;
  const S theta2 = w.squaredNorm();
  const Mat3<S> W = skew(w);
  if (theta2 < S(1e-16)) {
    return Mat3<S>::Identity() + W + S(0.5) * W * W;
  }
  const S theta = std::sqrt(theta2);
  return Mat3<S>::Identity() + (std::sin(theta) / theta) * W +
         ((S(1) - std::cos(theta)) / theta2) * W * W;
}

template <typename Derived>
Vec3<typename Derived::Scalar> so3_log(const Eigen::MatrixBase<Derived>& R) {
  using S = typename Derived::Scalar;
  Eigen::AngleAxis<S> aa(R.derived().eval());
  return aa.angle() * aa.axis();
}

// Left Jacobian of SO(3) and its inverse.
template <typename Derived>
Mat3<typename Derived::Scalar> so3_left_jacobian(const Eigen::MatrixBase<Derived>& w) {
  using S = typename Derived::Scalar;
  const S theta2 = w.squaredNorm();
  const Mat3<S> W = skew(w);
  if (theta2 < S(1e-16)) {
    return Mat3<S>::Identity() + S(0.5) * W + W * W / S(6);
  }
  const S theta = std::sqrt(theta2);
  return Mat3<S>::Identity() + ((S(1) - std::cos(theta)) / theta2) * W +
         ((theta - std::sin(theta)) / (theta2 * theta)) * W * W;
}

template <typename Derived>
Mat3<typename Derived::Scalar> so3_left_jacobian_inverse(const Eigen::MatrixBase<Derived>& w) {
  using S = typename Derived::Scalar;
  const S theta2 = w.squaredNorm();
  const Mat3<S> W = skew(w);
  if (theta2 < S(1e-16)) {
    return Mat3<S>::Identity() - S(0.5) * W + W * W / S(12);
  }
  const S theta = std::sqrt(theta2);
  const S c = S(1) / theta2 - (S(1) + std::cos(theta)) / (S(2) * theta * std::sin(theta));
  return Mat3<S>::Identity() - S(0.5) * W + c * W * W;
}

template <typename Derived>
Mat3<typename Derived::Scalar> so3_right_jacobian(const Eigen::MatrixBase<Derived>& w) {
  return so3_left_jacobian((-w).eval());
}

template <typename Derived>
Mat3<typename Derived::Scalar> so3_right_jacobian_inverse(const Eigen::MatrixBase<Derived>& w) {
  return so3_left_jacobian_inverse((-w).eval());
}

// Unit-quaternion backed rotation. Maps coordinates from a source frame to a
// target frame; which frames those are is up to the variable name.
template <typename S>
class Rotation3 {
 public:
  Rotation3() : q_(Eigen::Quaternion<S>::Identity()) {}
  explicit Rotation3(const Eigen::Quaternion<S>& q) : q_(q.normalized()) {}
  template <typename Derived>
  explicit Rotation3(const Eigen::MatrixBase<Derived>& R)
      : q_(Eigen::Quaternion<S>(R.derived().eval()).normalized()) {}

  static Rotation3 identity() { return Rotation3(); }

  template <typename Derived>
  static Rotation3 exp(const Eigen::MatrixBase<Derived>& w_expr) {
    const Vec3<S> w = w_expr;
    const S theta = w.norm();
    if (theta < S(1e-8)) {
      // sin(t/2)/t ~ 1/2 - t^2/48
      const S k = S(0.5) - theta * theta / S(48);
      return Rotation3(Eigen::Quaternion<S>(S(1), k * w.x(), k * w.y(), k * w.z()));
    }
    const S half = S(0.5) * theta;
    const S k = std::sin(half) / theta;
    return Rotation3(Eigen::Quaternion<S>(std::cos(half), k * w.x(), k * w.y(), k * w.z()));
  }

  Vec3<S> log() const {
    Eigen::AngleAxis<S> aa(q_);
    return aa.angle() * aa.axis();
  }

  Mat3<S> matrix() const { return q_.toRotationMatrix(); }
  const Eigen::Quaternion<S>& quaternion() const { return q_; }

  Rotation3 inverse() const { return Rotation3(q_.conjugate()); }

  Rotation3 operator*(const Rotation3& rhs) const { return Rotation3(q_ * rhs.q_); }

  template <typename Derived>
  Vec3<S> operator*(const Eigen::MatrixBase<Derived>& v) const {
    return q_ * Vec3<S>(v);
  }

 private:
  Eigen::Quaternion<S> q_;
};

using Rotation3d = Rotation3<double>;

}  // namespace plviwo
