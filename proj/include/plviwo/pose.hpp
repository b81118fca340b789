#pragma once

#include "plviwo/so3.hpp"
#include "plviwo/types.hpp"

namespace plviwo {

// Rigid transform taking source-frame coordinates to target-frame
// coordinates: x_target = R * x_source + t.
template <typename S>
struct Pose3 {
  Rotation3<S> rotation;
  Vec3<S> translation = Vec3<S>::Zero();

  Pose3() = default;
  template <typename Derived>
  Pose3(const Rotation3<S>& R, const Eigen::MatrixBase<Derived>& t)
      : rotation(R), translation(t) {}

  static Pose3 identity() { return Pose3(); }

  template <typename Derived>
  Vec3<S> operator*(const Eigen::MatrixBase<Derived>& p) const {
    return rotation * p + translation;
  }

  Pose3 operator*(const Pose3& rhs) const {
    return Pose3(rotation * rhs.rotation, rotation * rhs.translation + translation);
  }

  Pose3 inverse() const {
    Rotation3<S> Rinv = rotation.inverse();
    return Pose3(Rinv, -(Rinv * translation));
  }

  // Origin of the target frame expressed in the source frame.
  Vec3<S> center() const { return -(rotation.inverse() * translation); }
};

using Pose3d = Pose3<double>;

}  // namespace plviwo
