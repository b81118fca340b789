#include <random>

#include <gtest/gtest.h>

#include "plviwo/camera.hpp"
#include "plviwo/line.hpp"
#include "plviwo/pose.hpp"
#include "plviwo/so3.hpp"

using namespace plviwo;

namespace {

std::mt19937_64 rng(42);

Vec3d random_vec(double scale = 1.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  return Vec3d(d(rng), d(rng), d(rng));
}

Rotation3d random_rotation() {
  return Rotation3d::exp(random_vec(2.0));
}

Pose3d random_pose() {
  return Pose3d(random_rotation(), random_vec(3.0));
}

// Random line with |n| bounded away from zero (not through the origin).
PluckerLined random_line() {
  while (true) {
    const Vec3d p1 = random_vec(5.0);
    const Vec3d p2 = random_vec(5.0);
    if ((p2 - p1).norm() < 0.1) continue;
    PluckerLined l = plucker_from_two_points(p1, p2);
    if (l.n.norm() > 0.1) return l;
  }
}

}  // namespace

TEST(Rotation3, ExpLogRoundTrip) {
  for (int i = 0; i < 1000; ++i) {
    const Vec3d w = random_vec(3.0);
    const Rotation3d R = Rotation3d::exp(w);
    const Mat3d M = R.matrix();
    EXPECT_LT((M * M.transpose() - Mat3d::Identity()).norm(), 1e-9);
    EXPECT_NEAR(M.determinant(), 1.0, 1e-9);
    const Rotation3d R2 = Rotation3d::exp(R.log());
    EXPECT_LT((R2.matrix() - M).norm(), 1e-9);
  }
}

TEST(Rotation3, SmallAngleBranch) {
  const Vec3d w(1e-10, -2e-10, 5e-11);
  const Rotation3d R = Rotation3d::exp(w);
  EXPECT_LT((R.log() - w).norm(), 1e-18);
  EXPECT_LT((so3_exp(w) - R.matrix()).norm(), 1e-15);
}

TEST(Rotation3, MatrixExpAgreement) {
  for (int i = 0; i < 100; ++i) {
    const Vec3d w = random_vec(3.0);
    EXPECT_LT((so3_exp(w) - Rotation3d::exp(w).matrix()).norm(), 1e-12);
  }
}

TEST(So3Jacobians, LeftJacobianIdentity) {
  // Exp(w + Jl(w)^-1 * ... ) checks: Exp(w)Exp(Jr(w)*d) ~ Exp(w + d)
  for (int i = 0; i < 100; ++i) {
    const Vec3d w = random_vec(2.0);
    const Vec3d d = random_vec(1e-6);
    const Mat3d lhs = so3_exp(w + d);
    const Mat3d rhs = so3_exp(w) * so3_exp((so3_right_jacobian(w) * d).eval());
    EXPECT_LT((lhs - rhs).norm(), 1e-10);
    EXPECT_LT((so3_left_jacobian(w) * so3_left_jacobian_inverse(w) - Mat3d::Identity()).norm(),
              1e-9);
  }
}

TEST(Pose3, ComposeInverse) {
  for (int i = 0; i < 200; ++i) {
    const Pose3d a = random_pose();
    const Pose3d b = random_pose();
    const Pose3d c = random_pose();
    const Vec3d p = random_vec(4.0);
    // associativity
    EXPECT_LT((((a * b) * c) * p - (a * (b * c)) * p).norm(), 1e-9);
    // inverse
    EXPECT_LT(((a.inverse() * a) * p - p).norm(), 1e-9);
  }
}

TEST(ProjectPoint, OnOpticalAxis) {
  const PinholeCamerad cam(1, 1, 0, 0);
  const Vec2d uv = project_point(cam, Pose3d::identity(), Vec3d(0, 0, 5));
  EXPECT_NEAR(uv.x(), 0.0, 1e-12);
  EXPECT_NEAR(uv.y(), 0.0, 1e-12);
}

TEST(ProjectPoint, DirectDivision) {
  const PinholeCamerad cam(1, 1, 0, 0);
  const Vec2d uv = project_point(cam, Pose3d::identity(), Vec3d(1, 2, 2));
  EXPECT_NEAR(uv.x(), 0.5, 1e-12);
  EXPECT_NEAR(uv.y(), 1.0, 1e-12);
}

TEST(ProjectPoint, TranslatedCameraOracle) {
  // camera center at (0,0,-1): world -> camera pose carries t = +(0,0,1)
  const PinholeCamerad cam(400, 400, 320, 240);
  const Pose3d pose(Rotation3d::identity(), Vec3d(0, 0, 1));
  const Vec2d uv = project_point(cam, pose, Vec3d(0.1, 0, 1));
  // hand-composed pinhole: p_C = (0.1, 0, 2) -> (400*0.05+320, 240)
  EXPECT_NEAR(uv.x(), 340.0, 1e-9);
  EXPECT_NEAR(uv.y(), 240.0, 1e-9);
}

TEST(ProjectPoint, NonPositiveDepthThrows) {
  const PinholeCamerad cam(1, 1, 0, 0);
  try {
    project_point(cam, Pose3d::identity(), Vec3d(0, 0, -1));
    FAIL() << "expected NonPositiveDepth";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveDepth);
  }
}

TEST(PluckerTransform, Identity) {
  const PluckerLined l = random_line();
  const PluckerLined t = plucker_transform(Pose3d::identity(), l);
  EXPECT_LT((t.n - l.n).norm(), 1e-12);
  EXPECT_LT((t.v - l.v).norm(), 1e-12);
}

TEST(PluckerTransform, PureRotation) {
  const PluckerLined l = random_line();
  const Rotation3d R = random_rotation();
  const PluckerLined t = plucker_transform(Pose3d(R, Vec3d::Zero()), l);
  EXPECT_LT((t.n - R * l.n).norm(), 1e-12);
  EXPECT_LT((t.v - R * l.v).norm(), 1e-12);
}

TEST(PluckerTransform, TranslationCase) {
  // line through origin along x, pose translation (0,1,0)
  const PluckerLined l(Vec3d::Zero(), Vec3d::UnitX());
  const Pose3d pose(Rotation3d::identity(), Vec3d(0, 1, 0));
  const PluckerLined t = plucker_transform(pose, l);
  EXPECT_LT((t.n - Vec3d(0, 0, -1)).norm(), 1e-12);
  EXPECT_LT((t.v - Vec3d::UnitX()).norm(), 1e-12);

  // oracle: transform two points on the line and rebuild
  const Vec3d q1 = pose * Vec3d(0, 0, 0);
  const Vec3d q2 = pose * Vec3d(1, 0, 0);
  const PluckerLined rebuilt = plucker_from_two_points(q1, q2);
  EXPECT_NEAR(point_line_distance_3d(q1, t), 0.0, 1e-12);
  EXPECT_NEAR(point_line_distance_3d(q2, t), 0.0, 1e-12);
  // same line as a set: sampled rebuilt points lie on t
  EXPECT_NEAR(point_line_distance_3d(q1 + 3.0 * rebuilt.v, t), 0.0, 1e-12);
}

TEST(PluckerTransform, OrthogonalityInvariant) {
  for (int i = 0; i < 1000; ++i) {
    const PluckerLined l = random_line();
    const PluckerLined t = plucker_transform(random_pose(), l);
    EXPECT_LE(std::abs(t.n.dot(t.v)), 1e-9 * (t.n.norm() * t.v.norm() + 1.0));
  }
}

TEST(PluckerTransform, Composition) {
  for (int i = 0; i < 200; ++i) {
    const PluckerLined l = random_line();
    const Pose3d t1 = random_pose();
    const Pose3d t2 = random_pose();
    const PluckerLined a = plucker_transform(t2, plucker_transform(t1, l));
    const PluckerLined b = plucker_transform(t2 * t1, l);
    EXPECT_LT((a.n - b.n).norm(), 1e-9);
    EXPECT_LT((a.v - b.v).norm(), 1e-9);
  }
}

TEST(ProjectLine, NormalizedAxisCases) {
  const PinholeCamerad cam(1, 1, 0, 0);  // K_L = I
  const Vec3d l1 = project_line(cam, PluckerLined(Vec3d(0, 1, 0), Vec3d::UnitX()));
  EXPECT_LT((l1 - Vec3d(0, 1, 0)).norm(), 1e-12);
  const Vec3d l2 = project_line(cam, PluckerLined(Vec3d(1, 0, 0), Vec3d::UnitY()));
  EXPECT_LT((l2 - Vec3d(1, 0, 0)).norm(), 1e-12);
}

TEST(ProjectLine, KLConvention) {
  const PinholeCamerad cam(2, 2, 0, 0);
  const Vec3d l = project_line(cam, PluckerLined(Vec3d(0, 0, 1), Vec3d::UnitX()));
  EXPECT_LT((l - Vec3d(0, 0, 4)).norm(), 1e-12);
}

TEST(ProjectLine, PixelIncidenceOracle) {
  // l^T u~ = 0 for pixels of points on the line, general intrinsics
  const PinholeCamerad cam(400, 350, 320, 240);
  for (int i = 0; i < 200; ++i) {
    Vec3d p1 = random_vec(2.0);
    Vec3d p2 = random_vec(2.0);
    p1.z() += 6.0;
    p2.z() += 6.0;
    if ((p1 - p2).norm() < 0.1) continue;
    const PluckerLined line = plucker_from_two_points(p1, p2);
    if (line.n.norm() < 1e-6) continue;
    const Vec3d l = project_line(cam, line);
    for (double t : {0.0, 0.3, 1.0}) {
      const Vec3d q = p1 + t * (p2 - p1);
      if (q.z() < 0.5) continue;
      const Vec2d uv = project_point(cam, Pose3d::identity(), q);
      const double res = l.x() * uv.x() + l.y() * uv.y() + l.z();
      EXPECT_NEAR(res / std::sqrt(l.x() * l.x() + l.y() * l.y()), 0.0, 1e-6);
    }
  }
}

TEST(ProjectLine, ThroughCenterThrows) {
  const PinholeCamerad cam(1, 1, 0, 0);
  try {
    project_line(cam, PluckerLined(Vec3d::Zero(), Vec3d::UnitX()));
    FAIL() << "expected DegenerateProjection";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateProjection);
  }
}

TEST(LineEndpointResidual, OnLine) {
  const Vec2d r = line_endpoint_residual(Vec3d(0, 1, -5), Segment2Dd({3, 5}, {9, 5}));
  EXPECT_NEAR(r.x(), 0.0, 1e-12);
  EXPECT_NEAR(r.y(), 0.0, 1e-12);
}

TEST(LineEndpointResidual, VerticalOffset) {
  const Vec2d r = line_endpoint_residual(Vec3d(0, 1, -5), Segment2Dd({3, 5}, {3, 7}));
  EXPECT_NEAR(r.x(), 0.0, 1e-12);
  EXPECT_NEAR(r.y(), 2.0, 1e-12);
}

TEST(LineEndpointResidual, HandComputed) {
  const Vec2d r = line_endpoint_residual(Vec3d(3, 4, -25), Segment2Dd({0, 0}, {10, 0}));
  EXPECT_NEAR(r.x(), -5.0, 1e-12);
  EXPECT_NEAR(r.y(), 1.0, 1e-12);
}

TEST(LineEndpointResidual, DegenerateThrows) {
  try {
    line_endpoint_residual(Vec3d(0, 0, 1), Segment2Dd({0, 0}, {1, 0}));
    FAIL() << "expected DegenerateLine";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateLine);
  }
}

TEST(ProjectedLineResidual, ZeroForPointsOnLine) {
  // residual of the projected segment through projected line points is zero
  const PinholeCamerad cam(400, 400, 320, 240);
  for (int i = 0; i < 200; ++i) {
    const PluckerLined line = random_line();
    const Pose3d pose = random_pose();
    const PluckerLined lc = plucker_transform(pose, line);
    if (lc.n.norm() < 1e-6) continue;
    // find two points on the world line with positive camera depth
    const Vec3d v = line.v;
    const Vec3d p0 = line.v.cross(line.n) / line.v.squaredNorm();  // closest to origin
    const Vec3d q1 = p0 + 1.0 * v;
    const Vec3d q2 = p0 - 1.0 * v;
    if ((pose * q1).z() < 0.1 || (pose * q2).z() < 0.1) continue;
    const Vec2d uv1 = project_point(cam, pose, q1);
    const Vec2d uv2 = project_point(cam, pose, q2);
    if ((uv1 - uv2).norm() < 1e-3) continue;
    const Vec3d l = project_line(cam, lc);
    const Vec2d r = line_endpoint_residual(l, Segment2Dd(uv1, uv2));
    EXPECT_NEAR(r.x(), 0.0, 1e-6);
    EXPECT_NEAR(r.y(), 0.0, 1e-6);
  }
}

TEST(Orthonormal, AxisAlignedDecomposition) {
  const OrthonormalLined lo = orthonormal_from_plucker(PluckerLined({0, 0, 2}, {0, 1, 0}));
  const Mat3d U = lo.U.matrix();
  EXPECT_LT((U.col(0) - Vec3d(0, 0, 1)).norm(), 1e-12);
  EXPECT_LT((U.col(1) - Vec3d(0, 1, 0)).norm(), 1e-12);
  EXPECT_LT((U.col(2) - Vec3d(-1, 0, 0)).norm(), 1e-12);
  EXPECT_NEAR(lo.phi, std::atan2(1.0, 2.0), 1e-12);
}

TEST(Orthonormal, EqualNorms) {
  const OrthonormalLined lo = orthonormal_from_plucker(PluckerLined({1, 0, 0}, {0, 1, 0}));
  const Mat3d U = lo.U.matrix();
  EXPECT_LT((U - Mat3d::Identity()).norm(), 1e-12);
  EXPECT_NEAR(lo.phi, M_PI / 4.0, 1e-12);
}

TEST(Orthonormal, ThroughOriginThrows) {
  try {
    orthonormal_from_plucker(PluckerLined(Vec3d::Zero(), Vec3d::UnitX()));
    FAIL() << "expected DegenerateLine";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateLine);
  }
}

TEST(Orthonormal, RoundTripPreservesLine) {
  for (int i = 0; i < 1000; ++i) {
    const PluckerLined l = random_line();
    const PluckerLined back = plucker_from_orthonormal(orthonormal_from_plucker(l));
    // same line up to positive scale
    const double s = l.v.norm() / back.v.norm();
    EXPECT_LT((s * back.n - l.n).norm(), 1e-9 * (1.0 + l.n.norm()));
    EXPECT_LT((s * back.v - l.v).norm(), 1e-9);
    EXPECT_LE(std::abs(back.n.dot(back.v)), 1e-9);
    // as a point set
    const Vec3d p0 = l.v.cross(l.n) / l.v.squaredNorm();
    EXPECT_NEAR(point_line_distance_3d(p0, back), 0.0, 1e-9);
    EXPECT_NEAR(point_line_distance_3d((p0 + 2.5 * l.v).eval(), back), 0.0, 1e-9);
  }
}

TEST(OrthonormalRetract, IdentityAtZero) {
  const OrthonormalLined lo = orthonormal_from_plucker(random_line());
  const OrthonormalLined r = orthonormal_retract(lo, Vec4d::Zero());
  EXPECT_LT((r.U.matrix() - lo.U.matrix()).norm(), 1e-15);
  EXPECT_EQ(r.phi, lo.phi);
}

TEST(OrthonormalRetract, PhiOnly) {
  const OrthonormalLined lo = orthonormal_from_plucker(random_line());
  const double eps = 1e-3;
  const OrthonormalLined r = orthonormal_retract(lo, Vec4d(0, 0, 0, eps));
  EXPECT_LT((r.U.matrix() - lo.U.matrix()).norm(), 1e-15);
  EXPECT_NEAR(r.phi, lo.phi + eps, 1e-15);
}

TEST(OrthonormalRetract, ApproximateInverse) {
  for (int i = 0; i < 100; ++i) {
    const OrthonormalLined lo = orthonormal_from_plucker(random_line());
    std::uniform_real_distribution<double> d(-0.01, 0.01);
    const Vec4d delta(d(rng), d(rng), d(rng), d(rng));
    const OrthonormalLined r = orthonormal_retract(orthonormal_retract(lo, delta), (-delta).eval());
    EXPECT_LT((r.U.matrix() - lo.U.matrix()).norm(), 10.0 * delta.squaredNorm());
    EXPECT_NEAR(r.phi, lo.phi, 1e-12);
  }
}

TEST(OrthonormalRetract, FullRankAtZero) {
  // numeric Jacobian of delta -> (n, v) has rank 4
  const OrthonormalLined lo = orthonormal_from_plucker(random_line());
  const double eps = 1e-6;
  Eigen::Matrix<double, 6, 4> J;
  for (int k = 0; k < 4; ++k) {
    Vec4d dp = Vec4d::Zero();
    dp(k) = eps;
    const PluckerLined lp = plucker_from_orthonormal(orthonormal_retract(lo, dp));
    const PluckerLined lm = plucker_from_orthonormal(orthonormal_retract(lo, (-dp).eval()));
    J.block<3, 1>(0, k) = (lp.n - lm.n) / (2 * eps);
    J.block<3, 1>(3, k) = (lp.v - lm.v) / (2 * eps);
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, 6, 4>> svd(J);
  EXPECT_GT(svd.singularValues()(3), 1e-3);
}

TEST(PointLineDistance3d, OnAxis) {
  const PluckerLined l(Vec3d::Zero(), Vec3d::UnitX());
  EXPECT_NEAR(point_line_distance_3d(Vec3d(5, 0, 0), l), 0.0, 1e-12);
  EXPECT_NEAR(point_line_distance_3d(Vec3d(5, 3, 4), l), 5.0, 1e-12);
}

TEST(PointLineDistance3d, ConstructionOracle) {
  for (int i = 0; i < 500; ++i) {
    const Vec3d p1 = random_vec(5.0);
    const Vec3d p2 = random_vec(5.0);
    if ((p1 - p2).norm() < 0.1) continue;
    const PluckerLined l = plucker_from_two_points(p1, p2);
    EXPECT_NEAR(point_line_distance_3d(p1, l), 0.0, 1e-9);
    EXPECT_NEAR(point_line_distance_3d(p2, l), 0.0, 1e-9);
  }
}

TEST(TwoPointLine, HandCases) {
  const PluckerLined a = plucker_from_two_points(Vec3d(1, 0, 0), Vec3d(1, 1, 0));
  EXPECT_LT((a.n - Vec3d(0, 0, 1)).norm(), 1e-12);
  EXPECT_LT((a.v - Vec3d(0, 1, 0)).norm(), 1e-12);

  const PluckerLined b = plucker_from_two_points(Vec3d(0, 0, 5), Vec3d(1, 0, 5));
  EXPECT_LT((b.n - Vec3d(0, 5, 0)).norm(), 1e-12);
  EXPECT_LT((b.v - Vec3d(1, 0, 0)).norm(), 1e-12);
}

TEST(TwoPointLine, CoincidentThrows) {
  try {
    plucker_from_two_points(Vec3d(1, 2, 3), Vec3d(1, 2, 3));
    FAIL() << "expected CoincidentPoints";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CoincidentPoints);
  }
}
