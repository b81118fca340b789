#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "plviwo/camera.hpp"
#include "plviwo/frontend.hpp"
#include "plviwo/line.hpp"
#include "plviwo/pose.hpp"
#include "plviwo/types.hpp"

namespace plviwo {

// One 2D sighting of a line: camera pose (world -> camera) and the observed
// segment. frame groups stereo twins; right_cam marks the right camera.
struct LineObservationEntry {
  int frame = 0;
  bool right_cam = false;
  Pose3d pose_CG;
  Segment2Dd seg;
};

struct LineObservationSet {
  std::vector<LineObservationEntry> entries;

  bool has_stereo() const {
    for (const auto& e : entries)
      if (e.right_cam) return true;
    return false;
  }
};

struct LineTriangulationAux {
  std::vector<Vec3d> points_on_line;        // triangulated 3D points (world)
  std::optional<Vec3d> known_direction;     // unit world direction, if classified
};

enum class RefineMethod { LevenbergMarquardt, GaussNewton };

struct RefinementConfig {
  int max_iters = 5;
  RefineMethod method = RefineMethod::LevenbergMarquardt;
  double lambda_init = 1e-4;
  double lambda_scale = 10.0;
  double lambda_cap = 1e8;
  double tol = 1e-14;       // stop when the accepted cost drop falls below this
  double max_step = 1.0;    // clamp on |delta| per iteration
  double w_l = 1.0;         // endpoint reprojection weight
  double w_pl = 1.0;        // point-on-line weight
  double w_d = 1.0;         // direction alignment weight
};

struct RefineReport {
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  double cost_endpoints = 0.0;
  double cost_points = 0.0;
  double cost_direction = 0.0;
};

// --- point triangulation ----------------------------------------------------

using PointObservation = std::pair<Pose3d, Vec2d>;  // (world -> camera, pixel)

// DLT least squares followed by a short Gauss-Newton polish on pixel error.
Vec3d triangulate_point(const std::vector<PointObservation>& obs, const PinholeCamerad& cam);

// --- line initialization ----------------------------------------------------

enum class InitStrategy { PointDirection, TwoPoints, Planes };

inline const char* to_string(InitStrategy s) {
  switch (s) {
    case InitStrategy::PointDirection: return "point+direction";
    case InitStrategy::TwoPoints: return "two-points";
    case InitStrategy::Planes: return "planes";
  }
  return "?";
}

// v = world direction of the classified IMU axis (R_IG maps world -> IMU),
// n = p x v.
PluckerLined init_line_point_direction(const Vec3d& p, DirectionClass dir_class,
                                       const Rotation3d& R_IG);

PluckerLined init_line_two_points(const Vec3d& p1, const Vec3d& p2);

PluckerLined init_line_planes(const LineObservationSet& obs, const PinholeCamerad& cam);

struct LineInit {
  PluckerLined line;
  InitStrategy strategy;
};

LineInit select_and_init(const LineTriangulationAux& aux, const LineObservationSet& obs,
                         const PinholeCamerad& cam);

// --- refinement --------------------------------------------------------------

struct RefineResult {
  PluckerLined line;
  RefineReport report;
};

RefineResult refine_line(const PluckerLined& init, const LineObservationSet& obs,
                         const LineTriangulationAux& aux, const PinholeCamerad& cam,
                         const RefinementConfig& cfg = {});

// --- analytic Jacobian blocks (each residual wrt the 4-dim orthonormal delta)

// d(n)/d(delta) and d(v)/d(delta) of the unit-scale Plucker coordinates at
// delta = 0.
struct PluckerTangent {
  Eigen::Matrix<double, 3, 4> dn;
  Eigen::Matrix<double, 3, 4> dv;
};

PluckerTangent plucker_tangent(const OrthonormalLined& lo);

// endpoint residual (Eq.-13 style) and d(residual)/d(pixel line n_C); used by
// both the refinement and the filter's line update.
struct ImageLineResidual {
  Vec2d r;
  Eigen::Matrix<double, 2, 3> dr_dnc;
  bool valid = false;  // false when the projected line is degenerate
};

ImageLineResidual image_line_residual(const PinholeCamerad& cam, const Segment2Dd& seg,
                                      const Vec3d& n_cam);

struct LineResidualJacobian {
  Vec2d r;
  Eigen::Matrix<double, 2, 4> J;
  bool valid = false;
};

LineResidualJacobian line_residual_jacobian(const PinholeCamerad& cam, const Pose3d& pose_CG,
                                            const Segment2Dd& seg, const OrthonormalLined& lo);

struct PointResidualJacobian {
  Vec3d r;
  Eigen::Matrix<double, 3, 4> J;
};

PointResidualJacobian point_residual_jacobian(const Vec3d& p, const OrthonormalLined& lo);

struct DirectionResidualJacobian {
  Vec3d r;
  Eigen::Matrix<double, 3, 4> J;
};

DirectionResidualJacobian direction_residual_jacobian(const Vec3d& d_ref,
                                                      const OrthonormalLined& lo);

}  // namespace plviwo
