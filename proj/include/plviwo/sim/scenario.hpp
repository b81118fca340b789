#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "plviwo/camera.hpp"
#include "plviwo/line.hpp"
#include "plviwo/pose.hpp"
#include "plviwo/triangulation.hpp"
#include "plviwo/types.hpp"

namespace plviwo::sim {

// One Monte Carlo line-triangulation world: a single 3D segment watched from
// ten camera poses.
struct ScenarioSpec {
  int id = 1;
  Vec3d e1 = Vec3d::Zero();
  Vec3d e2 = Vec3d::Zero();
  PluckerLined line;
  std::vector<Pose3d> camera_poses;  // world -> camera
  PinholeCamerad cam;
  double sigma_ob = 1.0;    // 2D endpoint noise, px
  double sigma_init = 0.1;  // 3D endpoint perturbation, m
  uint64_t seed = 0;
};

// 1: cameras translate along the line direction (degenerate motion)
// 2: same line, curved trajectory
// 3: straight path along the vertical axis
// 4: straight path along the depth axis
ScenarioSpec build_scenario(int id);

// (e_norm, e_dir) with both lines scaled to |v| = 1 and the estimate
// sign-aligned to the truth.
std::pair<double, double> error_metrics(const PluckerLined& estimate, const PluckerLined& truth);

struct InitStudyConfig {
  std::vector<int> scenarios = {1, 2, 3, 4};
  std::vector<double> noise_levels = {0.5, 1.0, 1.5, 2.0};
  int trials = 30;
  uint64_t seed = 1;
  int threads = 1;
};

struct InitTrialRecord {
  int scenario = 0;
  std::string method;  // "point+direction" | "two-points" | "planes"
  double sigma_ob = 0;
  int trial = 0;
  bool ok = false;     // false: initializer raised (e.g. ParallelPlanes)
  std::string error;
  double e_norm = 0;
  double e_dir = 0;
};

std::vector<InitTrialRecord> run_init_study(const InitStudyConfig& cfg);

struct RefinementStudyConfig {
  std::vector<int> scenarios = {1, 2, 3, 4};
  std::vector<int> types = {1, 2, 3, 4};
  int trials = 30;
  double sigma_ob = 1.0;
  double sigma_init = 0.1;
  int gn_iters = 50;
  double max_step = 1e9;  // GN step clamp; effectively off by default
  // residual weights balancing pixels, meters and unitless terms at the
  // default fx = 400, ~8 m geometry
  double w_pl = 2500.0;   // (50 px/m)^2
  double w_d = 160000.0;  // (400 px/rad)^2
  uint64_t seed = 2;
  int threads = 1;
};

struct RefineTrialRecord {
  int scenario = 0;
  int type = 0;
  int trial = 0;
  double e_norm = 0;
  double e_dir = 0;
  int iterations = 0;
};

// Types: 1 endpoints; 2 endpoints + one 3D point + direction; 3 endpoints +
// two 3D points; 4 endpoints + two 3D points + direction.
std::vector<RefineTrialRecord> run_refinement_study(const RefinementStudyConfig& cfg);

struct CellStats {
  double mean_e_norm = 0, std_e_norm = 0;
  double mean_e_dir = 0, std_e_dir = 0;
  int count = 0;
};

CellStats cell_stats(const std::vector<RefineTrialRecord>& records, int scenario, int type);

// deterministic per-trial stream derived from the master seed
uint64_t derive_seed(uint64_t master, uint64_t a, uint64_t b, uint64_t c);

}  // namespace plviwo::sim
