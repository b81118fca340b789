#include <random>

#include <gtest/gtest.h>

#include "plviwo/mcc.hpp"

using namespace plviwo;

namespace {

std::mt19937_64 rng(55);

double urand(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng);
}

const PinholeCamerad kCam(400, 400, 320, 240);

PredictedPoses lateral_rig(int n, double spacing) {
  PredictedPoses poses;
  for (int i = 0; i < n; ++i) {
    poses.cam_from_world.emplace_back(Rotation3d::identity(), Vec3d(-spacing * i, 0, 0));
  }
  return poses;
}

PointTrack observe_static(const Vec3d& p, const PredictedPoses& poses, int64_t id = 0) {
  PointTrack t;
  t.id = id;
  for (size_t i = 0; i < poses.cam_from_world.size(); ++i) {
    t.obs.emplace_back(i, project_point(kCam, poses.cam_from_world[i], p));
  }
  return t;
}

}  // namespace

TEST(MccResidual, StaticFeatureZero) {
  const PredictedPoses poses = lateral_rig(6, 0.4);
  const PointTrack t = observe_static(Vec3d(0.5, -0.3, 7.0), poses);
  EXPECT_NEAR(mcc_residual(t, poses, kCam), 0.0, 1e-9);
}

TEST(MccResidual, AlternatingOffsetReadsTwenty) {
  // symmetric rig: +/-20 px alternating offsets leave the best-fit point at
  // the true location, every frame then reads ~20 px
  PredictedPoses poses;
  for (int i = 0; i < 6; ++i) {
    poses.cam_from_world.emplace_back(Rotation3d::identity(), Vec3d(1.0 - 0.4 * i, 0, 0));
  }
  const Vec3d p(0, 0, 8.0);
  PointTrack t = observe_static(p, poses);
  for (size_t i = 0; i < t.obs.size(); ++i) {
    t.obs[i].second.x() += (i % 2 == 0) ? 20.0 : -20.0;
  }
  const double r = mcc_residual(t, poses, kCam);
  EXPECT_NEAR(r, 20.0, 2.5);
}

TEST(MccResidual, LateralDynamicObjectOracle) {
  // object at 10 m depth moving 1 m/s laterally, camera static, 10 Hz:
  // 4 px/frame image motion; the mean deviation from the best static fit
  // follows the frame-step accumulation
  PredictedPoses poses;
  const int n = 5;
  for (int i = 0; i < n; ++i) {
    poses.cam_from_world.emplace_back(Rotation3d::identity(), Vec3d(0, -0.01 * i, 0));
  }
  PointTrack t;
  t.id = 0;
  for (int i = 0; i < n; ++i) {
    const Vec3d p_moving(0.1 * i, 0, 10.0);  // 1 m/s at 10 Hz
    t.obs.emplace_back(i, project_point(kCam, poses.cam_from_world[i], p_moving));
  }
  const double r = mcc_residual(t, poses, kCam);
  // per-frame-step scale: offsets ~ 4 px * (-2,-1,0,1,2) around the fit
  EXPECT_GT(r, 2.0);
  EXPECT_LT(r, 8.0);
}

TEST(MccResidual, GaugeInvariance) {
  const PredictedPoses poses = lateral_rig(6, 0.4);
  const Vec3d p(0.5, -0.3, 7.0);
  PointTrack t = observe_static(p, poses);
  t.obs[2].second += Vec2d(3.0, -1.0);  // some inconsistency to measure

  const Pose3d T(Rotation3d::exp(Vec3d(urand(-1, 1), urand(-1, 1), urand(-1, 1))),
                 Vec3d(urand(-5, 5), urand(-5, 5), urand(-5, 5)));
  PredictedPoses moved;
  for (const auto& pose : poses.cam_from_world) moved.cam_from_world.push_back(pose * T);

  const double r0 = mcc_residual(t, poses, kCam);
  const double r1 = mcc_residual(t, moved, kCam);
  EXPECT_NEAR(r0, r1, 1e-6);
}

TEST(SelectStatic, SeventyOfHundredStatic) {
  const PredictedPoses poses = lateral_rig(6, 0.4);
  std::vector<PointTrack> tracks;
  int64_t id = 0;
  std::vector<bool> is_static;
  // 150 tracks: 100 static, 50 dynamic, interleaved
  for (int i = 0; i < 150; ++i) {
    const bool stat = (i % 3) != 2;
    const Vec3d base(urand(-2, 2), urand(-2, 2), urand(5, 9));
    PointTrack t;
    t.id = id++;
    for (size_t ci = 0; ci < poses.cam_from_world.size(); ++ci) {
      Vec3d p = base;
      if (!stat) p += Vec3d(0, 0.15 * static_cast<double>(ci), 0);  // crossing object
      t.obs.emplace_back(ci, project_point(kCam, poses.cam_from_world[ci], p));
    }
    tracks.push_back(t);
    is_static.push_back(stat);
  }
  const auto sel = select_static_points(tracks, poses, kCam, 70, 3.0);
  EXPECT_EQ(sel.size(), 70u);
  for (size_t i : sel) EXPECT_TRUE(is_static[i]);
}

TEST(SelectStatic, AllDynamicEmpty) {
  const PredictedPoses poses = lateral_rig(6, 0.4);
  std::vector<PointTrack> tracks;
  for (int i = 0; i < 10; ++i) {
    PointTrack t;
    t.id = i;
    const Vec3d base(urand(-2, 2), urand(-2, 2), urand(5, 9));
    for (size_t ci = 0; ci < poses.cam_from_world.size(); ++ci) {
      const Vec3d p = base + Vec3d(0, 0.2 * static_cast<double>(ci), 0);
      t.obs.emplace_back(ci, project_point(kCam, poses.cam_from_world[ci], p));
    }
    tracks.push_back(t);
  }
  EXPECT_TRUE(select_static_points(tracks, poses, kCam, 70, 3.0).empty());
}

TEST(SelectStatic, DynamicSkippedInFavorOfLaterStatic) {
  const PredictedPoses poses = lateral_rig(6, 0.4);
  std::vector<PointTrack> tracks;
  // id 0: dynamic, id 1: static; capacity 1 -> the static one wins
  {
    PointTrack t;
    t.id = 0;
    const Vec3d base(0, 0, 6);
    for (size_t ci = 0; ci < poses.cam_from_world.size(); ++ci) {
      t.obs.emplace_back(ci, project_point(kCam, poses.cam_from_world[ci],
                                           base + Vec3d(0, 0.2 * static_cast<double>(ci), 0)));
    }
    tracks.push_back(t);
  }
  tracks.push_back(observe_static(Vec3d(1, 1, 7), poses, 1));
  const auto sel = select_static_points(tracks, poses, kCam, 1, 3.0);
  ASSERT_EQ(sel.size(), 1u);
  EXPECT_EQ(tracks[sel[0]].id, 1);
}

TEST(SelectStatic, DeterministicAndBounded) {
  const PredictedPoses poses = lateral_rig(6, 0.4);
  std::vector<PointTrack> tracks;
  for (int i = 0; i < 40; ++i) {
    tracks.push_back(observe_static(Vec3d(urand(-2, 2), urand(-2, 2), urand(5, 9)), poses, 40 - i));
  }
  const auto a = select_static_points(tracks, poses, kCam, 25, 3.0);
  const auto b = select_static_points(tracks, poses, kCam, 25, 3.0);
  EXPECT_EQ(a, b);
  EXPECT_LE(a.size(), 25u);
  // id order respected: selected ids are the smallest ones
  for (size_t i : a) EXPECT_LE(tracks[i].id, 25);
}
