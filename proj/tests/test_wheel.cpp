#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "plviwo/wheel.hpp"

using namespace plviwo;

namespace {

std::mt19937_64 rng(31);

double urand(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng);
}

Vec3d random_vec(double s) { return Vec3d(urand(-s, s), urand(-s, s), urand(-s, s)); }

// samples for constant body rates (v, w) over [0, T] at rate hz
std::vector<WheelMeasurement> constant_rate_samples(double v, double w, double T, double hz,
                                                    const WheelIntrinsics& k) {
  std::vector<WheelMeasurement> ms;
  const double wl = (v - 0.5 * w * k.b) / k.r_l;
  const double wr = (v + 0.5 * w * k.b) / k.r_r;
  const int n = static_cast<int>(std::round(T * hz));
  for (int i = 0; i <= n; ++i) ms.push_back({i / hz, wl, wr});
  return ms;
}

// SE(2) composition of two (theta, x, y) increments
Vec3d se2_compose(const Vec3d& a, const Vec3d& b) {
  const double c = std::cos(a(0)), s = std::sin(a(0));
  return Vec3d(a(0) + b(0), a(1) + c * b(1) - s * b(2), a(2) + s * b(1) + c * b(2));
}

NoiseParams default_noise() {
  NoiseParams n;
  n.sigma_w = 1e-2;
  n.sigma_p = 2e-2;
  return n;
}

}  // namespace

TEST(BodyRates, HandCases) {
  {
    const auto [v, w] = body_rates({0, 1, 1}, {0.3, 0.3, 0.5});
    EXPECT_NEAR(v, 0.3, 1e-12);
    EXPECT_NEAR(w, 0.0, 1e-12);
  }
  {
    const auto [v, w] = body_rates({0, 1, -1}, {0.3, 0.3, 0.6});
    EXPECT_NEAR(v, 0.0, 1e-12);
    EXPECT_NEAR(w, -1.0, 1e-12);
  }
  {
    const auto [v, w] = body_rates({0, 0, 2}, {0.3, 0.3, 0.6});
    EXPECT_NEAR(v, 0.3, 1e-12);
    EXPECT_NEAR(w, 1.0, 1e-12);
  }
}

TEST(Preintegrate, StraightLine) {
  const WheelIntrinsics k;
  const auto pre = preintegrate(constant_rate_samples(1.0, 0.0, 1.0, 100.0, k), k, default_noise());
  Vec6d want;
  want << 0, 0, 0, 1, 0, 0;
  EXPECT_LT((pre.z - want).norm(), 1e-12);
}

TEST(Preintegrate, QuarterCircleClosedForm) {
  const WheelIntrinsics k;
  const double v = M_PI / 2, w = M_PI / 2;
  const auto pre = preintegrate(constant_rate_samples(v, w, 1.0, 100.0, k), k, default_noise());
  // x = (v/w) sin(theta), y = (v/w)(1 - cos(theta))
  EXPECT_NEAR(pre.z(2), M_PI / 2, 1e-9);
  EXPECT_NEAR(pre.z(3), 1.0, 1e-6);
  EXPECT_NEAR(pre.z(4), 1.0, 1e-6);
}

TEST(Preintegrate, RichardsonConvergence) {
  const WheelIntrinsics k;
  const NoiseParams n = default_noise();
  // time-varying rates: make the midpoint rule's O(dt^2) error visible
  const auto make = [&](double hz) {
    std::vector<WheelMeasurement> ms;
    const int steps = static_cast<int>(hz);
    for (int i = 0; i <= steps; ++i) {
      const double t = i / hz;
      const double v = 1.0 + 0.5 * std::sin(2.0 * t);
      const double w = 0.8 * std::cos(3.0 * t);
      ms.push_back({t, (v - 0.5 * w * k.b) / k.r_l, (v + 0.5 * w * k.b) / k.r_r});
    }
    return preintegrate(ms, k, n).z;
  };
  const Vec6d z1 = make(50);
  const Vec6d z2 = make(100);
  const Vec6d z4 = make(200);
  const double e1 = (z1 - z4).norm();
  const double e2 = (z2 - z4).norm();
  EXPECT_GT(e1 / e2, 3.0);  // halving dt cuts the error ~4x
}

TEST(Preintegrate, ConstrainedSlotsExactlyZero) {
  const WheelIntrinsics k;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<WheelMeasurement> ms;
    for (int i = 0; i <= 50; ++i) ms.push_back({i * 0.01, urand(-3, 3), urand(-3, 3)});
    const auto pre = preintegrate(ms, k, default_noise());
    EXPECT_EQ(pre.z(0), 0.0);
    EXPECT_EQ(pre.z(1), 0.0);
    EXPECT_EQ(pre.z(5), 0.0);
    Eigen::SelfAdjointEigenSolver<Mat6d> es(pre.cov);
    EXPECT_GE(es.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Preintegrate, AdditiveOverTimeSplits) {
  const WheelIntrinsics k;
  const NoiseParams n = default_noise();
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<WheelMeasurement> ms;
    for (int i = 0; i <= 100; ++i) {
      const double t = i * 0.01;
      ms.push_back({t, 2.0 + std::sin(t * urand(1, 3)), 2.0 + std::cos(t * urand(1, 3))});
    }
    const std::vector<WheelMeasurement> first(ms.begin(), ms.begin() + 51);
    const std::vector<WheelMeasurement> second(ms.begin() + 50, ms.end());
    const Vec6d whole = preintegrate(ms, k, n).z;
    const Vec6d a = preintegrate(first, k, n).z;
    const Vec6d b = preintegrate(second, k, n).z;
    const Vec3d composed = se2_compose(Vec3d(a(2), a(3), a(4)), Vec3d(b(2), b(3), b(4)));
    EXPECT_LT((composed - Vec3d(whole(2), whole(3), whole(4))).norm(), 1e-6);
  }
}

TEST(PredictWheel, IdenticalClonesZero) {
  Clone c;
  c.R_IG = Rotation3d::exp(random_vec(1.0));
  c.p = random_vec(3.0);
  const Pose3d T_WI(Rotation3d::exp(random_vec(0.5)), random_vec(0.3));
  EXPECT_LT(predict_wheel(c, c, T_WI).norm(), 1e-12);
}

TEST(PredictWheel, MatchesPlanarPreintegration) {
  const WheelIntrinsics k;
  const NoiseParams n = default_noise();
  const Pose3d T_WI(Rotation3d::exp(Vec3d(0.1, -0.2, 0.3)), Vec3d(0.2, 0.1, -0.3));

  const double v = 1.2, w = 0.7, T = 1.0;
  const auto pre = preintegrate(constant_rate_samples(v, w, T, 200.0, k), k, n);

  // ground-truth wheel poses on the arc; IMU clones through the extrinsic
  const auto wheel_pose = [&](double t) {
    const double th = w * t;
    const Vec3d p((v / w) * std::sin(th), (v / w) * (1.0 - std::cos(th)), 0.0);
    return Pose3d(Rotation3d::exp(Vec3d(0, 0, th)), p);  // wheel -> world
  };
  const auto clone_at = [&](double t) {
    const Pose3d T_GI = wheel_pose(t) * T_WI;  // IMU -> world
    Clone c;
    c.t = t;
    c.R_IG = T_GI.rotation.inverse();
    c.p = T_GI.translation;
    return c;
  };
  const Vec6d z_hat = predict_wheel(clone_at(0.0), clone_at(T), T_WI);
  EXPECT_LT((z_hat - pre.z).norm(), 1e-6);
}

TEST(PredictWheel, OutOfPlanePitchHitsConstrainedSlots) {
  Clone c1;
  c1.R_IG = Rotation3d::identity();
  c1.p = Vec3d::Zero();
  Clone c2;
  c2.R_IG = Rotation3d::exp(Vec3d(0, -0.1, 0));  // pitch
  c2.p = Vec3d(1.0, 0, 0.05);                    // climbs out of plane
  const Vec6d z = predict_wheel(c1, c2, Pose3d::identity());
  EXPECT_GT(std::abs(z(1)), 1e-3);  // rot_y slot
  EXPECT_GT(std::abs(z(5)), 1e-3);  // t_z slot
}

TEST(PredictWheel, JacobianMatchesFiniteDifference) {
  const double eps = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    Clone c1, c2;
    c1.R_IG = Rotation3d::exp(random_vec(1.0));
    c1.p = random_vec(2.0);
    c2.R_IG = Rotation3d::exp(random_vec(1.0));
    c2.p = random_vec(2.0);
    const Pose3d T_WI(Rotation3d::exp(random_vec(0.5)), random_vec(0.3));

    const Eigen::Matrix<double, 6, 12> H = predict_wheel_jacobian(c1, c2, T_WI);
    Eigen::Matrix<double, 6, 12> fd;
    for (int k = 0; k < 12; ++k) {
      Eigen::Matrix<double, 12, 1> d = Eigen::Matrix<double, 12, 1>::Zero();
      d(k) = eps;
      const auto apply = [&](const Clone& c, int base, double sign) {
        Clone out = c;
        out.R_IG = Rotation3d::exp((sign * d.segment<3>(base)).eval()) * c.R_IG;
        out.p = c.p + sign * d.segment<3>(base + 3);
        return out;
      };
      const Vec6d zp = predict_wheel(apply(c1, 0, 1.0), apply(c2, 6, 1.0), T_WI);
      const Vec6d zm = predict_wheel(apply(c1, 0, -1.0), apply(c2, 6, -1.0), T_WI);
      fd.col(k) = (zp - zm) / (2 * eps);
    }
    EXPECT_LT((H - fd).norm() / fd.norm(), 1e-5) << "trial " << trial;
  }
}

TEST(WheelUpdate, ZeroResidualZeroCorrection) {
  EstimatorState st;
  st.window.max_size = 4;
  const Pose3d T_WI = Pose3d::identity();
  st.imu.p = Vec3d::Zero();
  augment_clone(st, 0.0);
  st.imu.p = Vec3d(1, 0, 0);
  augment_clone(st, 1.0);

  WheelPreintegration pre;
  pre.t_start = 0.0;
  pre.t_end = 1.0;
  pre.z = predict_wheel(st.window.clones[0], st.window.clones[1], T_WI);
  pre.cov = 1e-4 * Mat6d::Identity();

  const Vec3d p_before = st.imu.p;
  const Clone c_before = st.window.clones[1];
  wheel_update(st, pre, T_WI);
  EXPECT_LT((st.window.clones[1].p - c_before.p).norm(), 1e-12);
  EXPECT_LT((st.imu.p - p_before).norm(), 1e-12);
}

TEST(WheelUpdate, MissingCloneThrows) {
  EstimatorState st;
  augment_clone(st, 0.0);
  WheelPreintegration pre;
  pre.t_start = 0.0;
  pre.t_end = 0.5;
  try {
    wheel_update(st, pre, Pose3d::identity());
    FAIL() << "expected MissingClone";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingClone);
  }
}

TEST(WheelUpdate, PlanarPositionTraceNotIncreased) {
  EstimatorState st;
  st.window.max_size = 4;
  augment_clone(st, 0.0);
  st.imu.p = Vec3d(0.5, 0.1, 0);
  augment_clone(st, 1.0);
  const int d = st.dim();
  MatXd A = MatXd::Random(d, d);
  st.cov = 1e-4 * (A * A.transpose()).eval() + 1e-4 * MatXd::Identity(d, d);

  const auto planar_trace = [&]() {
    return st.cov(18, 18) + st.cov(19, 19) + st.cov(24, 24) + st.cov(25, 25);
  };
  const double before = planar_trace();

  WheelPreintegration pre;
  pre.t_start = 0.0;
  pre.t_end = 1.0;
  pre.z = predict_wheel(st.window.clones[0], st.window.clones[1], Pose3d::identity());
  pre.z(3) += 0.02;  // small disagreement
  pre.cov = 1e-4 * Mat6d::Identity();
  wheel_update(st, pre, Pose3d::identity());
  EXPECT_LE(planar_trace(), before + 1e-12);
}

TEST(WheelUpdate, BoundsDriftUnderImuBias) {
  // planar arc with a biased gyro: dead reckoning drifts, wheel updates pull
  // the clone chain back toward the truth
  const WheelIntrinsics k;
  const double v = 1.0, w = 0.3;
  const Vec3d gyro_bias(0.02, -0.015, 0.03);

  const auto run = [&](bool use_wheel) {
    EstimatorState st;
    st.window.max_size = 30;
    st.cov.block<3, 3>(9, 9) = 0.05 * 0.05 * Mat3d::Identity();  // honest bias prior
    validate_filter_noise(st.noise);
    const double dt_imu = 0.01, dt_clone = 0.5;
    const double T = 8.0;
    double t = 0;
    augment_clone(st, 0.0);
    double prev_clone_t = 0.0;
    while (t < T - 1e-9) {
      std::vector<ImuSample> samples;
      for (int i = 0; i <= static_cast<int>(dt_clone / dt_imu); ++i) {
        const double ti = t + i * dt_imu;
        const double th = w * ti;
        ImuSample s;
        s.t = ti;
        const Rotation3d R_IG = Rotation3d::exp(Vec3d(0, 0, -th));  // world->IMU inverse yaw
        s.w = Vec3d(0, 0, w) + gyro_bias;  // biased gyro
        const Vec3d a_world(-v * w * std::sin(th), v * w * std::cos(th), 0);
        s.a = R_IG * (a_world + st.gravity);
        samples.push_back(s);
      }
      propagate(st, samples);
      t += dt_clone;
      if (st.window.full()) marginalize_oldest(st);
      augment_clone(st, t);

      if (use_wheel) {
        std::vector<WheelMeasurement> ms;
        for (int i = 0; i <= static_cast<int>(dt_clone / dt_imu); ++i) {
          const double ti = prev_clone_t + i * dt_imu;
          ms.push_back({ti, (v - 0.5 * w * k.b) / k.r_l, (v + 0.5 * w * k.b) / k.r_r});
        }
        wheel_update(st, preintegrate(ms, k, st.noise), Pose3d::identity());
      }
      prev_clone_t = t;
    }
    const double th = w * T;
    const Vec3d p_true((v / w) * std::sin(th), (v / w) * (1 - std::cos(th)), 0);
    return (st.imu.p - p_true).norm();
  };

  const double err_with = run(true);
  const double err_without = run(false);
  EXPECT_LT(err_with, 0.5 * err_without);
}
