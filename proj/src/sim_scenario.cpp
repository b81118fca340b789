#include "plviwo/sim/scenario.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <random>
#include <thread>

namespace plviwo::sim {

uint64_t derive_seed(uint64_t master, uint64_t a, uint64_t b, uint64_t c) {
  // splitmix64 over the mixed indices
  uint64_t x = master ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xbf58476d1ce4e5b9ULL) ^
               (c * 0x94d049bb133111ebULL);
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

ScenarioSpec build_scenario(int id) {
  if (id < 1 || id > 4) throw_error(ErrorCode::InvalidConfig, "scenario id must be in 1..4");
  ScenarioSpec s;
  s.id = id;
  s.cam = PinholeCamerad(400, 400, 320, 240);
  const double depth = (id == 4) ? 10.0 : 8.0;
  s.e1 = Vec3d(-4, -2, depth);
  s.e2 = Vec3d(4, -2, depth);
  s.line = plucker_from_two_points(s.e1, s.e2);
  for (int i = 0; i < 10; ++i) {
    Vec3d c;
    switch (id) {
      case 1: c = Vec3d(-2.25 + 0.5 * i, 0, 0); break;          // along the line
      case 2: c = Vec3d(-2.25 + 0.5 * i, 0.03 * i * i, 0); break;  // curved path
      case 3: c = Vec3d(0, -2.25 + 0.5 * i, 0); break;          // vertical axis
      case 4: c = Vec3d(0, 0, 0.5 * i); break;                  // depth axis
    }
    s.camera_poses.emplace_back(Rotation3d::identity(), -c);  // world -> camera
  }
  return s;
}

std::pair<double, double> error_metrics(const PluckerLined& estimate, const PluckerLined& truth) {
  const double st = 1.0 / truth.v.norm();
  const Vec3d nt = st * truth.n, vt = st * truth.v;
  const double se = 1.0 / estimate.v.norm();
  Vec3d ne = se * estimate.n, ve = se * estimate.v;
  if (ve.dot(vt) < 0) {
    ne = -ne;
    ve = -ve;
  }
  return {(ne - nt).norm(), ve.cross(vt).norm()};
}

namespace {

struct TrialData {
  LineObservationSet obs;       // noisy segments
  Vec3d tri_mid = Vec3d::Zero();     // triangulated midpoint
  Vec3d tri_quarter = Vec3d::Zero(); // triangulated quarter point
  bool points_ok = false;
};

TrialData make_trial(const ScenarioSpec& s, double sigma_ob, std::mt19937_64& gen) {
  std::normal_distribution<double> d(0.0, sigma_ob);
  TrialData out;
  const Vec3d mid = 0.5 * (s.e1 + s.e2);
  const Vec3d quarter = s.e1 + 0.25 * (s.e2 - s.e1);
  std::vector<PointObservation> mid_obs, quarter_obs;
  int f = 0;
  for (const auto& pose : s.camera_poses) {
    LineObservationEntry e;
    e.frame = f++;
    e.pose_CG = pose;
    Vec2d a = project_point(s.cam, pose, s.e1);
    Vec2d b = project_point(s.cam, pose, s.e2);
    Vec2d m = project_point(s.cam, pose, mid);
    Vec2d q = project_point(s.cam, pose, quarter);
    if (sigma_ob > 0) {
      a += Vec2d(d(gen), d(gen));
      b += Vec2d(d(gen), d(gen));
      m += Vec2d(d(gen), d(gen));
      q += Vec2d(d(gen), d(gen));
    }
    e.seg = Segment2Dd(a, b);
    out.obs.entries.push_back(e);
    mid_obs.emplace_back(pose, m);
    quarter_obs.emplace_back(pose, q);
  }
  try {
    out.tri_mid = triangulate_point(mid_obs, s.cam);
    out.tri_quarter = triangulate_point(quarter_obs, s.cam);
    out.points_ok = true;
  } catch (const Error&) {
    out.points_ok = false;
  }
  return out;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

std::vector<InitTrialRecord> run_init_study(const InitStudyConfig& cfg) {
  struct Job {
    int scenario;
    double sigma;
    int trial;
  };
  std::vector<Job> jobs;
  for (int sc : cfg.scenarios)
    for (double sg : cfg.noise_levels)
      for (int tr = 0; tr < cfg.trials; ++tr) jobs.push_back({sc, sg, tr});

  std::vector<std::vector<InitTrialRecord>> results(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), cfg.threads, [&](int ji) {
    const Job& job = jobs[ji];
    const ScenarioSpec s = build_scenario(job.scenario);
    std::mt19937_64 gen(derive_seed(cfg.seed, static_cast<uint64_t>(job.scenario),
                                    static_cast<uint64_t>(job.sigma * 1000),
                                    static_cast<uint64_t>(job.trial)));
    const TrialData data = make_trial(s, job.sigma, gen);
    const Vec3d dir_truth = s.line.v.normalized();

    const auto record = [&](const char* method, const std::function<PluckerLined()>& init) {
      InitTrialRecord r;
      r.scenario = job.scenario;
      r.method = method;
      r.sigma_ob = job.sigma;
      r.trial = job.trial;
      try {
        const PluckerLined l = init();
        const auto [en, ed] = error_metrics(l, s.line);
        r.ok = true;
        r.e_norm = en;
        r.e_dir = ed;
      } catch (const Error& e) {
        r.ok = false;
        r.error = to_string(e.code());
      }
      results[ji].push_back(r);
    };

    record("point+direction", [&]() {
      if (!data.points_ok) throw_error(ErrorCode::IllConditioned, "point triangulation failed");
      return plucker_through_point(data.tri_mid, dir_truth);
    });
    record("two-points", [&]() {
      if (!data.points_ok) throw_error(ErrorCode::IllConditioned, "point triangulation failed");
      return init_line_two_points(data.tri_mid, data.tri_quarter);
    });
    record("planes", [&]() { return init_line_planes(data.obs, s.cam); });
  });

  std::vector<InitTrialRecord> flat;
  for (auto& r : results) flat.insert(flat.end(), r.begin(), r.end());
  return flat;
}

std::vector<RefineTrialRecord> run_refinement_study(const RefinementStudyConfig& cfg) {
  struct Job {
    int scenario;
    int type;
    int trial;
  };
  std::vector<Job> jobs;
  for (int sc : cfg.scenarios)
    for (int ty : cfg.types)
      for (int tr = 0; tr < cfg.trials; ++tr) jobs.push_back({sc, ty, tr});

  std::vector<RefineTrialRecord> results(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), cfg.threads, [&](int ji) {
    const Job& job = jobs[ji];
    const ScenarioSpec s = build_scenario(job.scenario);
    // same trial index -> same noise draw across types (paired comparison)
    std::mt19937_64 gen(derive_seed(cfg.seed, static_cast<uint64_t>(job.scenario), 0,
                                    static_cast<uint64_t>(job.trial)));
    std::normal_distribution<double> dn(0.0, cfg.sigma_init);

    const TrialData data = make_trial(s, cfg.sigma_ob, gen);
    const Vec3d p1 = s.e1 + Vec3d(dn(gen), dn(gen), dn(gen));
    const Vec3d p2 = s.e2 + Vec3d(dn(gen), dn(gen), dn(gen));
    const PluckerLined init = plucker_from_two_points(p1, p2);

    LineTriangulationAux aux;
    switch (job.type) {
      case 1: break;
      case 2:
        aux.points_on_line = {data.tri_mid};
        aux.known_direction = s.line.v.normalized();
        break;
      case 3: aux.points_on_line = {data.tri_mid, data.tri_quarter}; break;
      case 4:
        aux.points_on_line = {data.tri_mid, data.tri_quarter};
        aux.known_direction = s.line.v.normalized();
        break;
      default: throw_error(ErrorCode::InvalidConfig, "type must be in 1..4");
    }

    RefinementConfig rc;
    rc.method = RefineMethod::GaussNewton;
    rc.max_iters = cfg.gn_iters;
    rc.max_step = cfg.max_step;
    rc.w_pl = cfg.w_pl;
    rc.w_d = cfg.w_d;
    const RefineResult res = refine_line(init, data.obs, aux, s.cam, rc);
    const auto [en, ed] = error_metrics(res.line, s.line);
    results[ji] = {job.scenario, job.type, job.trial, en, ed, res.report.iterations};
  });
  return results;
}

CellStats cell_stats(const std::vector<RefineTrialRecord>& records, int scenario, int type) {
  CellStats s;
  double sn = 0, sd = 0;
  for (const auto& r : records) {
    if (r.scenario != scenario || r.type != type) continue;
    s.mean_e_norm += r.e_norm;
    s.mean_e_dir += r.e_dir;
    ++s.count;
  }
  if (s.count == 0) return s;
  s.mean_e_norm /= s.count;
  s.mean_e_dir /= s.count;
  for (const auto& r : records) {
    if (r.scenario != scenario || r.type != type) continue;
    sn += (r.e_norm - s.mean_e_norm) * (r.e_norm - s.mean_e_norm);
    sd += (r.e_dir - s.mean_e_dir) * (r.e_dir - s.mean_e_dir);
  }
  if (s.count > 1) {
    s.std_e_norm = std::sqrt(sn / (s.count - 1));
    s.std_e_dir = std::sqrt(sd / (s.count - 1));
  }
  return s;
}

}  // namespace plviwo::sim
