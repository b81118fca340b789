#include "plviwo/frontend.hpp"

#include <algorithm>
#include <cmath>

namespace plviwo {

namespace {

VanishingPoint project_axis(const PinholeCamerad& cam, const Vec3d& d) {
  VanishingPoint vp;
  if (std::abs(d.z()) <= 1e-6) {
    vp.at_infinity = true;
    Vec2d dir(cam.fx * d.x(), cam.fy * d.y());
    dir.normalize();
    // sign convention: first nonzero component positive
    if (dir.x() < 0 || (dir.x() == 0 && dir.y() < 0)) dir = -dir;
    vp.value = dir;
  } else {
    vp.value = Vec2d(cam.fx * d.x() / d.z() + cam.cx, cam.fy * d.y() / d.z() + cam.cy);
  }
  return vp;
}

double axis_similarity(const Segment2Dd& seg, const VanishingPoint& vp) {
  const Vec2d dir = seg.direction();
  Vec2d ref;
  if (vp.at_infinity) {
    ref = vp.value;
  } else {
    ref = vp.value - seg.midpoint();
    const double len = ref.norm();
    if (len < 1e-9) return 0.0;  // midpoint sits on the vanishing point
    ref /= len;
  }
  return std::abs(dir.dot(ref));
}

struct Projection {
  double cross = 0;
  double len2 = 0;
  double perp = 0;
};

Projection project_to_segment(const Vec2d& p, const Segment2Dd& seg) {
  Projection out;
  const Vec2d d = seg.pe - seg.ps;
  out.len2 = d.squaredNorm();
  out.cross = d.dot(p - seg.ps);
  out.perp = std::abs(d.x() * (p.y() - seg.ps.y()) - d.y() * (p.x() - seg.ps.x())) /
             std::sqrt(out.len2);
  return out;
}

}  // namespace

VanishingPoints compute_vanishing_points(const PinholeCamerad& cam, const Rotation3d& R_CI) {
  VanishingPoints vps;
  vps.vp_x = project_axis(cam, R_CI * Vec3d::UnitX());
  vps.vp_y = project_axis(cam, R_CI * Vec3d::UnitY());
  vps.vp_z = project_axis(cam, R_CI * Vec3d::UnitZ());
  return vps;
}

DirectionClass classify_segment(const Segment2Dd& seg, const VanishingPoints& vps,
                                double threshold) {
  double best = -1.0;
  int best_axis = -1;
  for (int axis = 0; axis < 3; ++axis) {
    const double s = axis_similarity(seg, vps[axis]);
    if (s > best) {  // strict: ties keep the earlier axis
      best = s;
      best_axis = axis;
    }
  }
  if (best <= threshold) return DirectionClass::None;
  return best_axis == 0 ? DirectionClass::X : (best_axis == 1 ? DirectionClass::Y : DirectionClass::Z);
}

double point_segment_distance(const Vec2d& p, const Segment2Dd& seg) {
  const Projection pr = project_to_segment(p, seg);
  if (pr.cross <= 0) return (p - seg.ps).norm();
  if (pr.cross > pr.len2) return (p - seg.pe).norm();
  return pr.perp;
}

PointSegmentAssignment assign_points_to_segments(const std::vector<TrackedPoint>& points,
                                                 const std::vector<Segment2Dd>& segs,
                                                 double max_dist) {
  PointSegmentAssignment out;
  for (size_t pi = 0; pi < points.size(); ++pi) {
    for (size_t si = 0; si < segs.size(); ++si) {
      const Projection pr = project_to_segment(points[pi].uv, segs[si]);
      if (pr.cross > 0 && pr.cross < pr.len2 && pr.perp < max_dist) {
        out.emplace_back(pi, si);
      }
    }
  }
  return out;
}

namespace {

bool mergeable(const Segment2Dd& a, const Segment2Dd& b, const MergeParams& p) {
  const Vec2d da = a.direction();
  const Vec2d db = b.direction();
  if (std::abs(da.dot(db)) < std::cos(p.angle_tol)) return false;

  const auto lateral = [](const Segment2Dd& ref, const Vec2d& q) {
    const Vec2d d = ref.direction();
    const Vec2d r = q - ref.ps;
    return std::abs(d.x() * r.y() - d.y() * r.x());
  };
  const double lat = std::max(std::max(lateral(a, b.ps), lateral(a, b.pe)),
                              std::max(lateral(b, a.ps), lateral(b, a.pe)));
  if (lat > p.lateral_tol) return false;

  // 1D extents along a's direction
  const double a_lo = 0.0, a_hi = a.length();
  const double b1 = da.dot(b.ps - a.ps);
  const double b2 = da.dot(b.pe - a.ps);
  const double b_lo = std::min(b1, b2), b_hi = std::max(b1, b2);
  const double gap = std::max(b_lo - a_hi, a_lo - b_hi);
  return gap <= p.gap_tol;
}

Segment2Dd merge_pair(const Segment2Dd& a, const Segment2Dd& b) {
  const Vec2d d = a.direction();
  const Vec2d pts[4] = {a.ps, a.pe, b.ps, b.pe};
  double lo = 0, hi = 0;
  int ilo = 0, ihi = 0;
  for (int i = 0; i < 4; ++i) {
    const double t = d.dot(pts[i] - a.ps);
    if (t < lo) { lo = t; ilo = i; }
    if (t > hi) { hi = t; ihi = i; }
  }
  return Segment2Dd(pts[ilo], pts[ihi]);
}

}  // namespace

std::vector<Segment2Dd> merge_segments(const std::vector<Segment2Dd>& segs,
                                       const MergeParams& params) {
  std::vector<Segment2Dd> work = segs;
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < work.size() && !changed; ++i) {
      for (size_t j = i + 1; j < work.size() && !changed; ++j) {
        if (mergeable(work[i], work[j], params)) {
          work[i] = merge_pair(work[i], work[j]);
          work.erase(work.begin() + static_cast<long>(j));
          changed = true;
        }
      }
    }
  }
  return work;
}

std::vector<Segment2Dd> filter_short(const std::vector<Segment2Dd>& segs, double min_len) {
  std::vector<Segment2Dd> out;
  for (const auto& s : segs) {
    if (s.length() >= min_len) out.push_back(s);
  }
  return out;
}

namespace {

struct MatchCandidate {
  size_t prev_idx;
  size_t cur_idx;
  int shared;
  double mid_disp;
};

double undirected_angle(const Segment2Dd& a, const Segment2Dd& b) {
  const double c = std::min(1.0, std::abs(a.direction().dot(b.direction())));
  return std::acos(c);
}

LineMatchList resolve_greedy(std::vector<MatchCandidate> cands, size_t n_prev, size_t n_cur) {
  std::sort(cands.begin(), cands.end(), [](const MatchCandidate& a, const MatchCandidate& b) {
    if (a.shared != b.shared) return a.shared > b.shared;
    if (a.mid_disp != b.mid_disp) return a.mid_disp < b.mid_disp;
    if (a.prev_idx != b.prev_idx) return a.prev_idx < b.prev_idx;
    return a.cur_idx < b.cur_idx;
  });
  std::vector<bool> prev_used(n_prev, false), cur_used(n_cur, false);
  LineMatchList out;
  for (const auto& c : cands) {
    if (prev_used[c.prev_idx] || cur_used[c.cur_idx]) continue;
    prev_used[c.prev_idx] = true;
    cur_used[c.cur_idx] = true;
    out.emplace_back(c.prev_idx, c.cur_idx);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

LineMatchList track_lines_stage1(const std::vector<LineObservation>& prev,
                                 const std::vector<LineObservation>& cur,
                                 const std::unordered_map<int64_t, int64_t>& point_matches,
                                 const TrackParams& params) {
  std::vector<MatchCandidate> cands;
  for (size_t i = 0; i < prev.size(); ++i) {
    // ids the prev line's points map to in the current frame
    std::set<int64_t> mapped;
    for (int64_t id : prev[i].assigned_point_ids) {
      auto it = point_matches.find(id);
      if (it != point_matches.end()) mapped.insert(it->second);
    }
    for (size_t j = 0; j < cur.size(); ++j) {
      int shared = 0;
      for (int64_t id : mapped) {
        if (cur[j].assigned_point_ids.count(id)) ++shared;
      }
      if (shared == 0) continue;
      const double disp = (cur[j].seg.midpoint() - prev[i].seg.midpoint()).norm();
      if (shared == 1) {
        if (disp >= params.pos_tol) continue;
        if (undirected_angle(prev[i].seg, cur[j].seg) >= params.dir_tol) continue;
      }
      cands.push_back({i, j, shared, disp});
    }
  }
  return resolve_greedy(std::move(cands), prev.size(), cur.size());
}

LineMatchList track_lines_stage2(const std::vector<LineObservation>& untracked_prev,
                                 const std::vector<LineObservation>& cur,
                                 const SampleTracker& sample_tracker,
                                 const TrackParams& params) {
  std::vector<MatchCandidate> cands;
  for (size_t i = 0; i < untracked_prev.size(); ++i) {
    const Segment2Dd& seg = untracked_prev[i].seg;
    const Vec2d samples[5] = {seg.ps, seg.pe, seg.midpoint(),
                              seg.ps + 0.25 * (seg.pe - seg.ps),
                              seg.ps + 0.75 * (seg.pe - seg.ps)};
    std::vector<Vec2d> tracked;
    for (const auto& s : samples) {
      if (auto t = sample_tracker(s)) tracked.push_back(*t);
    }
    if (tracked.empty()) continue;
    for (size_t j = 0; j < cur.size(); ++j) {
      int landed = 0;
      for (const auto& t : tracked) {
        if (point_segment_distance(t, cur[j].seg) < params.assign_dist) ++landed;
      }
      if (landed == 0) continue;
      const double disp = (cur[j].seg.midpoint() - seg.midpoint()).norm();
      if (landed == 1) {
        if (disp >= params.pos_tol) continue;
        if (undirected_angle(seg, cur[j].seg) >= params.dir_tol) continue;
      }
      cands.push_back({i, j, landed, disp});
    }
  }
  return resolve_greedy(std::move(cands), untracked_prev.size(), cur.size());
}

}  // namespace plviwo
