// Copyright 2026 The edgecalib Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "edgecalib/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "edgecalib/errors.hpp"
#include "json.hpp"
#include "rng.hpp"

namespace edgecalib {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Range gap that separates a foreground surface from the centerline hit.
constexpr double kForegroundGap = 0.05;
constexpr int kRimRays = 32;
constexpr int kInnerRays = 16;

// Standard normal from a hashed counter (Box-Muller).
double gaussian(std::uint64_t key) {
  const std::uint64_t a = detail::splitmix64(key);
  const std::uint64_t b = detail::splitmix64(a);
  const double u1 = (static_cast<double>(a >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

struct Hit {
  double s = kInf;
  int prim = -1;
  Vec3 normal = Vec3::Zero();
  double su = 0.0, sv = 0.0;  // plane metric coordinates
};

void hit_plane(const ScenePlane& p, int id, const Vec3& o, const Vec3& d, Hit& best) {
  const Vec3 n = p.edge_u.cross(p.edge_v);
  const double den = n.dot(d);
  if (den == 0.0) return;
  const double s = n.dot(p.corner - o) / den;
  if (!(s > 1e-9) || s >= best.s) return;
  const Vec3 r = o + s * d - p.corner;
  const double lu2 = p.edge_u.squaredNorm(), lv2 = p.edge_v.squaredNorm();
  const double a = r.dot(p.edge_u) / lu2, b = r.dot(p.edge_v) / lv2;
  if (a < 0.0 || a > 1.0 || b < 0.0 || b > 1.0) return;
  best.s = s;
  best.prim = id;
  best.normal = n.normalized();
  best.su = a * std::sqrt(lu2);
  best.sv = b * std::sqrt(lv2);
}

void hit_box(const SceneBox& bx, int id, const Vec3& o, const Vec3& d, Hit& best) {
  double t0 = -kInf, t1 = kInf;
  int axis0 = -1;
  for (int i = 0; i < 3; ++i) {
    if (d[i] == 0.0) {
      if (o[i] < bx.min[i] || o[i] > bx.max[i]) return;
      continue;
    }
    double a = (bx.min[i] - o[i]) / d[i], b = (bx.max[i] - o[i]) / d[i];
    if (a > b) std::swap(a, b);
    if (a > t0) {
      t0 = a;
      axis0 = i;
    }
    t1 = std::min(t1, b);
  }
  if (t0 > t1 || axis0 < 0) return;
  const double s = t0;
  if (!(s > 1e-9) || s >= best.s) return;
  best.s = s;
  best.prim = id;
  best.normal = Vec3::Zero();
  best.normal[axis0] = d[axis0] > 0.0 ? -1.0 : 1.0;
}

Hit trace(const SceneSpec& scene, const Vec3& o, const Vec3& d) {
  Hit best;
  for (std::size_t i = 0; i < scene.planes.size(); ++i) {
    hit_plane(scene.planes[i], static_cast<int>(i), o, d, best);
  }
  for (std::size_t i = 0; i < scene.boxes.size(); ++i) {
    hit_box(scene.boxes[i], static_cast<int>(scene.planes.size() + i), o, d, best);
  }
  return best;
}

double hit_intensity(const SceneSpec& scene, const Hit& h) {
  const int np = static_cast<int>(scene.planes.size());
  if (h.prim < np) return scene.planes[h.prim].intensity_at(h.su, h.sv);
  return scene.boxes[h.prim - np].intensity;
}

int count_steps(double lo, double hi, double step) {
  return static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
}

// Sliding-window minimum along one axis of a row-major grid.
std::vector<double> window_min(const std::vector<double>& src, int w, int h, int rad, bool rows) {
  std::vector<double> out(src.size(), kInf);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double m = kInf;
      for (int k = -rad; k <= rad; ++k) {
        const int xx = rows ? x + k : x, yy = rows ? y : y + k;
        if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
        m = std::min(m, src[static_cast<std::size_t>(yy) * w + xx]);
      }
      out[static_cast<std::size_t>(y) * w + x] = m;
    }
  }
  return out;
}

}  // namespace

double ScenePlane::intensity_at(double su, double sv) const {
  switch (pattern.kind) {
    case PatternKind::kUniform:
      return base_intensity;
    case PatternKind::kStripes: {
      const long k = static_cast<long>(std::floor(su / pattern.period));
      return (k % 2 == 0) ? pattern.low : pattern.high;
    }
    case PatternKind::kChecker: {
      const long k = static_cast<long>(std::floor(su / pattern.period)) +
                     static_cast<long>(std::floor(sv / pattern.period));
      return (k % 2 == 0) ? pattern.low : pattern.high;
    }
  }
  return base_intensity;
}

void SceneSpec::validate() const {
  for (const auto& p : planes) {
    const double lu = p.edge_u.norm(), lv = p.edge_v.norm();
    if (!(lu > 0.0) || !(lv > 0.0) || std::abs(p.edge_u.dot(p.edge_v)) > 1e-9 * lu * lv) {
      throw CalibError(ErrorCode::kInvalidArgument, "scene plane edges must be orthogonal");
    }
    if (p.base_intensity < 0.0 || p.pattern.low < 0.0 || p.pattern.high < 0.0 ||
        (p.pattern.kind != PatternKind::kUniform && !(p.pattern.period > 0.0))) {
      throw CalibError(ErrorCode::kInvalidArgument, "invalid plane intensity pattern");
    }
  }
  for (const auto& b : boxes) {
    if (!(b.min.array() < b.max.array()).all() || b.intensity < 0.0) {
      throw CalibError(ErrorCode::kInvalidArgument, "box needs min < max and intensity >= 0");
    }
  }
}

Vec3 bearing(double az, double el) {
  return Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
}

std::optional<RayHit> cast_ray(const SceneSpec& scene, const Vec3& origin, const Vec3& dir,
                               double max_range) {
  const Hit h = trace(scene, origin, dir);
  if (h.prim < 0 || h.s > max_range) return std::nullopt;
  return RayHit{h.s, hit_intensity(scene, h), h.normal, h.prim};
}

IntensityPointCloud raycast(const SceneSpec& scene, const LidarSpec& lidar, RaycastStats* stats) {
  scene.validate();
  if (!(lidar.az_step > 0.0) || !(lidar.el_step > 0.0) || lidar.beam_divergence < 0.0) {
    throw CalibError(ErrorCode::kInvalidArgument, "lidar steps must be > 0 and theta >= 0");
  }
  const int naz = count_steps(lidar.az_min, lidar.az_max, lidar.az_step);
  const int nel = count_steps(lidar.el_min, lidar.el_max, lidar.el_step);
  const std::size_t n = static_cast<std::size_t>(naz) * nel;
  const Vec3 origin = Vec3::Zero();

  std::vector<double> range(n, kInf), inten(n, 0.0);
  std::vector<Vec3> dirs(n);
  for (int r = 0; r < nel; ++r) {
    const double el = lidar.el_min + r * lidar.el_step;
    for (int c = 0; c < naz; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * naz + c;
      dirs[i] = bearing(lidar.az_min + c * lidar.az_step, el);
      const Hit h = trace(scene, origin, dirs[i]);
      if (h.prim >= 0 && h.s <= lidar.max_range) {
        range[i] = h.s;
        inten[i] = hit_intensity(scene, h);
      }
    }
  }

  // Only rays near a range discontinuity can have a nearer surface in the
  // footprint; the window covers the cone radius in raster steps.
  std::vector<std::uint8_t> candidate(n, 0);
  const double half = 0.5 * lidar.beam_divergence;
  if (lidar.inflation_enabled && half > 0.0) {
    const int rad =
        static_cast<int>(std::ceil(half / std::min(lidar.az_step, lidar.el_step))) + 1;
    const auto m = window_min(window_min(range, naz, nel, rad, true), naz, nel, rad, false);
    for (std::size_t i = 0; i < n; ++i) {
      candidate[i] = m[i] < range[i] - kForegroundGap;
    }
  }

  IntensityPointCloud cloud;
  cloud.points.reserve(n);
  RaycastStats st;
  st.rays = n;
  for (std::size_t i = 0; i < n; ++i) {
    double r = range[i];
    double it = inten[i];
    double r_bg = kInf;
    if (candidate[i]) {
      const Vec3& d = dirs[i];
      const auto [b1, b2] = tangent_basis(d);
      double best = kInf, best_int = 0.0;
      auto probe = [&](double ang, int k, int count) {
        const double phi = 2.0 * kPi * k / count;
        const Vec3 dir = (std::cos(ang) * d +
                          std::sin(ang) * (std::cos(phi) * b1 + std::sin(phi) * b2))
                             .normalized();
        const Hit h = trace(scene, origin, dir);
        if (h.prim >= 0 && h.s <= lidar.max_range && h.s < best) {
          best = h.s;
          best_int = hit_intensity(scene, h);
        }
      };
      for (int k = 0; k < kRimRays; ++k) probe(half, k, kRimRays);
      for (int k = 0; k < kInnerRays; ++k) probe(0.5 * half, k, kInnerRays);
      if (best < r - kForegroundGap) {
        r_bg = r;
        r = best;
        it = best_int;
        ++st.inflation;
      }
    }
    if (!std::isfinite(r)) continue;
    const std::uint64_t key = detail::mix_seed(lidar.seed, {static_cast<std::int64_t>(i)});
    const double noisy = r + lidar.range_noise * gaussian(key);
    cloud.points.push_back({noisy * dirs[i], it});
    if (lidar.bleeding_enabled && std::isfinite(r_bg)) {
      const double mid = 0.5 * (r + r_bg) + lidar.range_noise * gaussian(key ^ 0x5bd1e995ULL);
      cloud.points.push_back({mid * dirs[i], it});
      ++st.bleeding;
    }
  }
  if (stats) *stats = st;
  return cloud;
}

GrayImage render_camera(const SceneSpec& scene, const CameraIntrinsics& k,
                        const RigidTransform& t_gt) {
  scene.validate();
  k.validate();
  GrayImage img(k.width, k.height);
  const Mat3 rt = t_gt.rotation.matrix().transpose();
  const Vec3 origin = -rt * t_gt.translation;
  static const double kSub[2] = {-0.25, 0.25};
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      double acc = 0.0;
      for (double dv : kSub) {
        for (double du : kSub) {
          const Vec3 ray_c = unproject(Vec2(u + du, v + dv), k).normalized();
          const Vec3 dir = rt * ray_c;
          const Hit h = trace(scene, origin, dir);
          if (h.prim < 0) continue;
          const double shade =
              scene.ambient + (1.0 - scene.ambient) * std::abs(h.normal.dot(scene.light));
          acc += hit_intensity(scene, h) * shade;
        }
      }
      img.at(u, v) = static_cast<std::uint8_t>(std::clamp(std::lround(acc / 4.0), 0L, 255L));
    }
  }
  return img;
}

double GroundTruthEdge::distance(const Vec3& p) const {
  const Vec3 d = b - a;
  const double len2 = d.squaredNorm();
  const double s = len2 > 0.0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + s * d)).norm();
}

namespace {

struct Seg {
  Vec3 a, b;
};

std::array<Seg, 4> plane_borders(const ScenePlane& p) {
  const Vec3 c0 = p.corner, c1 = p.corner + p.edge_u, c2 = c1 + p.edge_v,
             c3 = p.corner + p.edge_v;
  return {Seg{c0, c1}, Seg{c1, c2}, Seg{c2, c3}, Seg{c3, c0}};
}

bool on_plane(const ScenePlane& p, const Vec3& x, double tol) {
  return std::abs(p.normal().dot(x - p.corner)) <= tol;
}

// Parameter interval of segment s inside the rectangle of p (s assumed to lie
// in p's plane).
bool clip_to_rect(const ScenePlane& p, const Seg& s, Seg& out) {
  double lo = 0.0, hi = 1.0;
  const Vec3 d = s.b - s.a;
  for (const Vec3* e : {&p.edge_u, &p.edge_v}) {
    const double l2 = e->squaredNorm();
    const double a0 = (s.a - p.corner).dot(*e) / l2;
    const double da = d.dot(*e) / l2;
    const double eps = 1e-9;
    if (std::abs(da) < 1e-15) {
      if (a0 < -eps || a0 > 1.0 + eps) return false;
      continue;
    }
    double t0 = (-eps - a0) / da, t1 = (1.0 + eps - a0) / da;
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
  }
  if (!(hi - lo > 1e-9)) return false;
  out = {s.a + lo * d, s.a + hi * d};
  return true;
}

bool same_segment(const GroundTruthEdge& e, const Seg& s) {
  const double tol = 1e-6;
  return ((e.a - s.a).norm() < tol && (e.b - s.b).norm() < tol) ||
         ((e.a - s.b).norm() < tol && (e.b - s.a).norm() < tol);
}

// True when most probes just outside the edge (along `outward`) see geometry
// clearly behind the edge.
bool backed(const SceneSpec& scene, const Seg& s, const Vec3& outward) {
  int yes = 0, total = 0;
  for (int i = 1; i <= 9; ++i) {
    const Vec3 p = s.a + (i / 10.0) * (s.b - s.a);
    const Vec3 probe = p + 0.01 * outward;
    const double dist = probe.norm();
    ++total;
    const Hit h = trace(scene, Vec3::Zero(), probe / dist);
    if (h.prim >= 0 && h.s > dist + 0.3) ++yes;
  }
  return 2 * yes > total;
}

}  // namespace

std::vector<GroundTruthEdge> ground_truth_edges(const SceneSpec& scene) {
  std::vector<GroundTruthEdge> out;
  auto add = [&](const Seg& s, EdgeClass c) {
    for (const auto& e : out) {
      if (same_segment(e, s)) return;
    }
    out.push_back({s.a, s.b, c});
  };
  const double tol = 1e-6;
  const auto& planes = scene.planes;
  for (std::size_t i = 0; i < planes.size(); ++i) {
    const auto borders = plane_borders(planes[i]);
    for (int bi = 0; bi < 4; ++bi) {
      const Seg& s = borders[bi];
      bool attached = false;
      for (std::size_t j = 0; j < planes.size(); ++j) {
        if (j == i) continue;
        if (!on_plane(planes[j], s.a, tol) || !on_plane(planes[j], s.b, tol)) continue;
        Seg clipped;
        if (!clip_to_rect(planes[j], s, clipped)) continue;
        attached = true;
        const bool parallel = std::abs(planes[i].normal().dot(planes[j].normal())) > 1.0 - 1e-9;
        if (!parallel) {
          add(clipped, EdgeClass::kDepthContinuous);
        } else {
          // Coplanar neighbor: an intensity edge when the reflectance differs.
          const Vec3 mid = 0.5 * (clipped.a + clipped.b);
          const Vec3 center_i = planes[i].corner + 0.5 * (planes[i].edge_u + planes[i].edge_v);
          const Vec3 into = (center_i - mid).normalized() * 1e-3;
          auto value = [&](const ScenePlane& p, const Vec3& x) {
            const Vec3 r = x - p.corner;
            return p.intensity_at(r.dot(p.edge_u.normalized()), r.dot(p.edge_v.normalized()));
          };
          if (value(planes[i], mid + into) != value(planes[j], mid - into)) {
            add(clipped, EdgeClass::kIntensityDiscontinuous);
          }
        }
      }
      if (!attached) {
        const Vec3 center = planes[i].corner + 0.5 * (planes[i].edge_u + planes[i].edge_v);
        const Vec3 mid = 0.5 * (s.a + s.b);
        const Vec3 dir = (s.b - s.a).normalized();
        Vec3 outward = mid - center;
        outward = (outward - outward.dot(dir) * dir).normalized();
        if (backed(scene, s, outward)) add(s, EdgeClass::kDepthDiscontinuous);
      }
    }
    // Pattern boundaries strictly inside the rectangle.
    const ScenePlane& p = planes[i];
    if (p.pattern.kind != PatternKind::kUniform) {
      const double lu = p.edge_u.norm(), lv = p.edge_v.norm();
      const Vec3 eu = p.edge_u / lu, ev = p.edge_v / lv;
      for (int k = 1; k * p.pattern.period < lu - 1e-9; ++k) {
        const Vec3 a = p.corner + k * p.pattern.period * eu;
        add({a, a + p.edge_v}, EdgeClass::kIntensityDiscontinuous);
      }
      if (p.pattern.kind == PatternKind::kChecker) {
        for (int k = 1; k * p.pattern.period < lv - 1e-9; ++k) {
          const Vec3 a = p.corner + k * p.pattern.period * ev;
          add({a, a + p.edge_u}, EdgeClass::kIntensityDiscontinuous);
        }
      }
    }
  }

  for (const auto& bx : scene.boxes) {
    for (int axis = 0; axis < 3; ++axis) {
      const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
      for (int s1 = 0; s1 < 2; ++s1) {
        for (int s2 = 0; s2 < 2; ++s2) {
          // Edge parallel to `axis`, between the faces normal to a1 and a2.
          Vec3 p0 = bx.min, p1 = bx.min;
          p0[a1] = p1[a1] = s1 ? bx.max[a1] : bx.min[a1];
          p0[a2] = p1[a2] = s2 ? bx.max[a2] : bx.min[a2];
          p1[axis] = bx.max[axis];
          Vec3 n1 = Vec3::Zero(), n2 = Vec3::Zero();
          n1[a1] = s1 ? 1.0 : -1.0;
          n2[a2] = s2 ? 1.0 : -1.0;
          const Vec3 mid = 0.5 * (p0 + p1);
          const bool f1 = n1.dot(mid) < 0.0, f2 = n2.dot(mid) < 0.0;
          if (!f1 && !f2) continue;
          if (f1 && f2) {
            add({p0, p1}, EdgeClass::kDepthContinuous);
            continue;
          }
          // Silhouette: step off the front face, away from the box.
          const Vec3 outward = f1 ? n2 : n1;
          if (backed(scene, {p0, p1}, outward)) add({p0, p1}, EdgeClass::kDepthDiscontinuous);
        }
      }
    }
  }
  return out;
}

std::string ground_truth_edges_to_json(const std::vector<GroundTruthEdge>& edges) {
  using nlohmann::json;
  json arr = json::array();
  for (const auto& e : edges) {
    arr.push_back({{"a", {e.a.x(), e.a.y(), e.a.z()}},
                   {"b", {e.b.x(), e.b.y(), e.b.z()}},
                   {"class", to_string(e.edge_class)}});
  }
  json j;
  j["edges"] = arr;
  return j.dump(2) + "\n";
}

RigidTransform perturb(const RigidTransform& t, double max_deg, double max_cm,
                       std::uint64_t seed) {
  std::mt19937_64 rng(detail::mix_seed(seed, {0x70657274}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec3 axis(normal(rng), normal(rng), normal(rng));
  axis.normalize();
  Vec3 dir(normal(rng), normal(rng), normal(rng));
  dir.normalize();
  const double angle = deg2rad(max_deg) * unit(rng);
  const double dist = 0.01 * max_cm * unit(rng);
  RigidTransform out;
  out.rotation = exp_so3(angle * axis) * t.rotation;
  out.translation = t.translation + dist * dir;
  return out;
}

}  // namespace edgecalib
