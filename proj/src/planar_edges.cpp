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

#include "edgecalib/planar_edges.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <random>
#include <tuple>
#include <unordered_map>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "edgecalib/errors.hpp"
#include "rng.hpp"

namespace edgecalib {
namespace {

constexpr std::size_t kScoreSamples = 1000;

void orient_toward_origin(Vec3& n, double& d) {
  if (d > 0.0 || (d == 0.0 && (n.x() < 0.0 || (n.x() == 0.0 && (n.y() < 0.0 ||
                                                                (n.y() == 0.0 && n.z() < 0.0)))))) {
    n = -n;
    d = -d;
  }
}

double sse(const Vec3& n, double d, const std::vector<Vec3>& pts,
           const std::vector<std::size_t>& subset) {
  double acc = 0.0;
  for (std::size_t i : subset) {
    const double r = n.dot(pts[i]) - d;
    acc += r * r;
  }
  return acc;
}

}  // namespace

VoxelKey voxel_key(const Vec3& p, double voxel_size) {
  return {static_cast<int>(std::floor(p.x() / voxel_size)),
          static_cast<int>(std::floor(p.y() / voxel_size)),
          static_cast<int>(std::floor(p.z() / voxel_size))};
}

VoxelGrid voxelize(const IntensityPointCloud& cloud, double voxel_size) {
  if (!(voxel_size > 0.0)) throw CalibError(ErrorCode::kInvalidArgument, "voxel_size must be > 0");
  VoxelGrid grid;
  grid.voxel_size = voxel_size;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    grid.cells[voxel_key(cloud.points[i].position, voxel_size)].push_back(i);
  }
  return grid;
}

PlanePatch fit_plane_lsq(const std::vector<Vec3>& points, const std::vector<std::size_t>& subset) {
  PlanePatch p;
  Vec3 c = Vec3::Zero();
  for (std::size_t i : subset) c += points[i];
  c /= static_cast<double>(subset.size());
  Mat3 s = Mat3::Zero();
  for (std::size_t i : subset) {
    const Vec3 r = points[i] - c;
    s += r * r.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(s);
  p.normal = es.eigenvectors().col(0).normalized();
  p.d = p.normal.dot(c);
  p.centroid = c;
  orient_toward_origin(p.normal, p.d);
  return p;
}

std::vector<PlanePatch> fit_planes(const std::vector<Vec3>& points, const PlaneFitParams& params,
                                   std::uint64_t seed) {
  std::vector<PlanePatch> out;
  const std::size_t min_inliers = static_cast<std::size_t>(std::max(params.min_inliers, 3));
  std::vector<std::size_t> remaining(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) remaining[i] = i;

  for (int round = 0; round < params.max_planes && remaining.size() >= min_inliers; ++round) {
    std::mt19937_64 rng(detail::mix_seed(seed, {round}));
    std::uniform_int_distribution<std::size_t> pick(0, remaining.size() - 1);
    const std::size_t stride = (remaining.size() + kScoreSamples - 1) / kScoreSamples;
    std::vector<std::size_t> scoring;
    for (std::size_t i = 0; i < remaining.size(); i += stride) scoring.push_back(remaining[i]);

    Vec3 best_n = Vec3::Zero();
    double best_d = 0.0;
    std::size_t best_count = 0;
    long needed = params.max_trials;
    for (long trial = 0; trial < needed && trial < params.max_trials; ++trial) {
      const std::size_t i0 = pick(rng);
      std::size_t i1 = pick(rng);
      std::size_t i2 = pick(rng);
      if (i0 == i1 || i0 == i2 || i1 == i2) continue;
      const Vec3& a = points[remaining[i0]];
      const Vec3 cr = (points[remaining[i1]] - a).cross(points[remaining[i2]] - a);
      const double len = cr.norm();
      if (!(len > 1e-12)) continue;
      const Vec3 n = cr / len;
      const double d = n.dot(a);
      std::size_t count = 0;
      for (std::size_t j : scoring) {
        if (std::abs(n.dot(points[j]) - d) <= params.inlier_threshold) ++count;
      }
      if (count > best_count) {
        best_count = count;
        best_n = n;
        best_d = d;
        const double w = static_cast<double>(count) / static_cast<double>(scoring.size());
        const double p_fail = 1.0 - w * w * w;
        if (p_fail <= 0.0) {
          needed = trial + 1;
        } else {
          const double n_req = std::log(1.0 - params.confidence) / std::log(p_fail);
          needed = std::min<long>(params.max_trials, static_cast<long>(std::ceil(n_req)));
        }
      }
    }
    if (best_count == 0) break;

    std::vector<std::size_t> cand;
    for (std::size_t j : remaining) {
      if (std::abs(best_n.dot(points[j]) - best_d) <= params.inlier_threshold) cand.push_back(j);
    }
    if (cand.size() < min_inliers) break;

    PlanePatch patch = fit_plane_lsq(points, cand);
    patch.sse_candidate = sse(best_n, best_d, points, cand);
    patch.sse_refined = sse(patch.normal, patch.d, points, cand);
    if (patch.sse_refined > patch.sse_candidate) {
      // Degenerate numerics only; keep the candidate so refinement never loses.
      patch.normal = best_n;
      patch.d = best_d;
      orient_toward_origin(patch.normal, patch.d);
      patch.sse_refined = patch.sse_candidate;
    }
    for (std::size_t j : remaining) {
      if (std::abs(patch.distance(points[j])) <= params.inlier_threshold) {
        patch.inliers.push_back(j);
      }
    }
    if (patch.inliers.size() < min_inliers) break;
    Vec3 c = Vec3::Zero();
    for (std::size_t j : patch.inliers) c += points[j];
    patch.centroid = c / static_cast<double>(patch.inliers.size());

    std::vector<std::size_t> rest;
    rest.reserve(remaining.size() - patch.inliers.size());
    std::set_difference(remaining.begin(), remaining.end(), patch.inliers.begin(),
                        patch.inliers.end(), std::back_inserter(rest));
    remaining.swap(rest);
    out.push_back(std::move(patch));
  }

  // Points near a crease are inliers of both planes and tilt each fit toward
  // the other; refit from the unambiguous inliers only.
  if (out.size() >= 2) {
    std::vector<std::pair<Vec3, double>> refit(out.size());
    for (std::size_t p = 0; p < out.size(); ++p) {
      std::vector<std::size_t> clean;
      for (std::size_t j : out[p].inliers) {
        bool ambiguous = false;
        for (std::size_t q = 0; q < out.size() && !ambiguous; ++q) {
          ambiguous = q != p && std::abs(out[q].distance(points[j])) <= params.inlier_threshold;
        }
        if (!ambiguous) clean.push_back(j);
      }
      refit[p] = {out[p].normal, out[p].d};
      if (clean.size() >= min_inliers) {
        const PlanePatch f = fit_plane_lsq(points, clean);
        refit[p] = {f.normal, f.d};
      }
    }
    for (std::size_t p = 0; p < out.size(); ++p) {
      out[p].normal = refit[p].first;
      out[p].d = refit[p].second;
    }
  }
  return out;
}

IntersectResult intersect_planes(const PlanePatch& a, const std::vector<Vec3>& pts_a,
                                 const PlanePatch& b, const std::vector<Vec3>& pts_b,
                                 const IntersectParams& params) {
  IntersectResult res;
  const double angle = rad2deg(std::acos(std::clamp(a.normal.dot(b.normal), -1.0, 1.0)));
  if (angle < params.min_angle_deg) {
    res.reason = IntersectRejection::kNearParallel;
    return res;
  }
  if (angle > params.max_angle_deg) {
    res.reason = IntersectRejection::kGrazing;
    return res;
  }
  Vec3 dir = a.normal.cross(b.normal).normalized();
  for (int i = 0; i < 3; ++i) {
    if (dir[i] != 0.0) {
      if (dir[i] < 0.0) dir = -dir;
      break;
    }
  }
  Mat3 m;
  m.row(0) = a.normal.transpose();
  m.row(1) = b.normal.transpose();
  m.row(2) = dir.transpose();
  const Vec3 origin = m.partialPivLu().solve(Vec3(a.d, b.d, 0.0));

  auto support = [&](const PlanePatch& p, const std::vector<Vec3>& pts, double& lo, double& hi) {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    int count = 0;
    const double lim2 = params.support_distance * params.support_distance;
    for (std::size_t i : p.inliers) {
      const Vec3 r = pts[i] - origin;
      const double s = dir.dot(r);
      if ((r - s * dir).squaredNorm() <= lim2) {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
        ++count;
      }
    }
    return count >= 2;
  };
  double a_lo, a_hi, b_lo, b_hi;
  const bool sa = support(a, pts_a, a_lo, a_hi);
  const bool sb = support(b, pts_b, b_lo, b_hi);
  const double lo = std::max(a_lo, b_lo), hi = std::min(a_hi, b_hi);
  if (!sa || !sb || !(lo < hi)) {
    res.reason = IntersectRejection::kDisjointExtent;
    return res;
  }
  EdgeSegment3D seg;
  seg.origin = origin;
  seg.direction = dir;
  seg.s_min = lo;
  seg.s_max = hi;
  seg.normal_a = a.normal;
  seg.normal_b = b.normal;
  seg.d_a = a.d;
  seg.d_b = b.d;
  const int n = static_cast<int>(std::floor((hi - lo) / params.sample_step));
  for (int i = 0; i <= n; ++i) seg.samples.push_back(seg.at(lo + i * params.sample_step));
  res.segment = std::move(seg);
  return res;
}

PlanarExtraction extract_depth_continuous(const IntensityPointCloud& cloud,
                                          const CalibConfig& config) {
  PlanarExtraction out;
  const VoxelGrid grid = voxelize(cloud, config.voxel_size);
  out.diagnostics.voxels = grid.cells.size();

  PlaneFitParams fit;
  fit.inlier_threshold = config.plane_inlier_threshold;
  fit.min_inliers = config.plane_min_inliers;
  fit.max_planes = config.max_planes_per_voxel;
  fit.max_trials = config.ransac_max_trials;
  fit.confidence = config.ransac_confidence;

  struct CellPlanes {
    std::vector<Vec3> points;
    std::vector<PlanePatch> planes;
  };
  std::map<VoxelKey, CellPlanes> cells;
  for (const auto& [key, idx] : grid.cells) {
    if (idx.size() < static_cast<std::size_t>(fit.min_inliers)) continue;
    CellPlanes cp;
    cp.points.reserve(idx.size());
    for (std::size_t i : idx) cp.points.push_back(cloud.points[i].position);
    cp.planes = fit_planes(cp.points, fit, detail::mix_seed(config.seed, {key.x, key.y, key.z}));
    out.diagnostics.planes += cp.planes.size();
    if (!cp.planes.empty()) cells.emplace(key, std::move(cp));
  }

  IntersectParams ip;
  ip.min_angle_deg = config.min_dihedral_deg;
  ip.max_angle_deg = config.max_dihedral_deg;
  ip.support_distance = config.edge_support_distance;
  ip.sample_step = config.edge_sample_step;

  auto try_pair = [&](const CellPlanes& ca, std::size_t ia, const CellPlanes& cb, std::size_t ib) {
    ++out.diagnostics.pairs_tested;
    auto r = intersect_planes(ca.planes[ia], ca.points, cb.planes[ib], cb.points, ip);
    switch (r.reason) {
      case IntersectRejection::kNearParallel:
        ++out.diagnostics.rejected_near_parallel;
        break;
      case IntersectRejection::kGrazing:
        ++out.diagnostics.rejected_grazing;
        break;
      case IntersectRejection::kDisjointExtent:
        ++out.diagnostics.rejected_disjoint;
        break;
      case IntersectRejection::kNone:
        out.segments.push_back(std::move(*r.segment));
        break;
    }
  };
  for (const auto& [key, ca] : cells) {
    for (std::size_t i = 0; i < ca.planes.size(); ++i) {
      for (std::size_t j = i + 1; j < ca.planes.size(); ++j) try_pair(ca, i, ca, j);
    }
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -1; dz <= 1; ++dz) {
          const VoxelKey nk{key.x + dx, key.y + dy, key.z + dz};
          if (!(key < nk)) continue;
          const auto it = cells.find(nk);
          if (it == cells.end()) continue;
          for (std::size_t i = 0; i < ca.planes.size(); ++i) {
            for (std::size_t j = 0; j < it->second.planes.size(); ++j) {
              try_pair(ca, i, it->second, j);
            }
          }
        }
      }
    }
  }
  out.diagnostics.segments = out.segments.size();

  // Overlapping segments from neighboring cell pairs describe the same edge;
  // keep one sample per half-step neighborhood.
  const double cell = 0.5 * config.edge_sample_step;
  const double lim2 = cell * cell;
  std::map<std::tuple<long, long, long>, std::vector<Vec3>> kept;
  NoiseModel noise{config.range_sigma, config.bearing_sigma, config.camera_sigma};
  for (const auto& seg : out.segments) {
    for (const Vec3& s : seg.samples) {
      const long kx = static_cast<long>(std::floor(s.x() / cell));
      const long ky = static_cast<long>(std::floor(s.y() / cell));
      const long kz = static_cast<long>(std::floor(s.z() / cell));
      bool dup = false;
      for (long x = kx - 1; x <= kx + 1 && !dup; ++x) {
        for (long y = ky - 1; y <= ky + 1 && !dup; ++y) {
          for (long z = kz - 1; z <= kz + 1 && !dup; ++z) {
            const auto it = kept.find({x, y, z});
            if (it == kept.end()) continue;
            for (const Vec3& q : it->second) {
              if ((q - s).squaredNorm() < lim2) {
                dup = true;
                break;
              }
            }
          }
        }
      }
      if (dup || !(s.norm() > 0.0)) continue;
      kept[{kx, ky, kz}].push_back(s);
      EdgePoint3D e;
      e.position = s;
      e.edge_class = EdgeClass::kDepthContinuous;
      e.covariance = point_covariance(s, noise);
      out.edges.push_back(e);
    }
  }
  out.diagnostics.samples = out.edges.size();
  return out;
}

}  // namespace edgecalib
