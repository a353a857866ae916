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

#ifndef EDGECALIB_PLANAR_EDGES_HPP_
#define EDGECALIB_PLANAR_EDGES_HPP_

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edgecalib/config.hpp"
#include "edgecalib/edge_types.hpp"
#include "edgecalib/io.hpp"

namespace edgecalib {

struct VoxelKey {
  int x = 0, y = 0, z = 0;
  auto operator<=>(const VoxelKey&) const = default;
};

/// Cell index is floor(coordinate / voxel_size) per axis.
struct VoxelGrid {
  double voxel_size = 1.0;
  std::map<VoxelKey, std::vector<std::size_t>> cells;
};

VoxelKey voxel_key(const Vec3& p, double voxel_size);
VoxelGrid voxelize(const IntensityPointCloud& cloud, double voxel_size);

/// Plane n^T x = d, normal oriented toward the sensor origin.
struct PlanePatch {
  Vec3 normal = Vec3::UnitZ();
  double d = 0.0;
  std::vector<std::size_t> inliers;  // indices into the points passed to fit_planes
  Vec3 centroid = Vec3::Zero();
  double sse_candidate = 0.0;  // sum of squared distances of the RANSAC inliers, candidate plane
  double sse_refined = 0.0;    // same point set, least-squares plane

  double distance(const Vec3& p) const { return normal.dot(p) - d; }
};

struct PlaneFitParams {
  double inlier_threshold = 0.02;
  int min_inliers = 50;
  int max_planes = 3;
  int max_trials = 200;
  double confidence = 0.99;
};

/// Sequential RANSAC with least-squares refinement. Deterministic in `seed`.
/// When several planes are found, each is finally refit from the inliers that
/// lie outside every other plane's band; `inliers` and the SSE fields keep
/// describing the RANSAC stage.
std::vector<PlanePatch> fit_planes(const std::vector<Vec3>& points, const PlaneFitParams& params,
                                   std::uint64_t seed);

/// Least-squares plane through the points (smallest scatter eigenvector).
PlanePatch fit_plane_lsq(const std::vector<Vec3>& points, const std::vector<std::size_t>& subset);

struct EdgeSegment3D {
  Vec3 origin = Vec3::Zero();  // point of the line closest to the sensor origin
  Vec3 direction = Vec3::UnitZ();
  double s_min = 0.0, s_max = 0.0;
  std::vector<Vec3> samples;
  // Parent planes.
  Vec3 normal_a = Vec3::Zero(), normal_b = Vec3::Zero();
  double d_a = 0.0, d_b = 0.0;

  Vec3 at(double s) const { return origin + s * direction; }
};

enum class IntersectRejection { kNone, kNearParallel, kGrazing, kDisjointExtent };

struct IntersectResult {
  std::optional<EdgeSegment3D> segment;
  IntersectRejection reason = IntersectRejection::kNone;
};

struct IntersectParams {
  double min_angle_deg = 30.0;
  double max_angle_deg = 150.0;
  double support_distance = 0.05;  // inliers this close to the line bound the extent
  double sample_step = 0.02;
};

/// `pts_a` / `pts_b` resolve the inlier indices of each patch.
IntersectResult intersect_planes(const PlanePatch& a, const std::vector<Vec3>& pts_a,
                                 const PlanePatch& b, const std::vector<Vec3>& pts_b,
                                 const IntersectParams& params);

struct PlanarDiagnostics {
  std::size_t voxels = 0;
  std::size_t planes = 0;
  std::size_t pairs_tested = 0;
  std::size_t rejected_near_parallel = 0;
  std::size_t rejected_grazing = 0;
  std::size_t rejected_disjoint = 0;
  std::size_t segments = 0;
  std::size_t samples = 0;
};

struct PlanarExtraction {
  std::vector<EdgePoint3D> edges;
  std::vector<EdgeSegment3D> segments;
  PlanarDiagnostics diagnostics;
};

PlanarExtraction extract_depth_continuous(const IntensityPointCloud& cloud,
                                          const CalibConfig& config);

}  // namespace edgecalib

#endif  // EDGECALIB_PLANAR_EDGES_HPP_
