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

#ifndef EDGECALIB_SIMULATOR_HPP_
#define EDGECALIB_SIMULATOR_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edgecalib/edge_types.hpp"
#include "edgecalib/geometry.hpp"
#include "edgecalib/io.hpp"
#include "edgecalib/planar_edges.hpp"

namespace edgecalib {

enum class PatternKind { kUniform, kStripes, kChecker };

/// Reflectance pattern in the plane's (u, v) metric coordinates. Stripes
/// alternate along u (boundaries parallel to v), starting with `low`.
struct IntensityPattern {
  PatternKind kind = PatternKind::kUniform;
  double period = 1.0;  // m, stripe width or checker cell size
  double low = 0.0;
  double high = 255.0;
};

/// Rectangle corner + a edge_u + b edge_v, a, b in [0, 1].
struct ScenePlane {
  Vec3 corner = Vec3::Zero();
  Vec3 edge_u = Vec3::UnitX();
  Vec3 edge_v = Vec3::UnitY();
  double base_intensity = 100.0;
  IntensityPattern pattern;

  Vec3 normal() const { return edge_u.cross(edge_v).normalized(); }
  double intensity_at(double s_u, double s_v) const;  // metric plane coordinates
};

struct SceneBox {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Ones();
  double intensity = 100.0;
};

/// Scene in the LiDAR frame (x forward, y left, z up).
struct SceneSpec {
  std::vector<ScenePlane> planes;
  std::vector<SceneBox> boxes;
  double ambient = 1.0;  // camera shading: ambient + (1 - ambient) |n . light|
  Vec3 light = Vec3(-0.6, 0.5, 0.62).normalized();

  /// Throws kInvalidArgument on non-orthogonal plane edges, inverted boxes or
  /// negative intensities.
  void validate() const;
};

struct LidarSpec {
  double az_min = -0.5, az_max = 0.5;  // rad
  double el_min = -0.4, el_max = 0.4;  // rad
  double az_step = 0.001, el_step = 0.001;
  double beam_divergence = 0.0028;  // rad, full cone angle
  double range_noise = 0.0;         // m
  bool inflation_enabled = true;
  bool bleeding_enabled = false;
  double max_range = 100.0;
  std::uint64_t seed = 0;
};

struct RayHit {
  double range = 0.0;
  double intensity = 0.0;
  Vec3 normal = Vec3::Zero();
  int primitive = -1;  // planes first, then boxes
};

/// Nearest intersection along origin + s dir (dir unit), s > 1e-9.
std::optional<RayHit> cast_ray(const SceneSpec& scene, const Vec3& origin, const Vec3& dir,
                               double max_range = 1e9);

Vec3 bearing(double az, double el);

struct RaycastStats {
  std::size_t rays = 0;
  std::size_t inflation = 0;
  std::size_t bleeding = 0;
};

/// Regular az/el raster. Inflation: when a nearer surface lies inside the
/// footprint cone (half-angle theta / 2) but the centerline hits something
/// farther (or nothing), the foreground range and intensity are returned along
/// the centerline.
IntensityPointCloud raycast(const SceneSpec& scene, const LidarSpec& lidar,
                            RaycastStats* stats = nullptr);

/// 2x2 supersampled rendering through the distorted camera at extrinsic
/// t_gt (LiDAR to camera). No hit renders 0.
GrayImage render_camera(const SceneSpec& scene, const CameraIntrinsics& k,
                        const RigidTransform& t_gt);

struct GroundTruthEdge {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  EdgeClass edge_class = EdgeClass::kDepthContinuous;

  double length() const { return (b - a).norm(); }
  Vec3 direction() const { return (b - a).normalized(); }
  /// Euclidean distance from p to the segment.
  double distance(const Vec3& p) const;
};

/// Edges as seen from the LiDAR origin.
std::vector<GroundTruthEdge> ground_truth_edges(const SceneSpec& scene);

std::string ground_truth_edges_to_json(const std::vector<GroundTruthEdge>& edges);

struct BenchmarkScene {
  std::string kind;
  SceneSpec scene;
  LidarSpec lidar;
  CameraIntrinsics intrinsics;
  RigidTransform t_gt;
};

/// kind in {corner_room, box_wall, stripes, mixed}; throws kUnknownScene.
BenchmarkScene make_benchmark_scene(const std::string& kind, std::uint64_t seed);

/// Rotation by an angle uniform in [0, max_deg] about a random axis (applied
/// on the left) and a translation offset of norm uniform in [0, max_cm].
RigidTransform perturb(const RigidTransform& t, double max_deg, double max_cm,
                       std::uint64_t seed);

}  // namespace edgecalib

#endif  // EDGECALIB_SIMULATOR_HPP_
