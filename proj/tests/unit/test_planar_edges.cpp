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

#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "edgecalib/planar_edges.hpp"
#include "edgecalib/simulator.hpp"
#include "support.hpp"

namespace edgecalib {
namespace {

using testing::Gen;

IntensityPointCloud cloud_of(const std::vector<Vec3>& pts) {
  IntensityPointCloud c;
  for (const auto& p : pts) c.points.push_back({p, 100.0});
  return c;
}

TEST(Voxelize, TwoCells) {
  const VoxelGrid g = voxelize(cloud_of({{0.1, 0.1, 0.1}, {1.1, 0.1, 0.1}}), 1.0);
  ASSERT_EQ(g.cells.size(), 2u);
  EXPECT_EQ(g.cells.at(VoxelKey{0, 0, 0}), std::vector<std::size_t>{0});
  EXPECT_EQ(g.cells.at(VoxelKey{1, 0, 0}), std::vector<std::size_t>{1});
}

TEST(Voxelize, BoundaryFloorsUp) {
  const VoxelGrid g = voxelize(cloud_of({{1.0, 0.0, 0.0}, {-0.0, -1e-12, 0.5}}), 1.0);
  EXPECT_EQ(g.cells.count(VoxelKey{1, 0, 0}), 1u);
  EXPECT_EQ(g.cells.count(VoxelKey{0, -1, 0}), 1u);
}

TEST(Voxelize, MatchesHistogramOracle) {
  Gen g(1);
  std::vector<Vec3> pts;
  for (int i = 0; i < 10000; ++i) pts.push_back(g.vec3(0.0, 10.0));
  const VoxelGrid grid = voxelize(cloud_of(pts), 1.0);
  std::map<VoxelKey, std::size_t> hist;
  for (const auto& p : pts) {
    ++hist[VoxelKey{static_cast<int>(p.x()), static_cast<int>(p.y()), static_cast<int>(p.z())}];
  }
  ASSERT_EQ(grid.cells.size(), hist.size());
  std::size_t total = 0;
  std::vector<int> seen(pts.size(), 0);
  for (const auto& [key, idx] : grid.cells) {
    EXPECT_EQ(idx.size(), hist.at(key));
    total += idx.size();
    for (std::size_t i : idx) ++seen[i];
  }
  EXPECT_EQ(total, pts.size());
  for (int s : seen) EXPECT_EQ(s, 1) << "partition must be disjoint and exhaustive";
}

TEST(FitPlanes, NoisyHorizontalPlane) {
  Gen g(2);
  std::normal_distribution<double> noise(0.0, 0.002);
  std::vector<Vec3> pts;
  for (int i = 0; i < 200; ++i) {
    pts.emplace_back(g.uniform(0, 1), g.uniform(0, 1), noise(g.engine()));
  }
  PlaneFitParams p;
  p.inlier_threshold = 0.01;
  const auto planes = fit_planes(pts, p, 0);
  ASSERT_EQ(planes.size(), 1u);
  const double angle = rad2deg(std::acos(std::abs(planes[0].normal.dot(Vec3::UnitZ()))));
  EXPECT_LE(angle, 0.5);
}

TEST(FitPlanes, MinimalSampleIsExact) {
  const std::vector<Vec3> pts{{1, 0, 2}, {0, 1, 2}, {1, 1, 2}};
  PlaneFitParams p;
  p.min_inliers = 3;
  const auto planes = fit_planes(pts, p, 0);
  ASSERT_EQ(planes.size(), 1u);
  EXPECT_LT((planes[0].normal - Vec3(0, 0, -1)).norm(), 1e-12) << "faces the sensor";
  EXPECT_NEAR(planes[0].d, -2.0, 1e-12);
  EXPECT_EQ(planes[0].inliers.size(), 3u);
}

TEST(FitPlanes, BallHasNoLargePlane) {
  Gen g(3);
  std::vector<Vec3> pts;
  while (pts.size() < 100) {
    const Vec3 p = g.vec3(-1, 1);
    if (p.norm() <= 1.0) pts.push_back(p);
  }
  PlaneFitParams p;
  p.min_inliers = 80;
  p.max_trials = 100000;
  EXPECT_TRUE(fit_planes(pts, p, 0).empty());
  // Exhaustive oracle: no plane through any point triple reaches 80 inliers.
  std::size_t best = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      for (std::size_t k = j + 1; k < pts.size(); ++k) {
        const Vec3 n = (pts[j] - pts[i]).cross(pts[k] - pts[i]);
        if (n.norm() < 1e-12) continue;
        const Vec3 u = n.normalized();
        std::size_t c = 0;
        for (const auto& q : pts) c += std::abs(u.dot(q - pts[i])) <= p.inlier_threshold;
        best = std::max(best, c);
      }
    }
  }
  EXPECT_LT(best, 80u);
}

std::vector<Vec3> box_corner_points(Gen& g, double noise) {
  // Two or three faces of a corner inside one cell, with noise.
  std::normal_distribution<double> n(0.0, noise);
  std::vector<Vec3> pts;
  for (int i = 0; i < 300; ++i) pts.emplace_back(3.0 + n(g.engine()), g.uniform(0, 1), g.uniform(0, 1));
  for (int i = 0; i < 300; ++i) pts.emplace_back(g.uniform(2, 3), 1.0 + n(g.engine()), g.uniform(0, 1));
  for (int i = 0; i < 200; ++i) pts.emplace_back(g.uniform(2, 3), g.uniform(0, 1), n(g.engine()));
  return pts;
}

TEST(FitPlanes, PropertyInvariants) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Gen g(seed);
    const auto pts = box_corner_points(g, g.uniform(0.0, 0.006));
    PlaneFitParams p;
    const auto planes = fit_planes(pts, p, seed);
    ASSERT_FALSE(planes.empty());
    std::vector<int> owner(pts.size(), 0);
    for (const auto& pl : planes) {
      EXPECT_NEAR(pl.normal.norm(), 1.0, 1e-9);
      EXPECT_GE(static_cast<int>(pl.inliers.size()), p.min_inliers);
      EXPECT_LE(pl.sse_refined, pl.sse_candidate * (1.0 + 1e-12) + 1e-18);
      EXPECT_LE(pl.d, 0.0) << "normal faces the origin";
      for (std::size_t i : pl.inliers) ++owner[i];
    }
    for (int o : owner) EXPECT_LE(o, 1) << "sequential RANSAC removes inliers";
    EXPECT_LE(planes.size(), 3u);
  }
}

TEST(FitPlanes, DeterministicInSeed) {
  Gen g(5);
  const auto pts = box_corner_points(g, 0.003);
  const auto a = fit_planes(pts, PlaneFitParams{}, 42);
  const auto b = fit_planes(pts, PlaneFitParams{}, 42);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].normal, b[i].normal);
    EXPECT_EQ(a[i].d, b[i].d);
    EXPECT_EQ(a[i].inliers, b[i].inliers);
  }
}

PlanePatch patch_from(const std::vector<Vec3>& pts) {
  std::vector<std::size_t> all(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) all[i] = i;
  PlanePatch p = fit_plane_lsq(pts, all);
  p.inliers = all;
  return p;
}

TEST(IntersectPlanes, CoordinatePlanes) {
  std::vector<Vec3> a, b;
  for (int i = 0; i <= 10; ++i) {
    for (int j = -10; j <= 10; ++j) {
      a.emplace_back(0.0, 0.1 * i, 0.1 * j);  // x = 0, y >= 0
      b.emplace_back(0.1 * i, 0.0, 0.1 * j);  // y = 0, x >= 0
    }
  }
  const PlanePatch pa = patch_from(a), pb = patch_from(b);
  const auto r = intersect_planes(pa, a, pb, b, IntersectParams{});
  ASSERT_TRUE(r.segment) << static_cast<int>(r.reason);
  const auto& s = *r.segment;
  EXPECT_LT(std::abs(std::abs(s.direction.z()) - 1.0), 1e-12);
  EXPECT_LT(s.origin.norm(), 1e-9);
  EXPECT_NEAR(s.s_min, -1.0, 1e-9);
  EXPECT_NEAR(s.s_max, 1.0, 1e-9);
  EXPECT_EQ(s.samples.size(), 101u);
}

TEST(IntersectPlanes, NearParallelIsRejected) {
  std::vector<Vec3> a, b;
  const Vec3 n2(std::sin(deg2rad(2.0)), 0, std::cos(deg2rad(2.0)));
  const Vec3 u2 = Vec3::UnitY().cross(n2);
  for (int i = -5; i <= 5; ++i) {
    for (int j = -5; j <= 5; ++j) {
      a.emplace_back(0.1 * i, 0.1 * j, 0.0);
      b.push_back(0.1 * i * u2 + 0.1 * j * Vec3::UnitY());
    }
  }
  const auto r = intersect_planes(patch_from(a), a, patch_from(b), b, IntersectParams{});
  EXPECT_FALSE(r.segment);
  EXPECT_EQ(r.reason, IntersectRejection::kNearParallel);
}

TEST(IntersectPlanes, DisjointExtentsAreRejected) {
  std::vector<Vec3> a, b;
  for (int i = 0; i <= 10; ++i) {
    for (int j = 0; j <= 10; ++j) {
      a.emplace_back(0.0, 0.1 * i, 0.1 * j);        // z in [0, 1]
      b.emplace_back(0.1 * i, 0.0, 2.0 + 0.1 * j);  // z in [2, 3]
    }
  }
  const auto r = intersect_planes(patch_from(a), a, patch_from(b), b, IntersectParams{});
  EXPECT_FALSE(r.segment);
  EXPECT_EQ(r.reason, IntersectRejection::kDisjointExtent);
}

// Back wall, left wall and floor of a room, as seen from the origin.
SceneSpec room_corner() {
  SceneSpec s;
  ScenePlane back, left, floor;
  back.corner = Vec3(4.0, 2.0, -1.2);
  back.edge_u = Vec3(0, -4.0, 0);
  back.edge_v = Vec3(0, 0, 2.7);
  left.corner = Vec3(0.5, 2.0, -1.2);
  left.edge_u = Vec3(3.5, 0, 0);
  left.edge_v = Vec3(0, 0, 2.7);
  floor.corner = Vec3(0.5, 2.0, -1.2);
  floor.edge_u = Vec3(3.5, 0, 0);
  floor.edge_v = Vec3(0, -4.0, 0);
  s.planes = {back, left, floor};
  return s;
}

LidarSpec room_lidar(double noise) {
  LidarSpec l;
  l.az_min = -0.2;
  l.az_max = 0.9;
  l.el_min = -0.6;
  l.el_max = 0.3;
  l.az_step = l.el_step = 0.002;
  l.range_noise = noise;
  l.beam_divergence = 0.0;
  l.inflation_enabled = false;
  return l;
}

TEST(ExtractDepthContinuous, RoomCornerRecoversThreeLines) {
  const SceneSpec scene = room_corner();
  const auto gt = ground_truth_edges(scene);
  const auto cloud = raycast(scene, room_lidar(0.001));
  const PlanarExtraction ex = extract_depth_continuous(cloud, CalibConfig{});
  ASSERT_FALSE(ex.segments.empty());
  std::vector<int> covered(gt.size(), 0);
  for (const auto& s : ex.segments) {
    bool matched = false;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      const double off = std::max(testing::line_distance(gt[i], s.at(s.s_min)),
                                  testing::line_distance(gt[i], s.at(s.s_max)));
      const double ang =
          rad2deg(std::acos(std::min(1.0, std::abs(gt[i].direction().dot(s.direction)))));
      if (off <= 0.005 && ang <= 0.5) {
        matched = true;
        ++covered[i];
      }
    }
    EXPECT_TRUE(matched) << "segment not on any true corner line";
  }
  int lines = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i].edge_class == EdgeClass::kDepthContinuous && covered[i] > 0) ++lines;
  }
  EXPECT_EQ(lines, 3);
}

TEST(ExtractDepthContinuous, SinglePlaneIsEmpty) {
  SceneSpec s;
  ScenePlane wall;
  wall.corner = Vec3(4.0, 3.0, -2.0);
  wall.edge_u = Vec3(0, -6.0, 0);
  wall.edge_v = Vec3(0, 0, 4.0);
  s.planes = {wall};
  const PlanarExtraction ex = extract_depth_continuous(raycast(s, room_lidar(0.001)), CalibConfig{});
  EXPECT_TRUE(ex.edges.empty());
  EXPECT_TRUE(ex.segments.empty());
  EXPECT_GT(ex.diagnostics.voxels, 0u);
  EXPECT_GT(ex.diagnostics.planes, 0u);
}

TEST(ExtractDepthContinuous, PropertySegmentInvariants) {
  const auto& b = testing::bundle("corner_room", 0);
  const CalibConfig cfg;
  const PlanarExtraction ex = extract_depth_continuous(b.cloud, cfg);
  ASSERT_FALSE(ex.segments.empty());
  std::size_t samples = 0;
  for (const auto& s : ex.segments) {
    EXPECT_NEAR(s.direction.norm(), 1.0, 1e-12);
    EXPECT_LT(s.s_min, s.s_max);
    EXPECT_LE(std::abs(s.direction.dot(s.normal_a)), 1e-6);
    EXPECT_LE(std::abs(s.direction.dot(s.normal_b)), 1e-6);
    for (const auto& p : s.samples) {
      const Vec3 r = p - s.origin;
      EXPECT_LE((r - r.dot(s.direction) * s.direction).norm(), 1e-6);
      EXPECT_LE(std::abs(s.normal_a.dot(p) - s.d_a), cfg.plane_inlier_threshold);
      EXPECT_LE(std::abs(s.normal_b.dot(p) - s.d_b), cfg.plane_inlier_threshold);
    }
    samples += s.samples.size();
  }
  // Overlapping segments are deduplicated into the edge list.
  EXPECT_GE(samples, ex.edges.size());
  EXPECT_GT(ex.edges.size(), 0u);
  for (const auto& e : ex.edges) {
    EXPECT_EQ(e.edge_class, EdgeClass::kDepthContinuous);
    EXPECT_EQ(e.bias, Vec3::Zero());
    EXPECT_TRUE(e.covariance.allFinite());
    EXPECT_LT((e.covariance - e.covariance.transpose()).norm(), 1e-15);
  }
}

TEST(ExtractDepthContinuous, BitReproducible) {
  const auto& b = testing::bundle("corner_room", 0);
  const auto x = extract_depth_continuous(b.cloud, CalibConfig{});
  const auto y = extract_depth_continuous(b.cloud, CalibConfig{});
  ASSERT_EQ(x.edges.size(), y.edges.size());
  for (std::size_t i = 0; i < x.edges.size(); ++i) {
    ASSERT_EQ(x.edges[i].position, y.edges[i].position);
    ASSERT_EQ(x.edges[i].covariance, y.edges[i].covariance);
  }
}

TEST(ExtractDepthContinuous, BenchmarkRoomSegmentsMatchTruth) {
  const auto& b = testing::bundle("corner_room", 0);
  const auto ex = extract_depth_continuous(b.cloud, CalibConfig{});
  const auto f = testing::dc_fidelity(ex.segments, b.gt, 0.005, 0.5);
  EXPECT_GE(f.segments, 5u);
  EXPECT_GE(f.within, 0.9);
}

}  // namespace
}  // namespace edgecalib
