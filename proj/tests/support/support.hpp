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

#ifndef EDGECALIB_TESTS_SUPPORT_HPP_
#define EDGECALIB_TESTS_SUPPORT_HPP_

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "edgecalib/geometry.hpp"
#include "edgecalib/io.hpp"
#include "edgecalib/pipeline.hpp"
#include "edgecalib/simulator.hpp"

namespace edgecalib::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

/// Hand-rolled generators for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi);
  int integer(int lo, int hi);  // inclusive
  Vec3 vec3(double lo, double hi);
  Vec3 unit3();
  Vec2 vec2(double lo, double hi);
  Rotation rotation(double max_angle_rad = kPi);
  RigidTransform transform(double max_angle_rad = kPi, double max_translation = 1.0);
  /// 640x480 camera with f in [400, 700] and mild distortion.
  CameraIntrinsics intrinsics(bool distorted = true);
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// A simulated fixture bundle. Raycasting dominates test time, so bundles are
/// cached per (kind, seed) for the lifetime of the test binary.
struct Bundle {
  BenchmarkScene bench;
  IntensityPointCloud cloud;
  GrayImage image;
  std::vector<GroundTruthEdge> gt;
};
const Bundle& bundle(const std::string& kind, std::uint64_t seed);

/// Distance from p to the infinite line through a ground-truth segment.
double line_distance(const GroundTruthEdge& g, const Vec3& p);

/// Fidelity of extracted LiDAR edges against simulator ground truth.
struct DepthDiscontinuousFidelity {
  std::size_t points = 0;
  double within_pre = 0.0;   // raw position within 2 d tan(theta / 2)
  double within_post = 0.0;  // corrected position within d tan(theta / 2)
  double closer = 0.0;       // corrected strictly closer than raw
  double mean_raw = 0.0;     // m
  double mean_corrected = 0.0;
};
DepthDiscontinuousFidelity dd_fidelity(const std::vector<EdgePoint3D>& edges,
                                       const std::vector<GroundTruthEdge>& gt, double theta);

struct SegmentFidelity {
  std::size_t segments = 0;
  double within = 0.0;  // fraction within max_offset and max_angle of a truth line
};
SegmentFidelity dc_fidelity(const std::vector<EdgeSegment3D>& segments,
                            const std::vector<GroundTruthEdge>& gt, double max_offset,
                            double max_angle_deg);

/// Depth-discontinuous vs other, scored against the class of the nearest
/// ground-truth edge within `radius`. Points with no edge in range count as
/// misclassified.
double classification_accuracy(const std::vector<EdgePoint3D>& edges,
                               const std::vector<GroundTruthEdge>& gt, double radius);

/// Path of the CLI executable, injected by the build.
std::string cli_path();

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};
/// Runs the CLI with a shell-quoted argument list; captures both streams.
CommandResult run_cli(const std::vector<std::string>& args);

}  // namespace edgecalib::testing

#endif  // EDGECALIB_TESTS_SUPPORT_HPP_
