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

#include "support.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <unistd.h>

namespace edgecalib::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("edgecalib_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

double Gen::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng_);
}

int Gen::integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

Vec3 Gen::vec3(double lo, double hi) {
  return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)};
}

Vec3 Gen::unit3() {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(n(rng_), n(rng_), n(rng_));
  } while (v.norm() < 1e-6);
  return v.normalized();
}

Vec2 Gen::vec2(double lo, double hi) { return {uniform(lo, hi), uniform(lo, hi)}; }

Rotation Gen::rotation(double max_angle_rad) {
  return exp_so3(unit3() * uniform(0.0, max_angle_rad));
}

RigidTransform Gen::transform(double max_angle_rad, double max_translation) {
  RigidTransform t;
  t.rotation = rotation(max_angle_rad);
  t.translation = vec3(-max_translation, max_translation);
  return t;
}

CameraIntrinsics Gen::intrinsics(bool distorted) {
  CameraIntrinsics k;
  k.width = 640;
  k.height = 480;
  k.fx = uniform(400.0, 700.0);
  k.fy = k.fx * uniform(0.98, 1.02);
  k.cx = 320.0 + uniform(-10.0, 10.0);
  k.cy = 240.0 + uniform(-10.0, 10.0);
  if (distorted) {
    k.distortion = {uniform(-0.1, 0.05), uniform(-0.01, 0.02), uniform(-1e-3, 1e-3),
                    uniform(-1e-3, 1e-3), 0.0};
  }
  return k;
}

const Bundle& bundle(const std::string& kind, std::uint64_t seed) {
  static std::mutex mu;
  static std::map<std::pair<std::string, std::uint64_t>, Bundle> cache;
  std::lock_guard<std::mutex> lock(mu);
  const auto key = std::make_pair(kind, seed);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  Bundle b;
  b.bench = make_benchmark_scene(kind, seed);
  b.cloud = raycast(b.bench.scene, b.bench.lidar);
  b.image = render_camera(b.bench.scene, b.bench.intrinsics, b.bench.t_gt);
  b.gt = ground_truth_edges(b.bench.scene);
  return cache.emplace(key, std::move(b)).first->second;
}

double line_distance(const GroundTruthEdge& g, const Vec3& p) {
  const Vec3 d = g.direction();
  const Vec3 v = p - g.a;
  return (v - v.dot(d) * d).norm();
}

namespace {

double nearest(const std::vector<GroundTruthEdge>& gt, EdgeClass cls, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& g : gt) {
    if (g.edge_class == cls) best = std::min(best, g.distance(p));
  }
  return best;
}

}  // namespace

DepthDiscontinuousFidelity dd_fidelity(const std::vector<EdgePoint3D>& edges,
                                       const std::vector<GroundTruthEdge>& gt, double theta) {
  DepthDiscontinuousFidelity f;
  std::size_t pre = 0, post = 0, closer = 0;
  for (const auto& e : edges) {
    if (e.edge_class != EdgeClass::kDepthDiscontinuous) continue;
    const double footprint = e.position.norm() * std::tan(theta / 2.0);
    const double raw = nearest(gt, EdgeClass::kDepthDiscontinuous, e.position);
    const double cor = nearest(gt, EdgeClass::kDepthDiscontinuous, e.corrected());
    ++f.points;
    if (raw <= 2.0 * footprint) ++pre;
    if (cor <= footprint) ++post;
    if (cor < raw) ++closer;
    f.mean_raw += raw;
    f.mean_corrected += cor;
  }
  if (f.points > 0) {
    const double n = static_cast<double>(f.points);
    f.within_pre = pre / n;
    f.within_post = post / n;
    f.closer = closer / n;
    f.mean_raw /= n;
    f.mean_corrected /= n;
  }
  return f;
}

SegmentFidelity dc_fidelity(const std::vector<EdgeSegment3D>& segments,
                            const std::vector<GroundTruthEdge>& gt, double max_offset,
                            double max_angle_deg) {
  SegmentFidelity f;
  std::size_t ok = 0;
  for (const auto& s : segments) {
    double best_offset = std::numeric_limits<double>::infinity(), best_angle = 180.0;
    for (const auto& g : gt) {
      if (g.edge_class != EdgeClass::kDepthContinuous) continue;
      const double offset =
          std::max(line_distance(g, s.at(s.s_min)), line_distance(g, s.at(s.s_max)));
      if (offset < best_offset) {
        best_offset = offset;
        best_angle =
            rad2deg(std::acos(std::min(1.0, std::abs(g.direction().dot(s.direction)))));
      }
    }
    ++f.segments;
    if (best_offset <= max_offset && best_angle <= max_angle_deg) ++ok;
  }
  if (f.segments > 0) f.within = static_cast<double>(ok) / f.segments;
  return f;
}

double classification_accuracy(const std::vector<EdgePoint3D>& edges,
                               const std::vector<GroundTruthEdge>& gt, double radius) {
  std::size_t ok = 0, n = 0;
  for (const auto& e : edges) {
    double best = std::numeric_limits<double>::infinity();
    EdgeClass cls = EdgeClass::kDepthContinuous;
    for (const auto& g : gt) {
      const double d = g.distance(e.position);
      if (d < best) {
        best = d;
        cls = g.edge_class;
      }
    }
    ++n;
    const bool truth_dd = cls == EdgeClass::kDepthDiscontinuous;
    const bool pred_dd = e.edge_class == EdgeClass::kDepthDiscontinuous;
    if (best <= radius && truth_dd == pred_dd) ++ok;
  }
  return n == 0 ? 0.0 : static_cast<double>(ok) / n;
}

std::string cli_path() { return EDGECALIB_CLI_PATH; }

namespace {

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

CommandResult run_cli(const std::vector<std::string>& args) {
  TempDir tmp;
  std::string cmd = quote(cli_path());
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " >" + quote(tmp.file("out")) + " 2>" + quote(tmp.file("err"));
  const int status = std::system(cmd.c_str());
  CommandResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(tmp.path() / "out");
  r.err = slurp(tmp.path() / "err");
  return r;
}

}  // namespace edgecalib::testing
