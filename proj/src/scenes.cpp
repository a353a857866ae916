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

#include <random>

#include "edgecalib/errors.hpp"
#include "edgecalib/simulator.hpp"
#include "rng.hpp"

namespace edgecalib {
namespace {

// Mostly frontal light: back wall, side walls and floor/ceiling shade at
// about 0.94, 0.42 and 0.17.
const Vec3 kRoomLight = Vec3(0.93, 0.36, 0.08).normalized();

struct Room {
  double x_back, y_left, y_right, z_floor, z_ceil;
};

ScenePlane rect(const Vec3& corner, const Vec3& u, const Vec3& v, double intensity,
                IntensityPattern pattern = {}) {
  ScenePlane p;
  p.corner = corner;
  p.edge_u = u;
  p.edge_v = v;
  p.base_intensity = intensity;
  p.pattern = pattern;
  return p;
}

IntensityPattern stripes(double period, double low, double high) {
  return {PatternKind::kStripes, period, low, high};
}
IntensityPattern checker(double size, double low, double high) {
  return {PatternKind::kChecker, size, low, high};
}

// Floor, ceiling and side walls run from x = -1 to the back wall.
void add_room_shell(SceneSpec& s, const Room& r, double floor_i, double ceil_i, double left_i,
                    double right_i, IntensityPattern left_pattern = {}) {
  const double len = r.x_back + 1.0, width = r.y_left - r.y_right, h = r.z_ceil - r.z_floor;
  s.planes.push_back(rect({-1.0, r.y_right, r.z_floor}, {len, 0, 0}, {0, width, 0}, floor_i));
  s.planes.push_back(rect({-1.0, r.y_right, r.z_ceil}, {len, 0, 0}, {0, width, 0}, ceil_i));
  s.planes.push_back(
      rect({-1.0, r.y_left, r.z_floor}, {len, 0, 0}, {0, 0, h}, left_i, left_pattern));
  s.planes.push_back(rect({-1.0, r.y_right, r.z_floor}, {len, 0, 0}, {0, 0, h}, right_i));
}

// A free-standing panel facing the sensor (normal along x).
ScenePlane board(double x, double y0, double y1, double z0, double z1, double intensity) {
  return rect({x, y0, z0}, {0, y1 - y0, 0}, {0, 0, z1 - z0}, intensity);
}

}  // namespace

BenchmarkScene make_benchmark_scene(const std::string& kind, std::uint64_t seed) {
  std::mt19937_64 rng(detail::mix_seed(seed, {0x7363656e65}));
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto j = [&](double scale) { return scale * jitter(rng); };

  BenchmarkScene b;
  b.kind = kind;
  SceneSpec& s = b.scene;

  if (kind == "corner_room") {
    const Room r{5.3 + j(0.3), 2.4 + j(0.2), -2.7 + j(0.2), -1.25 + j(0.1), 1.6 + j(0.1)};
    const double i = 250.0;
    add_room_shell(s, r, i, i, i, i);
    s.planes.push_back(rect({r.x_back, r.y_right, r.z_floor}, {0, r.y_left - r.y_right, 0},
                            {0, 0, r.z_ceil - r.z_floor}, i));
    // Shading is the only cue in the camera image: each wall orientation gets
    // a distinct incidence, at least 60 gray levels apart.
    s.ambient = 0.05;
    s.light = kRoomLight;
  } else if (kind == "stripes") {
    // One wall built from coplanar panels: no depth edges at all.
    const double x = 4.5 + j(0.3);
    const double y_a = -0.6 + j(0.2), y_b = 1.3 + j(0.2);
    s.planes.push_back(rect({x, -5.0, -4.0}, {0, y_a + 5.0, 0}, {0, 0, 8.0}, 0,
                            stripes(0.8 + j(0.05), 40, 200)));
    s.planes.push_back(rect({x, y_a, -4.0}, {0, 0, 8.0}, {0, y_b - y_a, 0}, 0,
                            stripes(0.65 + j(0.05), 60, 210)));
    s.planes.push_back(rect({x, y_b, -4.0}, {0, 5.0 - y_b, 0}, {0, 0, 8.0}, 0,
                            checker(0.9 + j(0.05), 50, 190)));
    s.ambient = 0.6;
  } else if (kind == "box_wall") {
    const double xw = 6.0 + j(0.2);
    s.planes.push_back(rect({xw, -6.0, -5.0}, {0, 12.0, 0}, {0, 0, 10.0}, 60));
    s.planes.push_back(board(2.0 + j(0.1), 0.3 + j(0.05), 1.2 + j(0.05), -0.2 + j(0.05),
                             0.6 + j(0.05), 220));
    s.planes.push_back(board(2.8 + j(0.1), -1.4 + j(0.05), -0.4 + j(0.05), -0.9 + j(0.05),
                             0.1 + j(0.05), 200));
    s.planes.push_back(board(3.5 + j(0.1), 0.9 + j(0.05), 2.0 + j(0.05), -1.6 + j(0.05),
                             -0.7 + j(0.05), 230));
    s.planes.push_back(board(2.4 + j(0.1), -0.6 + j(0.05), 0.2 + j(0.05), 0.8 + j(0.05),
                             1.5 + j(0.05), 210));
    const double bx = 3.2 + j(0.1), by = -2.2 + j(0.1), bz = -1.4 + j(0.1);
    s.boxes.push_back({Vec3(bx, by, bz), Vec3(bx + 0.6, by + 0.6, bz + 0.6), 180});
    s.ambient = 0.5;
  } else if (kind == "mixed") {
    const Room r{5.3 + j(0.2), 2.4 + j(0.15), -2.7 + j(0.15), -1.25 + j(0.1), 1.6 + j(0.1)};
    // Palette: every geometric edge keeps at least 55 gray levels of camera
    // contrast under kRoomLight, so image edges exist wherever LiDAR edges do.
    // Patterns sit on the brightly lit back wall; sides, floor and ceiling are
    // plain.
    add_room_shell(s, r, 10, 10, 190, 190);
    const double y_split = 0.2 + j(0.2);
    const double h = r.z_ceil - r.z_floor;
    s.planes.push_back(rect({r.x_back, y_split, r.z_floor}, {0, r.y_left - y_split, 0},
                            {0, 0, h}, 0, stripes(1.4 + j(0.05), 150, 255)));
    s.planes.push_back(rect({r.x_back, r.y_right, r.z_floor}, {0, 0, h},
                            {0, y_split - r.y_right, 0}, 0, checker(1.3 + j(0.05), 150, 255)));
    s.planes.push_back(board(2.2 + j(0.1), 0.7 + j(0.05), 1.5 + j(0.05), -0.3 + j(0.05),
                             0.5 + j(0.05), 20));
    s.planes.push_back(board(3.0 + j(0.1), -1.4 + j(0.05), -0.7 + j(0.05), 0.3 + j(0.05),
                             0.9 + j(0.05), 80));
    // Straddles the sensor axis so only the front face is visible and all four
    // of its edges are silhouettes.
    const double bx = 2.6 + j(0.1), by = -0.3 + j(0.05), bz = -0.35 + j(0.05);
    s.boxes.push_back({Vec3(bx, by, bz), Vec3(bx + 0.6, by + 0.6, bz + 0.6), 50});
    // Pattern periods stay well above the image offset of a 5 degree error.
    s.ambient = 0.1;
    s.light = kRoomLight;
  } else {
    throw CalibError(ErrorCode::kUnknownScene, "unknown scene kind: " + kind);
  }

  LidarSpec& l = b.lidar;
  l.az_min = -0.56;
  l.az_max = 0.56;
  l.el_min = -0.45;
  l.el_max = 0.45;
  l.az_step = 0.0007;
  l.el_step = 0.0007;
  l.beam_divergence = 0.0028;
  l.range_noise = 0.001;
  l.inflation_enabled = true;
  l.seed = detail::mix_seed(seed, {0x6c69646172});

  CameraIntrinsics& k = b.intrinsics;
  k.width = 640;
  k.height = 480;
  k.fx = 560.0 + j(5.0);
  k.fy = k.fx + j(1.0);
  k.cx = 319.5 + j(3.0);
  k.cy = 239.5 + j(3.0);
  k.distortion = {-0.05 + j(0.01), 0.01 + j(0.005), 0.0005, -0.0003, 0.0};

  // LiDAR x forward / y left / z up to camera x right / y down / z forward.
  Mat3 r0;
  r0 << 0, -1, 0, 0, 0, -1, 1, 0, 0;
  Vec3 axis(normal(rng), normal(rng), normal(rng));
  axis.normalize();
  const double angle = deg2rad(5.0) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  Vec3 tdir(normal(rng), normal(rng), normal(rng));
  tdir.normalize();
  const double tnorm = std::uniform_real_distribution<double>(0.05, 0.2)(rng);
  b.t_gt.rotation = exp_so3(angle * axis) * Rotation::FromMatrix(r0);
  b.t_gt.translation = tnorm * tdir;
  return b;
}

}  // namespace edgecalib
