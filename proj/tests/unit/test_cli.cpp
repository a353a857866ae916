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
#include <memory>
#include <regex>
#include <string>

#include "edgecalib/pipeline.hpp"
#include "json.hpp"
#include "support.hpp"

namespace edgecalib {
namespace {

using testing::run_cli;
using testing::TempDir;

const std::regex kDiagnostic(
    R"(^edgecalib: error code=[0-9]+ kind=[a-z_]+ message="([^"\\]|\\.)*"\n$)");

// Simulated bundles written once per binary through the CLI itself.
const TempDir& bundle_dir(const std::string& scene, int seed) {
  static std::map<std::string, std::unique_ptr<TempDir>> cache;
  auto& slot = cache[scene + "/" + std::to_string(seed)];
  if (!slot) {
    slot = std::make_unique<TempDir>();
    const auto r = run_cli({"simulate", "--scene", scene, "--seed", std::to_string(seed), "--out",
                            slot->path().string()});
    EXPECT_EQ(r.exit_code, 0) << r.err;
  }
  return *slot;
}

std::vector<std::string> calibrate_args(const TempDir& b, const std::string& out) {
  return {"calibrate",   "--cloud", b.file("cloud.pcd"),     "--image",
          b.file("image.png"), "--intrinsics", b.file("intrinsics.json"), "--init",
          b.file("init.json"), "--out", out};
}

void write_rotation(const TempDir& d, const std::string& name, const Vec3& axis_angle,
                    const Vec3& t) {
  write_extrinsics(RigidTransform{exp_so3(axis_angle), t}, d.file(name));
}

TEST(Metrics, SelfIsZero) {
  TempDir d;
  write_rotation(d, "a.json", Vec3(0.1, -0.2, 0.3), Vec3(0.05, 0.02, -0.1));
  const auto r = run_cli({"metrics", d.file("a.json"), d.file("a.json")});
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out, "0.0000 0.0000\n");
}

TEST(Metrics, FiveDegreeYaw) {
  TempDir d;
  write_rotation(d, "a.json", Vec3::Zero(), Vec3::Zero());
  write_rotation(d, "b.json", Vec3(0, 0, 5.0 * kPi / 180.0), Vec3::Zero());
  const auto r = run_cli({"metrics", d.file("a.json"), d.file("b.json")});
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out, "5.0000 0.0000\n");
}

TEST(Metrics, SubDegreeCentimeterFixture) {
  // Initial offsets of 0.91 deg / 8.49 cm, built on a non-trivial reference.
  TempDir d;
  const RigidTransform ref{exp_so3(Vec3(-1.2, 1.2, -1.2)), Vec3(0.05, -0.1, 0.02)};
  const Vec3 axis = Vec3(1, 2, -2).normalized();
  const Vec3 shift = Vec3(3, -4, 12).normalized() * 0.0849;
  const RigidTransform init{exp_so3(axis * (0.91 * kPi / 180.0)) * ref.rotation,
                            ref.translation + shift};
  write_extrinsics(ref, d.file("ref.json"));
  write_extrinsics(init, d.file("init.json"));
  const auto r = run_cli({"metrics", d.file("init.json"), d.file("ref.json")});
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out, "0.9100 8.4900\n");
}

TEST(Metrics, MalformedJsonExitsOne) {
  TempDir d;
  write_text_file(d.file("bad.json"), "{\"rotation\": [1, 2,");
  write_rotation(d, "a.json", Vec3::Zero(), Vec3::Zero());
  const auto r = run_cli({"metrics", d.file("bad.json"), d.file("a.json")});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_TRUE(r.out.empty());
  EXPECT_TRUE(std::regex_match(r.err, kDiagnostic)) << r.err;
  EXPECT_NE(r.err.find("code=1 kind=parse_error"), std::string::npos) << r.err;
}

TEST(Usage, MissingRequiredFlagExitsOne) {
  const auto r = run_cli({"calibrate", "--cloud", "x.pcd"});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_TRUE(std::regex_match(r.err, kDiagnostic)) << r.err;
  EXPECT_NE(r.err.find("kind=usage_error"), std::string::npos);
  EXPECT_EQ(run_cli({}).exit_code, 1);
  EXPECT_EQ(run_cli({"--version"}).exit_code, 0);
}

TEST(Simulate, WritesTheFixtureBundle) {
  const auto& b = bundle_dir("stripes", 0);
  for (const char* f : {"cloud.pcd", "image.png", "intrinsics.json", "extrinsics_gt.json",
                        "edges_gt.json", "init.json"}) {
    EXPECT_TRUE(std::filesystem::exists(b.file(f))) << f;
  }
  const auto edges = nlohmann::json::parse(read_text_file(b.file("edges_gt.json")));
  EXPECT_FALSE(edges.empty());
  const auto r = run_cli({"simulate", "--scene", "atlantis", "--out", b.file("x")});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("kind=unknown_scene"), std::string::npos) << r.err;
}

TEST(Simulate, IsIdempotent) {
  TempDir a, b;
  ASSERT_EQ(run_cli({"simulate", "--scene", "corner_room", "--seed", "3", "--out",
                     a.path().string()}).exit_code, 0);
  ASSERT_EQ(run_cli({"simulate", "--scene", "corner_room", "--seed", "3", "--out",
                     b.path().string()}).exit_code, 0);
  for (const char* f : {"cloud.pcd", "image.png", "intrinsics.json", "extrinsics_gt.json",
                        "edges_gt.json", "init.json"}) {
    EXPECT_EQ(read_text_file(a.file(f)), read_text_file(b.file(f))) << f;
  }
}

TEST(Calibrate, SimulatedBundleConverges) {
  const auto& b = bundle_dir("mixed", 4);
  TempDir out;
  auto args = calibrate_args(b, out.file("report.json"));
  args.insert(args.end(), {"--reference", b.file("extrinsics_gt.json"), "-v"});
  const auto r = run_cli(args);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.err.find("converged=1"), std::string::npos) << r.err;
  const auto rep = nlohmann::json::parse(read_text_file(out.file("report.json")));
  EXPECT_TRUE(rep.at("converged").get<bool>());
  EXPECT_LE(rep.at("rotation_error_deg").get<double>(), 0.2);
  EXPECT_LE(rep.at("translation_error_cm").get<double>(), 2.0);
}

TEST(Calibrate, ReportEqualsLibraryComposition) {
  const auto& b = bundle_dir("mixed", 4);
  TempDir out;
  ASSERT_EQ(run_cli(calibrate_args(b, out.file("report.json"))).exit_code, 0);
  const auto cloud = read_point_cloud(b.file("cloud.pcd")).cloud;
  const auto image = read_image(b.file("image.png"));
  const auto k = read_intrinsics(b.file("intrinsics.json"));
  const auto init = read_extrinsics(b.file("init.json"));
  const CalibConfig cfg;
  const auto lidar = extract_lidar_edges(cloud, cfg);
  const EdgeIndex index = EdgeIndex::FromPixels(detect_image_edges(image, cfg).pixels);
  const auto direct = gauss_newton_solve(lidar.merged, index, k, init, cfg);
  EXPECT_EQ(read_text_file(out.file("report.json")), report_to_json(direct));
}

TEST(Calibrate, IsIdempotent) {
  const auto& b = bundle_dir("box_wall", 1);
  TempDir out;
  auto first = calibrate_args(b, out.file("r.json"));
  first.insert(first.end(), {"--seed", "9"});
  ASSERT_EQ(run_cli(first).exit_code, 0);
  const std::string once = read_text_file(out.file("r.json"));
  ASSERT_EQ(run_cli(first).exit_code, 0);
  EXPECT_EQ(read_text_file(out.file("r.json")), once);
}

TEST(Calibrate, ThreePointCloudExitsThree) {
  const auto& b = bundle_dir("stripes", 0);
  TempDir d;
  IntensityPointCloud tiny;
  tiny.points = {{Vec3(3, 0, 0), 10}, {Vec3(3, 0.1, 0), 20}, {Vec3(3, 0, 0.1), 30}};
  write_point_cloud_pcd(tiny, d.file("tiny.pcd"));
  auto args = calibrate_args(b, d.file("r.json"));
  args[2] = d.file("tiny.pcd");
  const auto r = run_cli(args);
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_TRUE(std::regex_match(r.err, kDiagnostic)) << r.err;
  EXPECT_NE(r.err.find("kind=insufficient_correspondences"), std::string::npos) << r.err;
  EXPECT_FALSE(std::filesystem::exists(d.file("r.json")));
}

TEST(Calibrate, MissingIntrinsicsExitsOne) {
  const auto& b = bundle_dir("stripes", 0);
  TempDir d;
  auto args = calibrate_args(b, d.file("r.json"));
  args[6] = d.file("nope.json");
  const auto r = run_cli(args);
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_TRUE(std::regex_match(r.err, kDiagnostic)) << r.err;
  EXPECT_NE(r.err.find("kind=io_error"), std::string::npos) << r.err;
}

TEST(Calibrate, IllConditionedSystemExitsTwo) {
  const auto& b = bundle_dir("stripes", 0);
  TempDir d;
  write_text_file(d.file("c.cfg"), "max_condition_number = 1.000001\n");
  auto args = calibrate_args(b, d.file("r.json"));
  args.insert(args.end(), {"--config", d.file("c.cfg")});
  const auto r = run_cli(args);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("kind=degenerate_geometry"), std::string::npos) << r.err;
}

TEST(Calibrate, BadConfigExitsOne) {
  const auto& b = bundle_dir("stripes", 0);
  TempDir d;
  write_text_file(d.file("c.cfg"), "knn_k = 1\n");
  auto args = calibrate_args(b, d.file("r.json"));
  args.insert(args.end(), {"--config", d.file("c.cfg")});
  const auto r = run_cli(args);
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("kind=invalid_argument"), std::string::npos) << r.err;
}

TEST(Calibrate, DebugDirectoryIsPopulated) {
  const auto& b = bundle_dir("box_wall", 1);
  TempDir d;
  auto args = calibrate_args(b, d.file("r.json"));
  args.insert(args.end(), {"--debug-dir", d.file("debug/nested")});
  ASSERT_EQ(run_cli(args).exit_code, 0);
  for (const char* f : {"intensity.pgm", "lidar_edges.png", "classified.png", "image_edges.png",
                        "edges.ply", "edge_overlay.png"}) {
    EXPECT_TRUE(std::filesystem::exists(d.file(std::string("debug/nested/") + f))) << f;
  }
}

TEST(Overlay, EmptyCloudGivesTheInputImage) {
  const auto& b = bundle_dir("stripes", 0);
  TempDir d;
  write_point_cloud_pcd(IntensityPointCloud{}, d.file("empty.pcd"));
  const auto r = run_cli({"overlay", "--cloud", d.file("empty.pcd"), "--image",
                          b.file("image.png"), "--intrinsics", b.file("intrinsics.json"),
                          "--extrinsics", b.file("extrinsics_gt.json"), "--out",
                          d.file("o.png")});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(read_image(d.file("o.png")).data, read_image(b.file("image.png")).data);
}

TEST(Overlay, IsIdempotentAndColored) {
  const auto& b = bundle_dir("box_wall", 1);
  TempDir d;
  const std::vector<std::string> args = {
      "overlay", "--cloud", b.file("cloud.pcd"), "--image", b.file("image.png"),
      "--intrinsics", b.file("intrinsics.json"), "--extrinsics", b.file("extrinsics_gt.json"),
      "--out", d.file("o.png")};
  ASSERT_EQ(run_cli(args).exit_code, 0);
  const std::string once = read_text_file(d.file("o.png"));
  ASSERT_EQ(run_cli(args).exit_code, 0);
  EXPECT_EQ(read_text_file(d.file("o.png")), once);
  EXPECT_NE(read_image(d.file("o.png")).data, read_image(b.file("image.png")).data);
}

TEST(Colorize, WritesColoredPly) {
  const auto& b = bundle_dir("stripes", 0);
  TempDir d;
  const auto r = run_cli({"colorize", "--cloud", b.file("cloud.pcd"), "--image",
                          b.file("image.png"), "--intrinsics", b.file("intrinsics.json"),
                          "--extrinsics", b.file("extrinsics_gt.json"), "--out", d.file("c.ply"),
                          "-v"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const std::string ply = read_text_file(d.file("c.ply"));
  EXPECT_EQ(ply.rfind("ply\n", 0), 0u);
  EXPECT_NE(ply.find("property uchar red"), std::string::npos);
  EXPECT_NE(r.err.find("colored "), std::string::npos);
}

}  // namespace
}  // namespace edgecalib
