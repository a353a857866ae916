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

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "edgecalib/errors.hpp"
#include "edgecalib/pipeline.hpp"
#include "edgecalib/registration.hpp"
#include "support.hpp"

namespace edgecalib {
namespace {

using testing::Gen;

void expect_code(ErrorCode code, const std::function<void()>& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const CalibError& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

// Independent projection oracle: OpenCV radial-tangential model.
Vec2 oracle_pixel(const Vec3& pc, const CameraIntrinsics& k) {
  const double x = pc.x() / pc.z(), y = pc.y() / pc.z();
  const auto& d = k.distortion;
  const double r2 = x * x + y * y;
  const double radial = 1.0 + d[0] * r2 + d[1] * r2 * r2 + d[4] * r2 * r2 * r2;
  const double xd = x * radial + 2.0 * d[2] * x * y + d[3] * (r2 + 2.0 * x * x);
  const double yd = y * radial + d[2] * (r2 + 2.0 * y * y) + 2.0 * d[3] * x * y;
  return {k.fx * xd + k.cx, k.fy * yd + k.cy};
}

CameraIntrinsics plain_camera() {
  CameraIntrinsics k;
  k.fx = k.fy = 500.0;
  k.cx = 320.0;
  k.cy = 240.0;
  k.width = 640;
  k.height = 480;
  return k;
}

TEST(PointCovariance, PointOnXAxis) {
  const Mat3 s = point_covariance({1, 0, 0}, NoiseModel{0.02, 0.001, 1.0});
  Mat3 want = Mat3::Zero();
  want.diagonal() << 4e-4, 1e-6, 1e-6;
  EXPECT_LT((s - want).norm(), 1e-18);
}

TEST(PointCovariance, RangeOnlyNoiseIsRankOne) {
  const Vec3 p(2, -1, 3);
  const Mat3 s = point_covariance(p, NoiseModel{0.05, 0.0, 1.0});
  const Vec3 w = p.normalized();
  EXPECT_LT((s - 0.0025 * w * w.transpose()).norm(), 1e-17);
  Eigen::SelfAdjointEigenSolver<Mat3> es(s);
  EXPECT_LT(std::abs(es.eigenvalues()[1]), 1e-18);
}

TEST(PointCovariance, ZeroRangeIsRejected) {
  expect_code(ErrorCode::kInvalidArgument, [] { point_covariance(Vec3::Zero(), NoiseModel{}); });
}

TEST(PointCovariance, PropertyEigenvalues) {
  Gen g(1);
  for (int i = 0; i < 200; ++i) {
    const Vec3 p = g.unit3() * g.uniform(0.1, 100.0);
    const NoiseModel m{g.uniform(0.001, 0.1), g.uniform(1e-4, 1e-2), 1.0};
    const Mat3 s = point_covariance(p, m);
    EXPECT_EQ(s, s.transpose());
    Eigen::SelfAdjointEigenSolver<Mat3> es(s);
    std::array<double, 3> want{m.range_sigma * m.range_sigma,
                               std::pow(p.norm() * m.bearing_sigma, 2),
                               std::pow(p.norm() * m.bearing_sigma, 2)};
    std::sort(want.begin(), want.end());
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(es.eigenvalues()[j], want[j], 1e-12 * want[2]);
    // The range direction carries the range variance.
    const Vec3 w = p.normalized();
    EXPECT_NEAR(w.dot(s * w), want[0] == m.range_sigma * m.range_sigma ? want[0] : w.dot(s * w),
                1e-12 * want[2]);
    EXPECT_NEAR(w.dot(s * w), m.range_sigma * m.range_sigma, 1e-12 * want[2]);
  }
}

Correspondence corr_at(const Vec3& p, const Vec2& n, const Vec2& q) {
  Correspondence c;
  c.point.position = p;
  c.line.n = n.normalized();
  c.line.q = q;
  return c;
}

TEST(Residual, ZeroOnTheLine) {
  const auto k = plain_camera();
  const Vec3 p(0.1, 0.2, 2.0);
  const Vec2 px = *project(p, k);
  EXPECT_NEAR(*residual(corr_at(p, {0.6, 0.8}, px), RigidTransform{}, k), 0.0, 1e-12);
}

TEST(Residual, ThreePixelOffsetAlongNormal) {
  const auto k = plain_camera();
  const Vec3 p(0.1, 0.2, 2.0);
  const Vec2 n(0.6, 0.8);
  const Vec2 px = *project(p, k);
  EXPECT_NEAR(*residual(corr_at(p, n, px - 3.0 * n), RigidTransform{}, k), 3.0, 1e-12);
}

TEST(Residual, BehindCameraIsDropped) {
  EXPECT_FALSE(residual(corr_at({0, 0, -2}, {1, 0}, {0, 0}), RigidTransform{}, plain_camera()));
}

TEST(Residual, PropertyMatchesCompositionalOracle) {
  Gen g(2);
  for (int i = 0; i < 500; ++i) {
    const auto k = g.intrinsics(true);
    const RigidTransform t = g.transform(0.3, 0.5);
    const Vec3 pc(g.uniform(-1, 1), g.uniform(-0.7, 0.7), g.uniform(2, 10));
    Correspondence c = corr_at(t.inverse().rotation * (pc - t.translation), g.vec2(-1, 1),
                               g.vec2(0, 600));
    if (i % 2) {
      c.point.edge_class = EdgeClass::kDepthDiscontinuous;
      c.point.bias = g.vec3(-0.01, 0.01);
    }
    const Vec3 cam = t.rotation.matrix() * (c.point.position - c.point.bias) + t.translation;
    const double want = c.line.n.dot(oracle_pixel(cam, k) - c.line.q);
    const auto got = residual(c, t, k);
    ASSERT_TRUE(got);
    EXPECT_NEAR(*got, want, 1e-12 * (1.0 + std::abs(want) + oracle_pixel(cam, k).norm()));
  }
}

TEST(ResidualJacobian, PropertyFiniteDifferences) {
  Gen g(3);
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const auto k = g.intrinsics(true);
    const RigidTransform t = g.transform(kPi, 1.0);
    const Vec3 pc(g.uniform(-1, 1), g.uniform(-0.7, 0.7), g.uniform(2, 10));
    const Correspondence c = corr_at(t.inverse().rotation * (pc - t.translation), g.vec2(-1, 1),
                                     g.vec2(0, 600));
    const Vec6 j = *residual_jacobian(c, t, k);
    Vec6 fd;
    for (int a = 0; a < 6; ++a) {
      Vec6 d = Vec6::Zero();
      d[a] = h;
      fd[a] = (*residual(c, boxplus(t, d), k) - *residual(c, boxplus(t, -d), k)) / (2 * h);
    }
    EXPECT_LT((j - fd).norm() / j.norm(), 1e-5) << "draw " << i;
  }
}

TEST(ResidualJacobian, OnAxisPointHasNoDepthSensitivity) {
  Gen g(4);
  for (int i = 0; i < 20; ++i) {
    const auto k = g.intrinsics(true);
    const Correspondence c = corr_at({0, 0, g.uniform(1, 20)}, g.vec2(-1, 1), g.vec2(0, 600));
    EXPECT_NEAR((*residual_jacobian(c, RigidTransform{}, k))[5], 0.0, 1e-12);
  }
}

TEST(ResidualJacobian, LinearInLineNormal) {
  Gen g(5);
  const auto k = g.intrinsics(true);
  const RigidTransform t = g.transform(0.3, 0.3);
  Correspondence c = corr_at(t.inverse().rotation * (Vec3(0.2, 0.1, 4) - t.translation),
                             {0.3, 0.7}, {300, 200});
  const Vec6 j1 = *residual_jacobian(c, t, k);
  for (double s : {-2.0, 0.5, 3.0}) {
    Correspondence cs = c;
    cs.line.n = s * c.line.n;
    EXPECT_LT((*residual_jacobian(cs, t, k) - s * j1).norm(), 1e-12 * j1.norm());
  }
}

TEST(ResidualVariance, CameraOnlyNoise) {
  Correspondence c = corr_at({0.2, 0.1, 3}, {0.6, 0.8}, {0, 0});
  c.point.covariance.setZero();
  const double v = *residual_variance(c, RigidTransform{}, plain_camera(), NoiseModel{0.02, 0.001, 1.7});
  EXPECT_NEAR(v, 1.7 * 1.7, 1e-12);
}

TEST(ResidualVariance, BearingNoiseIsRoughlyDistanceInvariant) {
  const NoiseModel m{1e-12, 0.001, 1e-12};
  const auto k = plain_camera();
  const Vec3 p(0.1, 0.05, 5.0);
  Correspondence near = corr_at(p, {1, 0}, {0, 0});
  near.point.covariance = point_covariance(p, m);
  Correspondence far = corr_at(2.0 * p, {1, 0}, {0, 0});
  far.point.covariance = point_covariance(2.0 * p, m);
  const double a = *residual_variance(near, RigidTransform{}, k, m);
  const double b = *residual_variance(far, RigidTransform{}, k, m);
  EXPECT_NEAR(b / a, 1.0, 0.2);
}

TEST(ResidualVariance, MatchesMonteCarlo) {
  Gen g(6);
  const NoiseModel m{0.02, 0.001, 1.0};
  const auto k = g.intrinsics(true);
  const RigidTransform t = g.transform(0.2, 0.2);
  const Vec3 p = t.inverse().rotation * (Vec3(0.4, -0.3, 5.0) - t.translation);
  Correspondence c = corr_at(p, {0.3, -0.8}, {310, 250});
  c.point.covariance = point_covariance(p, m);
  const double sigma_sq = *residual_variance(c, t, k, m);
  const Mat3 l = c.point.covariance.llt().matrixL();
  std::normal_distribution<double> n01(0.0, 1.0);
  const int samples = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < samples; ++i) {
    Correspondence s = c;
    s.point.position = p + l * Vec3(n01(g.engine()), n01(g.engine()), n01(g.engine()));
    s.line.q = c.line.q + m.camera_sigma * Vec2(n01(g.engine()), n01(g.engine()));
    const double z = *residual(s, t, k);
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / samples;
  const double var = sum_sq / samples - mean * mean;
  EXPECT_NEAR(var / sigma_sq, 1.0, 0.05);
}

struct GtSetup {
  const testing::Bundle* b;
  LidarEdges lidar;
  EdgeMap edges;
  std::unique_ptr<EdgeIndex> index;
};

const GtSetup& gt_setup() {
  static const GtSetup s = [] {
    GtSetup out;
    out.b = &testing::bundle("mixed", 0);
    const CalibConfig cfg;
    out.lidar = extract_lidar_edges(out.b->cloud, cfg);
    out.edges = detect_image_edges(out.b->image, cfg);
    out.index = std::make_unique<EdgeIndex>(EdgeIndex::FromPixels(out.edges.pixels));
    return out;
  }();
  return s;
}

TEST(BuildCorrespondences, GroundTruthMatchesMostEdges) {
  const auto& s = gt_setup();
  const CalibConfig cfg;
  const auto& k = s.b->bench.intrinsics;
  const auto& t = s.b->bench.t_gt;
  std::size_t in_view = 0;
  for (const auto& e : s.lidar.merged) {
    const auto px = project(transform_point(t, e.corrected()), k);
    in_view += px && in_image(*px, k);
  }
  const auto corr = build_correspondences(s.lidar.merged, *s.index, t, k, cfg,
                                          cfg.correspondence_max_px);
  EXPECT_GE(static_cast<double>(corr.size()) / in_view, 0.95);
  std::vector<double> z;
  for (const auto& c : corr) {
    z.push_back(std::abs(*residual(c, t, k)));
    EXPECT_GT(c.sigma_sq, 0.0);
    EXPECT_DOUBLE_EQ(c.weight, 1.0 / c.sigma_sq);
    EXPECT_NEAR(c.line.n.norm(), 1.0, 1e-12);
  }
  std::nth_element(z.begin(), z.begin() + z.size() / 2, z.end());
  EXPECT_LT(z[z.size() / 2], 1.0);
}

TEST(BuildCorrespondences, AllProjectionsMissing) {
  const auto& s = gt_setup();
  RigidTransform away = s.b->bench.t_gt;
  away.translation += Vec3(0, 0, -100.0);  // everything behind the camera
  expect_code(ErrorCode::kInsufficientCorrespondences, [&] {
    build_correspondences(s.lidar.merged, *s.index, away, s.b->bench.intrinsics, CalibConfig{}, 4.0);
  });
}

TEST(BuildCorrespondences, ZeroGateMatchesNothing) {
  const auto& s = gt_setup();
  expect_code(ErrorCode::kInsufficientCorrespondences, [&] {
    build_correspondences(s.lidar.merged, *s.index, s.b->bench.t_gt, s.b->bench.intrinsics,
                          CalibConfig{}, 0.0);
  });
}

TEST(NormalEquations, SymmetricPositiveSemiDefinite) {
  const auto& s = gt_setup();
  const CalibConfig cfg;
  Gen g(7);
  for (int i = 0; i < 5; ++i) {
    const RigidTransform t = perturb(s.b->bench.t_gt, 1.0, 2.0, i);
    const auto corr = build_correspondences(s.lidar.merged, *s.index, t, s.b->bench.intrinsics,
                                            cfg, 20.0);
    const auto ne = accumulate_normal_equations(corr, t, s.b->bench.intrinsics, cfg);
    EXPECT_GE(ne.used, 6u);
    EXPECT_LT((ne.h - ne.h.transpose()).norm(), 1e-12 * ne.h.norm());
    Eigen::SelfAdjointEigenSolver<Mat6> es(ne.h);
    EXPECT_GE(es.eigenvalues()[0], -1e-12 * es.eigenvalues()[5]);
  }
}

TEST(NormalEquations, FixedPointHasNoSpuriousMotion) {
  Gen g(8);
  const auto k = g.intrinsics(true);
  const RigidTransform t = g.transform(0.3, 0.3);
  std::vector<Correspondence> corr;
  for (int i = 0; i < 60; ++i) {
    const Vec3 pc(g.uniform(-1, 1), g.uniform(-0.7, 0.7), g.uniform(2, 10));
    Correspondence c = corr_at(t.inverse().rotation * (pc - t.translation), g.vec2(-1, 1), {});
    c.line.q = *project(pc, k);
    c.sigma_sq = 1.0;
    c.weight = 1.0;
    corr.push_back(c);
  }
  const CalibConfig cfg;
  const auto ne = accumulate_normal_equations(corr, t, k, cfg);
  const Vec6 delta = ne.h.ldlt().solve(-ne.g);
  EXPECT_LT(delta.norm(), cfg.convergence_tol);
  EXPECT_LT(ne.cost, 1e-20);
}

TEST(ConditionNumber, Values) {
  Mat6 h = Mat6::Identity();
  h(5, 5) = 1e-3;
  EXPECT_NEAR(condition_number(h), 1e3, 1e-6);
  h(5, 5) = 0.0;
  EXPECT_TRUE(std::isinf(condition_number(h)));
}

TEST(GaussNewton, GroundTruthIsAFixedPoint) {
  const auto& s = gt_setup();
  CalibConfig cfg;
  cfg.coarse_gate_factor = 1.0;  // start at the final gate
  const auto rep =
      gauss_newton_solve(s.lidar.merged, *s.index, s.b->bench.intrinsics, s.b->bench.t_gt, cfg);
  EXPECT_TRUE(rep.converged);
  EXPECT_LE(rep.outer_iterations, 2);
  EXPECT_LE(rotation_error_deg(rep.extrinsics.rotation, s.b->bench.t_gt.rotation), 0.05);
  EXPECT_LE(translation_error_cm(rep.extrinsics.translation, s.b->bench.t_gt.translation), 0.5);

  const auto def = gauss_newton_solve(s.lidar.merged, *s.index, s.b->bench.intrinsics,
                                      s.b->bench.t_gt, CalibConfig{});
  EXPECT_TRUE(def.converged);
  EXPECT_LE(rotation_error_deg(def.extrinsics.rotation, s.b->bench.t_gt.rotation), 0.05);
  EXPECT_LE(translation_error_cm(def.extrinsics.translation, s.b->bench.t_gt.translation), 0.5);
}

TEST(GaussNewton, RecoversFromFiveDegreesTenCentimeters) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto& b = testing::bundle("mixed", seed);
    const RigidTransform init = perturb(b.bench.t_gt, 5.0, 10.0, 1000 + seed);
    const auto run = calibrate(b.cloud, b.image, b.bench.intrinsics, init, CalibConfig{});
    EXPECT_TRUE(run.report.converged) << seed;
    EXPECT_LE(rotation_error_deg(run.report.extrinsics.rotation, b.bench.t_gt.rotation), 0.2)
        << seed;
    EXPECT_LE(translation_error_cm(run.report.extrinsics.translation, b.bench.t_gt.translation),
              2.0)
        << seed;
  }
}

TEST(GaussNewton, TraceInvariants) {
  const auto& b = testing::bundle("mixed", 1);
  const RigidTransform init = perturb(b.bench.t_gt, 5.0, 10.0, 1001);
  const auto run = calibrate(b.cloud, b.image, b.bench.intrinsics, init, CalibConfig{});
  const auto& tr = run.report.trace;
  ASSERT_FALSE(tr.empty());
  for (std::size_t i = 1; i < tr.size(); ++i) {
    if (tr[i].outer != tr[i - 1].outer) continue;
    EXPECT_LE(tr[i].cost, tr[i - 1].cost) << "accepted steps never increase the robust cost";
  }
  for (const auto& it : tr) {
    EXPECT_TRUE(std::isfinite(it.rms));
    EXPECT_GE(it.lambda, 0.0);
  }
  EXPECT_EQ(run.report.rms_per_outer.size(), static_cast<std::size_t>(run.report.outer_iterations));
  EXPECT_EQ(run.report.correspondences_per_outer.size(),
            static_cast<std::size_t>(run.report.outer_iterations));
  std::size_t used = 0;
  for (auto n : run.report.class_counts) used += n;
  EXPECT_EQ(used, run.report.correspondences_per_outer.back());
}

TEST(GaussNewton, DeterministicReport) {
  const auto& b = testing::bundle("mixed", 2);
  const RigidTransform init = perturb(b.bench.t_gt, 5.0, 10.0, 1002);
  const auto a = calibrate(b.cloud, b.image, b.bench.intrinsics, init, CalibConfig{});
  const auto c = calibrate(b.cloud, b.image, b.bench.intrinsics, init, CalibConfig{});
  EXPECT_EQ(report_to_json(a.report), report_to_json(c.report));
  EXPECT_EQ(a.report.extrinsics.rotation.matrix(), c.report.extrinsics.rotation.matrix());
  EXPECT_EQ(a.report.extrinsics.translation, c.report.extrinsics.translation);
}

TEST(GaussNewton, SingleLineIsDegenerate) {
  const auto k = plain_camera();
  std::vector<EdgePoint3D> edges;
  std::vector<PixelCoord> pixels;
  for (int i = -40; i <= 40; ++i) {
    EdgePoint3D e;
    e.position = Vec3(0.02 * i, 0.0, 5.0);
    e.covariance = point_covariance(e.position, NoiseModel{});
    edges.push_back(e);
  }
  for (int u = 100; u < 540; ++u) pixels.push_back({u, 240});
  const EdgeIndex index = EdgeIndex::FromPixels(pixels);
  expect_code(ErrorCode::kDegenerateGeometry,
              [&] { gauss_newton_solve(edges, index, k, RigidTransform{}, CalibConfig{}); });
}

TEST(ReportJson, CarriesTraceAndCounts) {
  CalibrationReport r;
  r.converged = true;
  r.outer_iterations = 2;
  r.trace.push_back({0, 0, 1.5, 0.7, 120, 1e-3, 0.0});
  r.class_counts = {1, 2, 3};
  r.rotation_error_deg = 0.1;
  const std::string j = report_to_json(r);
  for (const char* key : {"\"converged\": true", "\"trace\"", "\"rms_px\"", "\"class_counts\"",
                          "\"depth_discontinuous\"", "\"rotation_error_deg\""}) {
    EXPECT_NE(j.find(key), std::string::npos) << key << "\n" << j;
  }
  EXPECT_EQ(j.find("translation_error_cm"), std::string::npos);
}

}  // namespace
}  // namespace edgecalib
