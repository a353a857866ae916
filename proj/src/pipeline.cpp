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

#include "edgecalib/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "edgecalib/errors.hpp"

namespace edgecalib {

LidarEdges extract_lidar_edges(const IntensityPointCloud& cloud, const CalibConfig& config) {
  config.validate();
  LidarEdges out;
  if (config.use_depth_continuous) out.planar = extract_depth_continuous(cloud, config);
  if (config.use_depth_discontinuous || config.use_intensity_discontinuous) {
    out.intensity = extract_intensity_path(cloud, config);
  }
  auto take = [&](const std::vector<EdgePoint3D>& edges) {
    for (const auto& e : edges) {
      const bool use = (e.edge_class == EdgeClass::kDepthContinuous && config.use_depth_continuous) ||
                       (e.edge_class == EdgeClass::kDepthDiscontinuous &&
                        config.use_depth_discontinuous) ||
                       (e.edge_class == EdgeClass::kIntensityDiscontinuous &&
                        config.use_intensity_discontinuous);
      if (!use) continue;
      out.merged.push_back(e);
      ++out.counts[static_cast<std::size_t>(e.edge_class)];
    }
  };
  take(out.planar.edges);
  take(out.intensity.edges);
  return out;
}

EdgeMap detect_image_edges(const GrayImage& image, const CalibConfig& config) {
  return canny(image, config.gaussian_sigma, config.canny_low, config.canny_high);
}

CameraIntrinsics effective_intrinsics(const CameraIntrinsics& k, const CalibConfig& config) {
  CameraIntrinsics out = k;
  if (config.undistorted_input) out.distortion = {0, 0, 0, 0, 0};
  return out;
}

CalibrationRun calibrate(const IntensityPointCloud& cloud, const GrayImage& image,
                         const CameraIntrinsics& k, const RigidTransform& init,
                         const CalibConfig& config) {
  k.validate();
  if (image.width != k.width || image.height != k.height) {
    throw CalibError(ErrorCode::kInvalidArgument, "image size does not match intrinsics");
  }
  CalibrationRun run;
  run.lidar = extract_lidar_edges(cloud, config);
  run.image_edges = detect_image_edges(image, config);
  if (run.image_edges.pixels.empty()) {
    throw CalibError(ErrorCode::kNoImageEdges, "no edges detected in the camera image");
  }
  const EdgeIndex index = EdgeIndex::FromPixels(run.image_edges.pixels);
  run.report = gauss_newton_solve(run.lidar.merged, index, effective_intrinsics(k, config),
                                  init, config);
  run.report.extracted_counts = run.lidar.counts;
  return run;
}

void attach_errors(CalibrationReport& report, const RigidTransform& reference) {
  report.rotation_error_deg = rotation_error_deg(report.extrinsics.rotation, reference.rotation);
  report.translation_error_cm =
      translation_error_cm(report.extrinsics.translation, reference.translation);
}

Rgb jet(double t) {
  if (!(t >= 0.0)) t = 0.0;
  t = std::min(t, 1.0);
  // Breakpoints at 1/8, 3/8, 5/8, 7/8: blue, cyan, yellow, red; the ends are
  // half-intensity blue and red.
  auto ramp = [](double x) { return std::clamp(x, 0.0, 1.0); };
  const double r = ramp(std::min(4.0 * t - 1.5, -4.0 * t + 4.5));
  const double g = ramp(std::min(4.0 * t - 0.5, -4.0 * t + 3.5));
  const double b = ramp(std::min(4.0 * t + 0.5, -4.0 * t + 2.5));
  auto q = [](double x) { return static_cast<std::uint8_t>(std::lround(255.0 * x)); };
  return {q(r), q(g), q(b)};
}

RgbImage render_overlay(const IntensityPointCloud& cloud, const GrayImage& image,
                        const CameraIntrinsics& k, const RigidTransform& t) {
  RgbImage out(image);
  if (cloud.empty()) return out;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : cloud.points) {
    lo = std::min(lo, p.intensity);
    hi = std::max(hi, p.intensity);
  }
  const double span = hi > lo ? hi - lo : 1.0;
  std::vector<double> zbuf(static_cast<std::size_t>(image.width) * image.height,
                           std::numeric_limits<double>::infinity());
  for (const auto& p : cloud.points) {
    const Vec3 x = transform_point(t, p.position);
    const auto px = project(x, k);
    if (!px) continue;
    const long u = std::lround(px->x()), v = std::lround(px->y());
    if (u < 0 || v < 0 || u >= image.width || v >= image.height) continue;
    double& z = zbuf[static_cast<std::size_t>(v) * image.width + u];
    if (x.z() >= z) continue;
    z = x.z();
    const Rgb c = jet((p.intensity - lo) / span);
    out.set(static_cast<int>(u), static_cast<int>(v), c.r, c.g, c.b);
  }
  return out;
}

namespace {

Rgb class_color(EdgeClass c) {
  switch (c) {
    case EdgeClass::kDepthContinuous: return {0, 0, 255};
    case EdgeClass::kDepthDiscontinuous: return {255, 0, 0};
    case EdgeClass::kIntensityDiscontinuous: return {0, 255, 0};
  }
  return {};
}

GrayImage mask_image(const EdgeMap& map) {
  GrayImage g(map.width, map.height);
  for (const auto& p : map.pixels) g.at(p.u, p.v) = 255;
  return g;
}

}  // namespace

void write_debug_artifacts(const std::string& dir, const CalibrationRun& run,
                           const GrayImage& image, const CameraIntrinsics& k) {
  const std::string base = dir.empty() || dir.back() == '/' ? dir : dir + "/";
  const auto& ie = run.lidar.intensity;
  if (ie.image.cols > 0) {
    GrayImage raster(ie.image.cols, ie.image.rows);
    for (std::size_t i = 0; i < ie.raster.size(); ++i) {
      raster.data[i] = static_cast<std::uint8_t>(std::lround(std::clamp(ie.raster[i], 0.0f, 255.0f)));
    }
    write_pgm(raster, base + "intensity.pgm");
    const auto& em = ie.classified.edge_map;
    if (em.width > 0) {
      write_png(mask_image(em), base + "lidar_edges.png");
      RgbImage classified(raster);
      for (std::size_t i : ie.classified.depth_edges) {
        classified.set(em.pixels[i].u, em.pixels[i].v, 255, 0, 0);
      }
      for (std::size_t i : ie.classified.intensity_edges) {
        classified.set(em.pixels[i].u, em.pixels[i].v, 0, 255, 0);
      }
      write_png(classified, base + "classified.png");
    }
  }
  if (run.image_edges.width > 0) write_png(mask_image(run.image_edges), base + "image_edges.png");

  std::vector<ColoredPoint> pts;
  pts.reserve(run.lidar.planar.edges.size() + ie.edges.size());
  for (const auto* list : {&run.lidar.planar.edges, &ie.edges}) {
    for (const auto& e : *list) {
      const Rgb c = class_color(e.edge_class);
      pts.push_back({e.corrected(), c.r, c.g, c.b});
    }
  }
  write_colored_ply(pts, base + "edges.ply");

  RgbImage overlay(image);
  for (const auto& e : run.lidar.merged) {
    const auto px = project(transform_point(run.report.extrinsics, e.corrected()), k);
    if (!px) continue;
    const long u = std::lround(px->x()), v = std::lround(px->y());
    if (u < 0 || v < 0 || u >= image.width || v >= image.height) continue;
    const Rgb c = class_color(e.edge_class);
    overlay.set(static_cast<int>(u), static_cast<int>(v), c.r, c.g, c.b);
  }
  write_png(overlay, base + "edge_overlay.png");
}

}  // namespace edgecalib
