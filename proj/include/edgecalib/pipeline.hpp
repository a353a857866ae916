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

#ifndef EDGECALIB_PIPELINE_HPP_
#define EDGECALIB_PIPELINE_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "edgecalib/config.hpp"
#include "edgecalib/image_edge.hpp"
#include "edgecalib/intensity_edges.hpp"
#include "edgecalib/io.hpp"
#include "edgecalib/planar_edges.hpp"
#include "edgecalib/registration.hpp"

namespace edgecalib {

/// Both LiDAR paths, merged. Classes disabled in the config are extracted
/// (for diagnostics) but left out of `merged`.
struct LidarEdges {
  PlanarExtraction planar;
  IntensityExtraction intensity;
  std::vector<EdgePoint3D> merged;
  std::array<std::size_t, 3> counts{};  // merged points per EdgeClass
};

LidarEdges extract_lidar_edges(const IntensityPointCloud& cloud, const CalibConfig& config);
EdgeMap detect_image_edges(const GrayImage& image, const CalibConfig& config);

/// Intrinsics actually used by the solver: distortion is dropped when the
/// image is declared already undistorted.
CameraIntrinsics effective_intrinsics(const CameraIntrinsics& k, const CalibConfig& config);

struct CalibrationRun {
  LidarEdges lidar;
  EdgeMap image_edges;
  CalibrationReport report;
};

/// Full composition: extraction, image edges, solve. Throws CalibError with
/// kNoImageEdges / kInsufficientCorrespondences / kDegenerateGeometry.
CalibrationRun calibrate(const IntensityPointCloud& cloud, const GrayImage& image,
                         const CameraIntrinsics& k, const RigidTransform& init,
                         const CalibConfig& config);

/// Sets the optional error fields of the report against a reference.
void attach_errors(CalibrationReport& report, const RigidTransform& reference);

// Visualization.
struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
};
/// Four-segment piecewise-linear jet map; t is clamped to [0, 1].
Rgb jet(double t);

/// Image with every projected point drawn as one pixel, colored by its
/// min-max normalized intensity. Nearer points win on overlap.
RgbImage render_overlay(const IntensityPointCloud& cloud, const GrayImage& image,
                        const CameraIntrinsics& k, const RigidTransform& t);

/// Writes intensity.pgm, lidar_edges.png, classified.png, image_edges.png,
/// edges.ply and edge_overlay.png into an existing directory.
void write_debug_artifacts(const std::string& dir, const CalibrationRun& run,
                           const GrayImage& image, const CameraIntrinsics& k);

}  // namespace edgecalib

#endif  // EDGECALIB_PIPELINE_HPP_
