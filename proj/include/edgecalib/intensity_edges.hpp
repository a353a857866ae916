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

#ifndef EDGECALIB_INTENSITY_EDGES_HPP_
#define EDGECALIB_INTENSITY_EDGES_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "edgecalib/config.hpp"
#include "edgecalib/edge_types.hpp"
#include "edgecalib/image_edge.hpp"
#include "edgecalib/io.hpp"

namespace edgecalib {

/// Fixed raster window: `cols` x `rows` pixels centered on (az_center,
/// el_center). Without a window the grid is fitted to the cloud.
struct SphericalWindow {
  double az_center = 0.0;
  double el_center = 0.0;
  int cols = 1;
  int rows = 1;
};

/// Pixel (r, c) covers [el_min + r el_res, +el_res) x [az_min + c az_res, +az_res).
struct SphericalImage {
  double az_res = 0.0, el_res = 0.0;
  double az_min = 0.0, el_min = 0.0;
  int cols = 0, rows = 0;
  std::vector<double> intensity;       // mean raw intensity, 0 where unoccupied
  std::vector<double> depth;           // mean range (m), 0 where unoccupied
  std::vector<std::uint8_t> occupied;
  std::vector<std::size_t> offsets;    // CSR: contributors of pixel i are
  std::vector<std::size_t> point_ids;  // point_ids[offsets[i] .. offsets[i + 1])
  std::size_t in_range = 0;            // points binned into the raster
  std::size_t outside = 0;             // points outside an explicit window
  std::size_t zero_range = 0;

  std::size_t pixel_index(int r, int c) const { return static_cast<std::size_t>(r) * cols + c; }
  std::span<const std::size_t> contributors(std::size_t pixel) const {
    return {point_ids.data() + offsets[pixel], offsets[pixel + 1] - offsets[pixel]};
  }
  /// Pixel containing (az, el), or nullopt outside the raster.
  std::optional<std::size_t> locate(double az, double el) const;
};

double azimuth(const Vec3& p);
double elevation(const Vec3& p);

/// Bins every point (optionally restricted to `keep`) into the raster.
/// Throws kDegenerateRanges when no point has a positive range.
SphericalImage spherical_project(const IntensityPointCloud& cloud, double az_res, double el_res,
                                 const std::optional<SphericalWindow>& window = std::nullopt,
                                 const std::vector<std::uint8_t>* keep = nullptr);

/// Flags points lying strictly between a nearer and a farther neighbor pixel
/// (by more than `jump` on both sides). Returns a keep mask.
std::vector<std::uint8_t> bleeding_filter(const IntensityPointCloud& cloud,
                                          const SphericalImage& sph, double jump,
                                          std::size_t* removed = nullptr);

/// Intensity mapped to [0, 255] over occupied pixels; unoccupied pixels take
/// the value of the nearest occupied pixel so they do not create edges.
std::vector<float> normalized_intensity(const SphericalImage& sph, IntensityNormalization mode);

struct ClassifiedEdges {
  EdgeMap edge_map;
  std::vector<std::size_t> depth_edges;      // indices into edge_map.pixels
  std::vector<std::size_t> intensity_edges;  // indices into edge_map.pixels
};

/// Canny on the normalized intensity raster, then max-min depth over the
/// occupied pixels within `radius_px` decides the class of each edge pixel.
ClassifiedEdges extract_and_classify(const SphericalImage& sph, const std::vector<float>& raster,
                                     const CalibConfig& config);

struct RemapStats {
  std::size_t skipped_empty = 0;  // edge pixels with no contributors
  std::size_t duplicates = 0;     // edge pixels resolving to an already used point
};

/// Foreground boundary point for each depth-discontinuous pixel and the
/// mean-range contributor for each intensity-discontinuous pixel.
std::vector<EdgePoint3D> remap_to_3d(const IntensityPointCloud& cloud, const SphericalImage& sph,
                                     const ClassifiedEdges& edges, EdgeClass edge_class,
                                     const CalibConfig& config, RemapStats* stats = nullptr);

/// Beam-inflation bias E = d tan(theta / 2) L, where L is the in-plane unit
/// vector perpendicular to the edge pointing out of the foreground (sign taken
/// from `outward`), with its component along the viewing ray removed and
/// renormalized. Throws kDegenerateBias when N is parallel to the edge.
Vec3 beam_bias(const Vec3& position, const Vec3& edge_direction, const Vec3& plane_normal,
               const Vec3& outward, double theta);

struct IntensityExtraction {
  std::vector<EdgePoint3D> edges;
  SphericalImage image;
  std::vector<float> raster;
  ClassifiedEdges classified;
  std::size_t bleeding_removed = 0;
  RemapStats depth_stats, intensity_stats;
  std::size_t missing_normals = 0;
};

IntensityExtraction extract_intensity_path(const IntensityPointCloud& cloud,
                                           const CalibConfig& config);

}  // namespace edgecalib

#endif  // EDGECALIB_INTENSITY_EDGES_HPP_
