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

#ifndef EDGECALIB_IO_HPP_
#define EDGECALIB_IO_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "edgecalib/geometry.hpp"

namespace edgecalib {

struct LidarPoint {
  Vec3 position = Vec3::Zero();  // m, LiDAR frame
  double intensity = 0.0;        // native sensor units
};

struct IntensityPointCloud {
  std::vector<LidarPoint> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

struct PointCloudReadResult {
  IntensityPointCloud cloud;
  std::size_t declared = 0;  // points announced by the header
  std::size_t dropped = 0;   // non-finite coordinates or negative intensity
};

/// PCD v0.7 (ascii, or binary little-endian float32) or ASCII PLY, chosen by
/// extension. Fields x y z intensity are required.
PointCloudReadResult read_point_cloud(const std::string& path);

enum class PcdEncoding { kAscii, kBinary };
/// Values are stored as float32; ASCII uses 9 significant digits so every
/// float survives a round trip bit-exactly.
void write_point_cloud_pcd(const IntensityPointCloud& cloud, const std::string& path,
                           PcdEncoding encoding = PcdEncoding::kAscii);

/// 8-bit grayscale raster, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
};

/// 8-bit RGB raster, row-major, interleaved.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}
  explicit RgbImage(const GrayImage& gray);

  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
};

/// PNG (any bit depth / color type) or PGM (P2/P5). Color is collapsed with
/// round(0.299 R + 0.587 G + 0.114 B).
GrayImage read_image(const std::string& path);
std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b);

void write_png(const GrayImage& image, const std::string& path);
void write_png(const RgbImage& image, const std::string& path);
void write_pgm(const GrayImage& image, const std::string& path);

/// ASCII PLY with x y z (float) red green blue (uchar). Returns the number of
/// points that projected inside the image and were written.
std::size_t write_colored_cloud(const IntensityPointCloud& cloud, const GrayImage& image,
                                const CameraIntrinsics& k, const RigidTransform& t,
                                const std::string& path);

struct ColoredPoint {
  Vec3 position;
  std::uint8_t r = 0, g = 0, b = 0;
};
void write_colored_ply(const std::vector<ColoredPoint>& points, const std::string& path);

// JSON layouts shared by the CLI and the fixture bundles.
/// {"rotation": [9 values, row-major], "translation": [3 values, m]}
std::string extrinsics_to_json(const RigidTransform& t);
RigidTransform extrinsics_from_json(const std::string& text);
RigidTransform read_extrinsics(const std::string& path);
void write_extrinsics(const RigidTransform& t, const std::string& path);

/// {"fx", "fy", "cx", "cy", "dist": [5], "width", "height"}
std::string intrinsics_to_json(const CameraIntrinsics& k);
CameraIntrinsics intrinsics_from_json(const std::string& text);
CameraIntrinsics read_intrinsics(const std::string& path);
void write_intrinsics(const CameraIntrinsics& k, const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace edgecalib

#endif  // EDGECALIB_IO_HPP_
