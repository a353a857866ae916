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

#ifndef EDGECALIB_IMAGE_EDGE_HPP_
#define EDGECALIB_IMAGE_EDGE_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "edgecalib/geometry.hpp"
#include "edgecalib/io.hpp"

namespace edgecalib {

struct PixelCoord {
  int u = 0;
  int v = 0;
  bool operator==(const PixelCoord&) const = default;
};

struct EdgeMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> mask;  // 1 = edge, row-major
  std::vector<PixelCoord> pixels;  // row-major scan order
  std::vector<Vec2> gradients;     // Sobel (d/du, d/dv) of the blurred raster, per edge pixel
  bool undersized = false;         // image smaller than the kernel support

  bool is_edge(int u, int v) const {
    return mask[static_cast<std::size_t>(v) * width + u] != 0;
  }
};

/// Canny on an arbitrary float raster (row-major, w*h values). Gaussian blur,
/// 3x3 Sobel, non-maximum suppression, hysteresis with 8-connectivity. The
/// outer 2-pixel frame never carries edges.
EdgeMap canny(const std::vector<float>& raster, int width, int height, double sigma,
              double low, double high);
EdgeMap canny(const GrayImage& image, double sigma, double low, double high);

GrayImage edge_mask_image(const EdgeMap& edges);

struct Neighbor {
  std::size_t index = 0;  // insertion index
  double dist_sq = 0.0;
};

/// Static 2D k-d tree over edge pixels. k-nearest queries are exact; equal
/// distances are ordered by insertion index.
class EdgeIndex {
 public:
  /// Throws CalibError(kNoImageEdges) on empty input.
  explicit EdgeIndex(std::vector<Vec2> points);
  static EdgeIndex FromPixels(const std::vector<PixelCoord>& pixels);

  std::vector<Neighbor> knn(const Vec2& query, std::size_t k) const;
  const Vec2& point(std::size_t i) const { return points_[i]; }
  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    std::size_t begin, end;  // range in order_
    int axis;                // -1 for leaves
    double split;
    int left, right;
  };
  int build(std::size_t begin, std::size_t end, int depth);
  void search(int node, const Vec2& q, std::size_t k, std::vector<Neighbor>& heap) const;

  std::vector<Vec2> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

struct LineFeature {
  Vec2 n = Vec2::UnitY();  // unit normal, first nonzero component positive
  Vec2 q = Vec2::Zero();   // centroid of the supporting pixels
};

/// Total-least-squares line through the neighbors. Throws
/// kInsufficientNeighbors for fewer than 2 points and kDegenerateLine when all
/// points coincide.
LineFeature fit_line(const std::vector<Vec2>& neighbors);

}  // namespace edgecalib

#endif  // EDGECALIB_IMAGE_EDGE_HPP_
