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

#include "edgecalib/image_edge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "edgecalib/errors.hpp"

namespace edgecalib {
namespace {

constexpr int kFrame = 2;

std::vector<double> gaussian_kernel(double sigma, int radius) {
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

int clampi(int v, int lo, int hi) { return std::min(std::max(v, lo), hi); }

std::vector<double> blur(const std::vector<float>& src, int w, int h, double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  const auto k = gaussian_kernel(sigma, radius);
  std::vector<double> tmp(src.size()), out(src.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += k[i + radius] * src[static_cast<std::size_t>(y) * w + clampi(x + i, 0, w - 1)];
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += k[i + radius] * tmp[static_cast<std::size_t>(clampi(y + i, 0, h - 1)) * w + x];
      }
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  return out;
}

}  // namespace

EdgeMap canny(const std::vector<float>& raster, int width, int height, double sigma,
              double low, double high) {
  if (width <= 0 || height <= 0 || raster.size() != static_cast<std::size_t>(width) * height) {
    throw CalibError(ErrorCode::kInvalidArgument, "canny: raster size mismatch");
  }
  if (!(sigma > 0.0) || !(low < high)) {
    throw CalibError(ErrorCode::kInvalidArgument, "canny: need sigma > 0 and low < high");
  }
  EdgeMap out;
  out.width = width;
  out.height = height;
  out.mask.assign(raster.size(), 0);
  const int support = 2 * static_cast<int>(std::ceil(3.0 * sigma)) + 1;
  if (width < std::max(support, 2 * kFrame + 1) || height < std::max(support, 2 * kFrame + 1)) {
    out.undersized = true;
    return out;
  }

  const auto s = blur(raster, width, height, sigma);
  auto px = [&](int x, int y) {
    return s[static_cast<std::size_t>(clampi(y, 0, height - 1)) * width + clampi(x, 0, width - 1)];
  };
  std::vector<double> mag(raster.size()), gx(raster.size()), gy(raster.size());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double dx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2.0 * px(x - 1, y) + px(x - 1, y + 1));
      const double dy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2.0 * px(x, y - 1) + px(x + 1, y - 1));
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      gx[i] = dx;
      gy[i] = dy;
      mag[i] = std::hypot(dx, dy);
    }
  }

  // Non-maximum suppression. The strict/non-strict pair keeps exactly one
  // pixel of a two-pixel plateau.
  const double tan22 = std::tan(kPi / 8.0);
  const double tan67 = std::tan(3.0 * kPi / 8.0);
  std::vector<double> nms(raster.size(), 0.0);
  for (int y = kFrame; y < height - kFrame; ++y) {
    for (int x = kFrame; x < width - kFrame; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      const double m = mag[i];
      if (m <= 0.0) continue;
      const double ax = std::abs(gx[i]), ay = std::abs(gy[i]);
      int ox = 0, oy = 0;
      if (ay <= tan22 * ax) {
        ox = 1;
      } else if (ay >= tan67 * ax) {
        oy = 1;
      } else if ((gx[i] > 0) == (gy[i] > 0)) {
        ox = 1;
        oy = 1;
      } else {
        ox = -1;
        oy = 1;
      }
      const double n1 = mag[static_cast<std::size_t>(y - oy) * width + (x - ox)];
      const double n2 = mag[static_cast<std::size_t>(y + oy) * width + (x + ox)];
      if (m > n1 && m >= n2) nms[i] = m;
    }
  }

  // Hysteresis, 8-connected, seeded from strong pixels in scan order.
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < nms.size(); ++i) {
    if (nms[i] >= high && !out.mask[i]) {
      out.mask[i] = 1;
      stack.push_back(i);
      while (!stack.empty()) {
        const std::size_t c = stack.back();
        stack.pop_back();
        const int cx = static_cast<int>(c % width), cy = static_cast<int>(c / width);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if (nx < kFrame || ny < kFrame || nx >= width - kFrame || ny >= height - kFrame) {
              continue;
            }
            const std::size_t j = static_cast<std::size_t>(ny) * width + nx;
            if (!out.mask[j] && nms[j] >= low) {
              out.mask[j] = 1;
              stack.push_back(j);
            }
          }
        }
      }
    }
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      if (out.mask[i]) {
        out.pixels.push_back({x, y});
        out.gradients.emplace_back(gx[i], gy[i]);
      }
    }
  }
  return out;
}

EdgeMap canny(const GrayImage& image, double sigma, double low, double high) {
  std::vector<float> raster(image.data.begin(), image.data.end());
  return canny(raster, image.width, image.height, sigma, low, high);
}

GrayImage edge_mask_image(const EdgeMap& edges) {
  GrayImage img(edges.width, edges.height);
  for (std::size_t i = 0; i < edges.mask.size(); ++i) img.data[i] = edges.mask[i] ? 255 : 0;
  return img;
}

// ---------------------------------------------------------------------------

namespace {
constexpr std::size_t kLeafSize = 8;

bool closer(const Neighbor& a, const Neighbor& b) {
  return a.dist_sq < b.dist_sq || (a.dist_sq == b.dist_sq && a.index < b.index);
}
}  // namespace

EdgeIndex::EdgeIndex(std::vector<Vec2> points) : points_(std::move(points)) {
  if (points_.empty()) throw CalibError(ErrorCode::kNoImageEdges, "no image edges");
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(2 * points_.size() / kLeafSize + 2);
  build(0, order_.size(), 0);
}

EdgeIndex EdgeIndex::FromPixels(const std::vector<PixelCoord>& pixels) {
  std::vector<Vec2> pts;
  pts.reserve(pixels.size());
  for (const auto& p : pixels) pts.emplace_back(p.u, p.v);
  return EdgeIndex(std::move(pts));
}

int EdgeIndex::build(std::size_t begin, std::size_t end, int depth) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({begin, end, -1, 0.0, -1, -1});
  if (end - begin <= kLeafSize) return id;
  const int axis = depth % 2;
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::size_t a, std::size_t b) {
                     const double va = points_[a][axis], vb = points_[b][axis];
                     return va < vb || (va == vb && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  const int left = build(begin, mid, depth + 1);
  const int right = build(mid, end, depth + 1);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void EdgeIndex::search(int node_id, const Vec2& q, std::size_t k,
                       std::vector<Neighbor>& best) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::size_t i = node.begin; i < node.end; ++i) {
      const std::size_t idx = order_[i];
      const Neighbor cand{idx, (points_[idx] - q).squaredNorm()};
      if (best.size() == k && !closer(cand, best.back())) continue;
      auto pos = std::upper_bound(best.begin(), best.end(), cand, closer);
      best.insert(pos, cand);
      if (best.size() > k) best.pop_back();
    }
    return;
  }
  // Left holds values <= split, right holds values >= split.
  const double diff = q[node.axis] - node.split;
  const int near = diff < 0.0 ? node.left : node.right;
  const int far = diff < 0.0 ? node.right : node.left;
  search(near, q, k, best);
  if (best.size() < k || diff * diff <= best.back().dist_sq) search(far, q, k, best);
}

std::vector<Neighbor> EdgeIndex::knn(const Vec2& query, std::size_t k) const {
  std::vector<Neighbor> best;
  if (k == 0) return best;
  k = std::min(k, points_.size());
  best.reserve(k + 1);
  search(0, query, k, best);
  return best;
}

LineFeature fit_line(const std::vector<Vec2>& neighbors) {
  if (neighbors.size() < 2) {
    throw CalibError(ErrorCode::kInsufficientNeighbors, "fit_line needs at least 2 points");
  }
  Vec2 c = Vec2::Zero();
  for (const auto& p : neighbors) c += p;
  c /= static_cast<double>(neighbors.size());
  Mat2 s = Mat2::Zero();
  for (const auto& p : neighbors) s += (p - c) * (p - c).transpose();
  if (!(s.trace() > 0.0)) throw CalibError(ErrorCode::kDegenerateLine, "degenerate line: all points coincide");
  Eigen::SelfAdjointEigenSolver<Mat2> es(s);
  Vec2 n = es.eigenvectors().col(0).normalized();
  if (n.x() < 0.0 || (n.x() == 0.0 && n.y() < 0.0)) n = -n;
  return {n, c};
}

}  // namespace edgecalib
