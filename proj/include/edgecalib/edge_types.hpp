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

#ifndef EDGECALIB_EDGE_TYPES_HPP_
#define EDGECALIB_EDGE_TYPES_HPP_

#include <cstddef>
#include <limits>
#include <optional>

#include "edgecalib/geometry.hpp"

namespace edgecalib {

enum class EdgeClass { kDepthContinuous, kDepthDiscontinuous, kIntensityDiscontinuous };

const char* to_string(EdgeClass c);

inline constexpr std::size_t kNoSource = std::numeric_limits<std::size_t>::max();

/// A LiDAR edge point in the LiDAR frame. The bias is non-zero only for
/// depth-discontinuous points; the registration uses position - bias.
struct EdgePoint3D {
  Vec3 position = Vec3::Zero();
  EdgeClass edge_class = EdgeClass::kDepthContinuous;
  Vec3 bias = Vec3::Zero();
  Mat3 covariance = Mat3::Zero();
  std::optional<Vec3> plane_normal;
  bool bias_downweighted = false;  // depth-discontinuous point without a normal
  std::size_t source_index = kNoSource;  // cloud index, kNoSource for synthesized samples

  Vec3 corrected() const { return position - bias; }
};

/// Sensor noise for covariance propagation.
struct NoiseModel {
  double range_sigma = 0.02;       // m
  double bearing_sigma = 0.00087;  // rad, isotropic in the tangent plane
  double camera_sigma = 1.0;       // px, isotropic
};

/// Sigma = A diag(sd^2, sw^2, sw^2) A^T with A = [w | d b1 | d b2], w the
/// bearing and (b1, b2) a deterministic basis of its tangent plane.
/// Throws kInvalidArgument for a zero-range point.
Mat3 point_covariance(const Vec3& point, const NoiseModel& model);

/// Orthonormal tangent basis: Gram-Schmidt of the smallest-magnitude axis
/// against the unit bearing.
std::pair<Vec3, Vec3> tangent_basis(const Vec3& unit_bearing);

}  // namespace edgecalib

#endif  // EDGECALIB_EDGE_TYPES_HPP_
