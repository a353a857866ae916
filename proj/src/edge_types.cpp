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

#include "edgecalib/edge_types.hpp"

#include <cmath>

#include "edgecalib/errors.hpp"

namespace edgecalib {

const char* to_string(EdgeClass c) {
  switch (c) {
    case EdgeClass::kDepthContinuous:
      return "depth_continuous";
    case EdgeClass::kDepthDiscontinuous:
      return "depth_discontinuous";
    case EdgeClass::kIntensityDiscontinuous:
      return "intensity_discontinuous";
  }
  return "unknown";
}

std::pair<Vec3, Vec3> tangent_basis(const Vec3& w) {
  int axis = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(w[i]) < std::abs(w[axis])) axis = i;
  }
  Vec3 e = Vec3::Zero();
  e[axis] = 1.0;
  const Vec3 b1 = (e - w.dot(e) * w).normalized();
  const Vec3 b2 = w.cross(b1);
  return {b1, b2};
}

Mat3 point_covariance(const Vec3& point, const NoiseModel& model) {
  const double d = point.norm();
  if (!(d > 0.0) || !std::isfinite(d)) {
    throw CalibError(ErrorCode::kInvalidArgument, "point_covariance: zero-range point");
  }
  const Vec3 w = point / d;
  const auto [b1, b2] = tangent_basis(w);
  Mat3 a;
  a.col(0) = w;
  a.col(1) = d * b1;
  a.col(2) = d * b2;
  const Vec3 diag(model.range_sigma * model.range_sigma,
                  model.bearing_sigma * model.bearing_sigma,
                  model.bearing_sigma * model.bearing_sigma);
  Mat3 s = a * diag.asDiagonal() * a.transpose();
  return 0.5 * (s + s.transpose());
}

}  // namespace edgecalib
