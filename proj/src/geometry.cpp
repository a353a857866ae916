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

#include "edgecalib/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "edgecalib/errors.hpp"

namespace edgecalib {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kUnsupportedFormat: return "unsupported_format";
    case ErrorCode::kCorruptStream: return "corrupt_stream";
    case ErrorCode::kDegenerateRanges: return "degenerate_ranges";
    case ErrorCode::kNoImageEdges: return "no_image_edges";
    case ErrorCode::kInsufficientNeighbors: return "insufficient_neighbors";
    case ErrorCode::kDegenerateLine: return "degenerate_line";
    case ErrorCode::kDegenerateBias: return "degenerate_bias";
    case ErrorCode::kInsufficientCorrespondences:
      return "insufficient_correspondences";
    case ErrorCode::kDegenerateGeometry: return "degenerate_geometry";
    case ErrorCode::kUnknownScene: return "unknown_scene";
  }
  return "unknown";
}

Rotation Rotation::FromMatrix(const Mat3& m) {
  if (!m.allFinite()) {
    throw CalibError(ErrorCode::kInvalidArgument, "rotation has non-finite entries");
  }
  const double orth = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (orth > 1e-9 || std::abs(m.determinant() - 1.0) > 1e-9) {
    throw CalibError(ErrorCode::kInvalidArgument,
                     "matrix is not a proper rotation (orthonormality/det check failed)");
  }
  return Rotation(m, 0);
}

Rotation Rotation::Orthonormalized(const Mat3& m) {
  if (!m.allFinite()) {
    throw CalibError(ErrorCode::kInvalidArgument, "rotation has non-finite entries");
  }
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    throw CalibError(ErrorCode::kInvalidArgument, "matrix is a reflection, not a rotation");
  }
  return Rotation(r, 0);
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform out;
  out.rotation = rotation.inverse();
  out.translation = -(out.rotation.matrix() * translation);
  return out;
}

RigidTransform RigidTransform::operator*(const RigidTransform& o) const {
  RigidTransform out;
  out.rotation = rotation * o.rotation;
  out.translation = rotation.matrix() * o.translation + translation;
  return out;
}

Eigen::Matrix4d RigidTransform::homogeneous() const {
  Eigen::Matrix4d h = Eigen::Matrix4d::Identity();
  h.topLeftCorner<3, 3>() = rotation.matrix();
  h.topRightCorner<3, 1>() = translation;
  return h;
}

Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Rotation exp_so3(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 w = hat(omega);
  Mat3 r;
  if (theta < 1e-8) {
    r = Mat3::Identity() + w + 0.5 * w * w;
  } else {
    r = Mat3::Identity() + (std::sin(theta) / theta) * w +
        ((1.0 - std::cos(theta)) / (theta * theta)) * w * w;
  }
  return Rotation(r, 0);
}

Vec3 log_so3(const Rotation& r) {
  const Eigen::AngleAxisd aa(r.matrix());
  return aa.angle() * aa.axis();
}

Mat3 left_jacobian_so3(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 w = hat(omega);
  if (theta < 1e-6) {
    return Mat3::Identity() + 0.5 * w + (1.0 / 6.0) * w * w;
  }
  const double t2 = theta * theta;
  return Mat3::Identity() + ((1.0 - std::cos(theta)) / t2) * w +
         ((theta - std::sin(theta)) / (t2 * theta)) * w * w;
}

Mat3 left_jacobian_so3_inverse(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 w = hat(omega);
  if (theta < 1e-6) {
    return Mat3::Identity() - 0.5 * w + (1.0 / 12.0) * w * w;
  }
  const double coeff = 1.0 / (theta * theta) -
                       (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  return Mat3::Identity() - 0.5 * w + coeff * w * w;
}

RigidTransform exp_se3(const Tangent& delta) {
  const Vec3 omega = delta.head<3>();
  RigidTransform out;
  out.rotation = exp_so3(omega);
  out.translation = left_jacobian_so3(omega) * delta.tail<3>();
  return out;
}

Tangent log_se3(const RigidTransform& t) {
  const Vec3 omega = log_so3(t.rotation);
  Tangent out;
  out.head<3>() = omega;
  out.tail<3>() = left_jacobian_so3_inverse(omega) * t.translation;
  return out;
}

RigidTransform boxplus(const RigidTransform& t, const Tangent& delta) {
  if (delta.isZero(0.0)) return t;
  return exp_se3(delta) * t;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw CalibError(ErrorCode::kInvalidArgument, "focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw CalibError(ErrorCode::kInvalidArgument, "image size must be positive");
  }
  if (!std::isfinite(cx) || !std::isfinite(cy)) {
    throw CalibError(ErrorCode::kInvalidArgument, "principal point must be finite");
  }
  for (double c : distortion) {
    if (!std::isfinite(c)) {
      throw CalibError(ErrorCode::kInvalidArgument, "distortion must be finite");
    }
  }
}

bool CameraIntrinsics::has_distortion() const {
  return std::any_of(distortion.begin(), distortion.end(),
                     [](double c) { return c != 0.0; });
}

Vec2 distort(const Vec2& xn, const std::array<double, 5>& d) {
  const double k1 = d[0], k2 = d[1], p1 = d[2], p2 = d[3], k3 = d[4];
  const double x = xn.x(), y = xn.y();
  const double r2 = x * x + y * y;
  const double radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3));
  return {x * radial + 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x),
          y * radial + p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y};
}

Mat2 distort_jacobian(const Vec2& xn, const std::array<double, 5>& d) {
  const double k1 = d[0], k2 = d[1], p1 = d[2], p2 = d[3], k3 = d[4];
  const double x = xn.x(), y = xn.y();
  const double r2 = x * x + y * y;
  const double radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3));
  const double dradial_dr2 = k1 + r2 * (2.0 * k2 + 3.0 * k3 * r2);
  const double drx = dradial_dr2 * 2.0 * x;
  const double dry = dradial_dr2 * 2.0 * y;
  Mat2 j;
  j(0, 0) = radial + x * drx + 2.0 * p1 * y + 6.0 * p2 * x;
  j(0, 1) = x * dry + 2.0 * p1 * x + 2.0 * p2 * y;
  j(1, 0) = y * drx + 2.0 * p1 * x + 2.0 * p2 * y;
  j(1, 1) = radial + y * dry + 6.0 * p1 * y + 2.0 * p2 * x;
  return j;
}

Vec2 undistort(const Vec2& xd, const std::array<double, 5>& d) {
  Vec2 x = xd;
  for (int it = 0; it < 30; ++it) {
    const Vec2 err = distort(x, d) - xd;
    if (err.norm() < 1e-15) break;
    x -= distort_jacobian(x, d).inverse() * err;
  }
  return x;
}

namespace {

// Radial mapping r -> r * radial(r) must be increasing for a projection to be
// meaningful; beyond that radius distant points fold back into the image.
bool distortion_valid(const Vec2& xn, const std::array<double, 5>& d) {
  const double r2 = xn.squaredNorm();
  const double slope = 1.0 + r2 * (3.0 * d[0] + r2 * (5.0 * d[1] + r2 * 7.0 * d[4]));
  return slope > 0.0;
}

}  // namespace

std::optional<Vec2> project(const Vec3& pc, const CameraIntrinsics& k) {
  if (!(pc.z() > 0.0)) return std::nullopt;
  const Vec2 xn(pc.x() / pc.z(), pc.y() / pc.z());
  Vec2 xd = xn;
  if (k.has_distortion()) {
    if (!distortion_valid(xn, k.distortion)) return std::nullopt;
    xd = distort(xn, k.distortion);
  }
  return Vec2(k.fx * xd.x() + k.cx, k.fy * xd.y() + k.cy);
}

std::optional<ProjectionWithJacobian> project_with_jacobian(
    const Vec3& pc, const CameraIntrinsics& k) {
  if (!(pc.z() > 0.0)) return std::nullopt;
  const double iz = 1.0 / pc.z();
  const Vec2 xn(pc.x() * iz, pc.y() * iz);
  Mat23 dxn;
  dxn << iz, 0.0, -pc.x() * iz * iz,
         0.0, iz, -pc.y() * iz * iz;
  Vec2 xd = xn;
  Mat23 dxd = dxn;
  if (k.has_distortion()) {
    if (!distortion_valid(xn, k.distortion)) return std::nullopt;
    xd = distort(xn, k.distortion);
    dxd = distort_jacobian(xn, k.distortion) * dxn;
  }
  ProjectionWithJacobian out;
  out.pixel = Vec2(k.fx * xd.x() + k.cx, k.fy * xd.y() + k.cy);
  out.jacobian.row(0) = k.fx * dxd.row(0);
  out.jacobian.row(1) = k.fy * dxd.row(1);
  return out;
}

Vec3 unproject(const Vec2& pixel, const CameraIntrinsics& k) {
  Vec2 xd((pixel.x() - k.cx) / k.fx, (pixel.y() - k.cy) / k.fy);
  const Vec2 xn = k.has_distortion() ? undistort(xd, k.distortion) : xd;
  return Vec3(xn.x(), xn.y(), 1.0);
}

bool in_image(const Vec2& pixel, const CameraIntrinsics& k) {
  return pixel.x() >= -0.5 && pixel.y() >= -0.5 &&
         pixel.x() < static_cast<double>(k.width) - 0.5 &&
         pixel.y() < static_cast<double>(k.height) - 0.5;
}

double rotation_error_deg(const Rotation& r, const Rotation& r_gt) {
  // Same angle as arccos(clamp((tr(M) - 1) / 2)), evaluated through atan2 so
  // that identical rotations give exactly zero and half-turns exactly 180.
  // M = R R_gt^T summed in a fixed order, so M is exactly symmetric (and the
  // sine term exactly zero) when both arguments are the same matrix.
  const Mat3& a = r.matrix();
  const Mat3& b = r_gt.matrix();
  Mat3 m;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m(i, j) = a(i, 0) * b(j, 0) + a(i, 1) * b(j, 1) + a(i, 2) * b(j, 2);
  }
  const double c = std::clamp(0.5 * (m.trace() - 1.0), -1.0, 1.0);
  const Vec3 v(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
  const double s = 0.5 * v.norm();
  return rad2deg(std::atan2(s, c));
}

double translation_error_cm(const Vec3& t, const Vec3& t_gt) {
  return (t - t_gt).norm() * 100.0;
}

}  // namespace edgecalib
