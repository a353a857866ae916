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

#ifndef EDGECALIB_GEOMETRY_HPP_
#define EDGECALIB_GEOMETRY_HPP_

#include <array>
#include <optional>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace edgecalib {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat23 = Eigen::Matrix<double, 2, 3>;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Increment in the tangent space of SE(3). Components 0..2 are the rotation
/// (so(3), radians), components 3..5 the translation (meters).
using Tangent = Vec6;

/// Proper rotation matrix. Construction through FromMatrix() validates
/// orthonormality and det = +1 to 1e-9.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  static Rotation FromMatrix(const Mat3& m);
  /// Projects an arbitrary 3x3 matrix onto SO(3) (SVD), for parsers that read
  /// rounded text.
  static Rotation Orthonormalized(const Mat3& m);

  const Mat3& matrix() const { return m_; }
  Rotation inverse() const { return Rotation(m_.transpose(), 0); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }
  Rotation operator*(const Rotation& o) const { return Rotation(m_ * o.m_, 0); }

 private:
  Rotation(const Mat3& m, int /*unchecked*/) : m_(m) {}
  friend Rotation exp_so3(const Vec3& omega);
  Mat3 m_;
};

/// Rigid transform x -> R x + t. Used for the LiDAR-to-camera extrinsic.
struct RigidTransform {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  static RigidTransform Identity() { return {}; }
  RigidTransform inverse() const;
  RigidTransform operator*(const RigidTransform& o) const;
  Eigen::Matrix4d homogeneous() const;
};

Mat3 hat(const Vec3& v);

Rotation exp_so3(const Vec3& omega);
Vec3 log_so3(const Rotation& r);

/// Left Jacobian of SO(3) and its inverse.
Mat3 left_jacobian_so3(const Vec3& omega);
Mat3 left_jacobian_so3_inverse(const Vec3& omega);

/// Full SE(3) exponential: translation is coupled through the left Jacobian.
RigidTransform exp_se3(const Tangent& delta);
Tangent log_se3(const RigidTransform& t);

/// Left-multiplicative retraction: Exp(delta) * T.
RigidTransform boxplus(const RigidTransform& t, const Tangent& delta);

inline Vec3 transform_point(const RigidTransform& t, const Vec3& p) {
  return t.rotation.matrix() * p + t.translation;
}

/// Pinhole intrinsics with 5-parameter radial-tangential distortion
/// (k1, k2, p1, p2, k3), OpenCV ordering.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  std::array<double, 5> distortion{};
  int width = 0;
  int height = 0;

  /// Throws CalibError(kInvalidArgument) on fx, fy, width or height <= 0.
  void validate() const;
  bool has_distortion() const;
};

/// Applies distortion to normalized image coordinates.
Vec2 distort(const Vec2& xn, const std::array<double, 5>& d);
/// d(distort)/d(xn).
Mat2 distort_jacobian(const Vec2& xn, const std::array<double, 5>& d);
/// Fixed-point inversion of distort(); converges for the moderate
/// distortion found in calibrated perspective cameras.
Vec2 undistort(const Vec2& xd, const std::array<double, 5>& d);

/// Projects a camera-frame point. Returns nullopt for Z <= 0 and for points
/// where the distortion polynomial folds back (outside its valid domain).
std::optional<Vec2> project(const Vec3& pc, const CameraIntrinsics& k);

struct ProjectionWithJacobian {
  Vec2 pixel;
  Mat23 jacobian;  // d(pixel)/d(pc)
};
std::optional<ProjectionWithJacobian> project_with_jacobian(
    const Vec3& pc, const CameraIntrinsics& k);

/// Viewing ray (camera frame, z = 1) through a pixel.
Vec3 unproject(const Vec2& pixel, const CameraIntrinsics& k);

/// True if the pixel rounds to a location inside the image.
bool in_image(const Vec2& pixel, const CameraIntrinsics& k);

double rotation_error_deg(const Rotation& r, const Rotation& r_gt);
double translation_error_cm(const Vec3& t, const Vec3& t_gt);

constexpr double kPi = 3.14159265358979323846;
constexpr double deg2rad(double d) { return d * kPi / 180.0; }
constexpr double rad2deg(double r) { return r * 180.0 / kPi; }

}  // namespace edgecalib

#endif  // EDGECALIB_GEOMETRY_HPP_
