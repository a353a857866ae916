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

#ifndef EDGECALIB_REGISTRATION_HPP_
#define EDGECALIB_REGISTRATION_HPP_

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "edgecalib/config.hpp"
#include "edgecalib/edge_types.hpp"
#include "edgecalib/geometry.hpp"
#include "edgecalib/image_edge.hpp"

namespace edgecalib {

struct Correspondence {
  EdgePoint3D point;
  LineFeature line;
  double sigma_sq = 1.0;  // px^2
  double weight = 1.0;    // 1 / sigma_sq
};

NoiseModel noise_model(const CalibConfig& config);

/// Point-to-line residual n^T (pi(T (P - E)) - q); nullopt behind the camera.
std::optional<double> residual(const Correspondence& c, const RigidTransform& t,
                               const CameraIntrinsics& k);

/// d residual / d delta at delta = 0 under T <- Exp(delta) T.
std::optional<Vec6> residual_jacobian(const Correspondence& c, const RigidTransform& t,
                                      const CameraIntrinsics& k);

/// n^T J_pi R Sigma R^T J_pi^T n + camera_sigma^2 n^T n.
std::optional<double> residual_variance(const Correspondence& c, const RigidTransform& t,
                                        const CameraIntrinsics& k, const NoiseModel& model);

/// Projects every edge point, gates the nearest image edge pixel at `gate_px`
/// and fits a line to its knn_k neighbors. Throws
/// kInsufficientCorrespondences below 10 matches.
std::vector<Correspondence> build_correspondences(const std::vector<EdgePoint3D>& edges,
                                                  const EdgeIndex& image_edges,
                                                  const RigidTransform& t,
                                                  const CameraIntrinsics& k,
                                                  const CalibConfig& config, double gate_px);

inline constexpr std::size_t kMinCorrespondences = 10;

struct IterationRecord {
  int outer = 0;
  int inner = 0;
  double cost = 0.0;       // robust cost after the step
  double rms = 0.0;        // px, plain residual RMS after the step
  std::size_t correspondences = 0;
  double step_norm = 0.0;
  double lambda = 0.0;     // damping used for the accepted step, 0 for plain Gauss-Newton
};

struct CalibrationReport {
  RigidTransform extrinsics;
  int outer_iterations = 0;
  int inner_iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> trace;
  std::vector<std::size_t> correspondences_per_outer;
  std::vector<double> rms_per_outer;  // px, at the end of each outer iteration
  std::array<std::size_t, 3> class_counts{};  // correspondences by EdgeClass, last outer
  std::array<std::size_t, 3> extracted_counts{};  // edge points fed to the solver
  double final_rms = 0.0;
  std::optional<double> rotation_error_deg;
  std::optional<double> translation_error_cm;
};

/// Robust Gauss-Newton with Levenberg fallback. Correspondences are rebuilt
/// once per outer iteration. Throws kDegenerateGeometry when the normal
/// matrix is ill-conditioned and kInsufficientCorrespondences when matching
/// fails.
CalibrationReport gauss_newton_solve(const std::vector<EdgePoint3D>& edges,
                                     const EdgeIndex& image_edges, const CameraIntrinsics& k,
                                     const RigidTransform& t_init, const CalibConfig& config);

/// Normal equations of the current correspondence set.
struct NormalEquations {
  Mat6 h = Mat6::Zero();
  Vec6 g = Vec6::Zero();
  double cost = 0.0;
  std::size_t used = 0;
};
NormalEquations accumulate_normal_equations(const std::vector<Correspondence>& corr,
                                            const RigidTransform& t, const CameraIntrinsics& k,
                                            const CalibConfig& config);
double condition_number(const Mat6& h);

std::string report_to_json(const CalibrationReport& report);

}  // namespace edgecalib

#endif  // EDGECALIB_REGISTRATION_HPP_
