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

#ifndef EDGECALIB_CONFIG_HPP_
#define EDGECALIB_CONFIG_HPP_

#include <cstdint>
#include <string>

namespace edgecalib {

enum class IntensityNormalization { kMinMax, kPercentile };

/// All tunables of the pipeline. Defaults are engineering choices; every
/// field can be overridden through the `key = value` config file.
struct CalibConfig {
  // Depth-continuous extraction.
  double voxel_size = 1.0;                 // m
  double plane_inlier_threshold = 0.02;    // m
  int plane_min_inliers = 50;
  int max_planes_per_voxel = 3;
  int ransac_max_trials = 200;
  double ransac_confidence = 0.99;
  double min_dihedral_deg = 30.0;
  double max_dihedral_deg = 150.0;
  double edge_sample_step = 0.02;          // m
  double edge_support_distance = 0.05;     // m
  std::uint64_t seed = 0;

  // Image and intensity-image edges.
  double canny_low = 40.0;
  double canny_high = 110.0;
  double gaussian_sigma = 1.4;             // px
  double spherical_az_res = 0.002;         // rad
  double spherical_el_res = 0.002;         // rad
  double depth_jump_threshold = 0.3;       // m
  int neighbor_radius_px = 2;
  int normal_radius_px = 4;
  IntensityNormalization intensity_normalization = IntensityNormalization::kMinMax;
  bool bleeding_filter = true;
  // Depth-discontinuous pixels resolve to the outermost foreground point of
  // their 3x3 neighborhood; false selects the minimum-range contributor.
  bool outermost_foreground = true;

  // Noise model and beam bias.
  double beam_divergence = 0.0028;         // rad, full cone angle
  double range_sigma = 0.02;               // m
  double bearing_sigma = 0.00087;          // rad
  double camera_sigma = 1.0;               // px
  bool bias_correction = true;

  // Registration.
  int knn_k = 5;
  double correspondence_max_px = 4.0;     // px, final gate
  double coarse_gate_factor = 25.0;      // first outer iteration gates at factor * max_px
  int max_outer_iters = 20;
  int max_inner_iters = 50;
  double convergence_tol = 1e-8;
  double outer_convergence_tol = 1e-4;
  double max_condition_number = 1e12;
  bool huber = true;
  double huber_delta = 1.345;
  bool undistorted_input = false;

  // Feature classes fed to the optimizer.
  bool use_depth_continuous = true;
  bool use_depth_discontinuous = true;
  bool use_intensity_discontinuous = true;

  /// Throws CalibError(kInvalidArgument) when an invariant is violated.
  void validate() const;
};

CalibConfig parse_config(const std::string& text);
CalibConfig read_config(const std::string& path);
std::string format_config(const CalibConfig& config);
void write_config(const CalibConfig& config, const std::string& path);

}  // namespace edgecalib

#endif  // EDGECALIB_CONFIG_HPP_
