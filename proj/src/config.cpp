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

#include "edgecalib/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>
#include <variant>
#include <vector>

#include "edgecalib/errors.hpp"

namespace edgecalib {
namespace {

using Field = std::variant<double CalibConfig::*, int CalibConfig::*,
                           bool CalibConfig::*, std::uint64_t CalibConfig::*,
                           IntensityNormalization CalibConfig::*>;

struct Entry {
  const char* key;
  Field field;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {"voxel_size", &CalibConfig::voxel_size},
      {"plane_inlier_threshold", &CalibConfig::plane_inlier_threshold},
      {"plane_min_inliers", &CalibConfig::plane_min_inliers},
      {"max_planes_per_voxel", &CalibConfig::max_planes_per_voxel},
      {"ransac_max_trials", &CalibConfig::ransac_max_trials},
      {"ransac_confidence", &CalibConfig::ransac_confidence},
      {"min_dihedral_deg", &CalibConfig::min_dihedral_deg},
      {"max_dihedral_deg", &CalibConfig::max_dihedral_deg},
      {"edge_sample_step", &CalibConfig::edge_sample_step},
      {"edge_support_distance", &CalibConfig::edge_support_distance},
      {"seed", &CalibConfig::seed},
      {"canny_low", &CalibConfig::canny_low},
      {"canny_high", &CalibConfig::canny_high},
      {"gaussian_sigma", &CalibConfig::gaussian_sigma},
      {"spherical_az_res", &CalibConfig::spherical_az_res},
      {"spherical_el_res", &CalibConfig::spherical_el_res},
      {"depth_jump_threshold", &CalibConfig::depth_jump_threshold},
      {"neighbor_radius_px", &CalibConfig::neighbor_radius_px},
      {"normal_radius_px", &CalibConfig::normal_radius_px},
      {"intensity_normalization", &CalibConfig::intensity_normalization},
      {"bleeding_filter", &CalibConfig::bleeding_filter},
      {"outermost_foreground", &CalibConfig::outermost_foreground},
      {"beam_divergence", &CalibConfig::beam_divergence},
      {"range_sigma", &CalibConfig::range_sigma},
      {"bearing_sigma", &CalibConfig::bearing_sigma},
      {"camera_sigma", &CalibConfig::camera_sigma},
      {"bias_correction", &CalibConfig::bias_correction},
      {"knn_k", &CalibConfig::knn_k},
      {"correspondence_max_px", &CalibConfig::correspondence_max_px},
      {"coarse_gate_factor", &CalibConfig::coarse_gate_factor},
      {"max_outer_iters", &CalibConfig::max_outer_iters},
      {"max_inner_iters", &CalibConfig::max_inner_iters},
      {"convergence_tol", &CalibConfig::convergence_tol},
      {"outer_convergence_tol", &CalibConfig::outer_convergence_tol},
      {"max_condition_number", &CalibConfig::max_condition_number},
      {"huber", &CalibConfig::huber},
      {"huber_delta", &CalibConfig::huber_delta},
      {"undistorted_input", &CalibConfig::undistorted_input},
      {"use_depth_continuous", &CalibConfig::use_depth_continuous},
      {"use_depth_discontinuous", &CalibConfig::use_depth_discontinuous},
      {"use_intensity_discontinuous", &CalibConfig::use_intensity_discontinuous},
  };
  return table;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(int line, std::string_view key, std::string_view value) {
  std::ostringstream os;
  os << "config line " << line << ": cannot parse value '" << value << "' for key '"
     << key << "'";
  throw CalibError(ErrorCode::kParse, os.str());
}

template <typename T>
T parse_number(int line, std::string_view key, std::string_view value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(line, key, value);
  return out;
}

void assign(CalibConfig& cfg, const Field& field, int line, std::string_view key,
            std::string_view value) {
  std::visit(
      [&](auto member) {
        using T = std::remove_cvref_t<decltype(cfg.*member)>;
        if constexpr (std::is_same_v<T, double>) {
          const double v = parse_number<double>(line, key, value);
          if (!std::isfinite(v)) bad_value(line, key, value);
          cfg.*member = v;
        } else if constexpr (std::is_same_v<T, int>) {
          cfg.*member = parse_number<int>(line, key, value);
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
          cfg.*member = parse_number<std::uint64_t>(line, key, value);
        } else if constexpr (std::is_same_v<T, bool>) {
          if (value == "true" || value == "1") {
            cfg.*member = true;
          } else if (value == "false" || value == "0") {
            cfg.*member = false;
          } else {
            bad_value(line, key, value);
          }
        } else {
          if (value == "minmax") {
            cfg.*member = IntensityNormalization::kMinMax;
          } else if (value == "percentile") {
            cfg.*member = IntensityNormalization::kPercentile;
          } else {
            bad_value(line, key, value);
          }
        }
      },
      field);
}

std::string format_value(const CalibConfig& cfg, const Field& field) {
  return std::visit(
      [&](auto member) -> std::string {
        using T = std::remove_cvref_t<decltype(cfg.*member)>;
        const T& v = cfg.*member;
        if constexpr (std::is_same_v<T, double>) {
          char buf[64];
          std::snprintf(buf, sizeof(buf), "%.17g", v);
          return buf;
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, IntensityNormalization>) {
          return v == IntensityNormalization::kMinMax ? "minmax" : "percentile";
        } else {
          return std::to_string(v);
        }
      },
      field);
}

void require(bool ok, const char* what) {
  if (!ok) throw CalibError(ErrorCode::kInvalidArgument, std::string("config: ") + what);
}

}  // namespace

void CalibConfig::validate() const {
  require(voxel_size > 0.0, "voxel_size must be > 0");
  require(plane_inlier_threshold > 0.0, "plane_inlier_threshold must be > 0");
  require(plane_min_inliers >= 3, "plane_min_inliers must be >= 3");
  require(max_planes_per_voxel > 0, "max_planes_per_voxel must be > 0");
  require(ransac_max_trials > 0, "ransac_max_trials must be > 0");
  require(ransac_confidence > 0.0 && ransac_confidence < 1.0,
          "ransac_confidence must be in (0, 1)");
  require(min_dihedral_deg > 0.0 && min_dihedral_deg < max_dihedral_deg &&
              max_dihedral_deg < 180.0,
          "dihedral gate must satisfy 0 < min < max < 180");
  require(edge_sample_step > 0.0, "edge_sample_step must be > 0");
  require(edge_support_distance > 0.0, "edge_support_distance must be > 0");
  require(canny_low > 0.0, "canny_low must be > 0");
  require(canny_low < canny_high, "canny_low must be < canny_high");
  require(gaussian_sigma > 0.0, "gaussian_sigma must be > 0");
  require(spherical_az_res > 0.0 && spherical_el_res > 0.0,
          "spherical resolutions must be > 0");
  require(depth_jump_threshold > 0.0, "depth_jump_threshold must be > 0");
  require(neighbor_radius_px > 0, "neighbor_radius_px must be > 0");
  require(normal_radius_px > 0, "normal_radius_px must be > 0");
  require(beam_divergence > 0.0, "beam_divergence must be > 0");
  require(range_sigma > 0.0, "range_sigma must be > 0");
  require(bearing_sigma > 0.0, "bearing_sigma must be > 0");
  require(camera_sigma > 0.0, "camera_sigma must be > 0");
  require(knn_k >= 2, "knn_k must be >= 2");
  require(correspondence_max_px >= 0.0, "correspondence_max_px must be >= 0");
  require(coarse_gate_factor >= 1.0, "coarse_gate_factor must be >= 1");
  require(max_outer_iters > 0, "max_outer_iters must be > 0");
  require(max_inner_iters > 0, "max_inner_iters must be > 0");
  require(convergence_tol > 0.0, "convergence_tol must be > 0");
  require(outer_convergence_tol > 0.0, "outer_convergence_tol must be > 0");
  require(max_condition_number > 1.0, "max_condition_number must be > 1");
  require(huber_delta > 0.0, "huber_delta must be > 0");
}

CalibConfig parse_config(const std::string& text) {
  CalibConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw CalibError(ErrorCode::kParse,
                       "config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    bool found = false;
    for (const Entry& e : entries()) {
      if (key == e.key) {
        assign(cfg, e.field, line_no, key, value);
        found = true;
        break;
      }
    }
    if (!found) {
      throw CalibError(ErrorCode::kParse, "config line " + std::to_string(line_no) +
                                              ": unknown key '" + std::string(key) + "'");
    }
  }
  cfg.validate();
  return cfg;
}

CalibConfig read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CalibError(ErrorCode::kIo, "cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string format_config(const CalibConfig& config) {
  std::ostringstream os;
  for (const Entry& e : entries()) {
    os << e.key << " = " << format_value(config, e.field) << "\n";
  }
  return os.str();
}

void write_config(const CalibConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw CalibError(ErrorCode::kIo, "cannot write config file: " + path);
  out << format_config(config);
  if (!out) throw CalibError(ErrorCode::kIo, "write failed: " + path);
}

}  // namespace edgecalib
