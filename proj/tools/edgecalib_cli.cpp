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

// Command-line front end. Talks to the library only through the C API.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "edgecalib/edgecalib.h"

namespace {

// Exit codes: 0 success, 1 input/usage, 2 degenerate geometry,
// 3 not enough data to calibrate.
int exit_code_for(ec_status s) {
  switch (s) {
    case EC_OK:
      return 0;
    case EC_ERR_DEGENERATE_GEOMETRY:
    case EC_ERR_DEGENERATE_RANGES:
    case EC_ERR_DEGENERATE_LINE:
    case EC_ERR_DEGENERATE_BIAS:
      return 2;
    case EC_ERR_INSUFFICIENT_CORRESPONDENCES:
    case EC_ERR_NO_IMAGE_EDGES:
    case EC_ERR_INSUFFICIENT_NEIGHBORS:
      return 3;
    default:
      return 1;
  }
}

// One machine-parseable line per failure.
void print_error(int code, const char* kind, const std::string& message) {
  std::string escaped;
  for (char c : message) {
    if (c == '"' || c == '\\') escaped += '\\';
    escaped += (c == '\n') ? ' ' : c;
  }
  std::fprintf(stderr, "edgecalib: error code=%d kind=%s message=\"%s\"\n", code, kind,
               escaped.c_str());
}

struct Failure {
  ec_status status;
};

void check(ec_status s) {
  if (s != EC_OK) throw Failure{s};
}

// RAII owners for C handles.
template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() {
    if (p) Free(p);
  }
  T** out() { return &p; }
};
using Cloud = Handle<ec_cloud, ec_cloud_free>;
using Image = Handle<ec_image, ec_image_free>;
using Config = Handle<ec_config, ec_config_free>;
using Report = Handle<ec_report, ec_report_free>;

struct Options {
  std::string cloud, image, intrinsics, init, extrinsics, config, out, debug_dir, reference;
  std::string scene = "mixed";
  std::optional<std::uint64_t> seed;
  double perturb_deg = 5.0;
  double perturb_cm = 10.0;
  std::string metrics_a, metrics_b;
  int verbosity = 0;
};

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    print_error(1, "io_error", "cannot create directory " + dir + ": " + ec.message());
    throw Failure{EC_OK};  // already reported
  }
}

void load_inputs(const Options& o, Cloud& cloud, Image& image, ec_intrinsics& k) {
  check(ec_cloud_load(o.cloud.c_str(), cloud.out()));
  check(ec_image_load(o.image.c_str(), image.out()));
  check(ec_intrinsics_load(o.intrinsics.c_str(), &k));
}

int cmd_calibrate(const Options& o) {
  Cloud cloud;
  Image image;
  ec_intrinsics k{};
  ec_extrinsics init{};
  load_inputs(o, cloud, image, k);
  check(ec_extrinsics_load(o.init.c_str(), &init));
  Config config;
  if (o.config.empty()) {
    check(ec_config_create(config.out()));
  } else {
    check(ec_config_load(o.config.c_str(), config.out()));
  }
  if (o.seed) check(ec_config_set_seed(config.p, *o.seed));
  if (!o.debug_dir.empty()) ensure_dir(o.debug_dir);
  Report report;
  check(ec_calibrate(cloud.p, image.p, &k, &init, config.p,
                     o.debug_dir.empty() ? nullptr : o.debug_dir.c_str(), report.out()));
  if (!o.reference.empty()) {
    ec_extrinsics ref{};
    check(ec_extrinsics_load(o.reference.c_str(), &ref));
    check(ec_report_set_reference(report.p, &ref));
  }
  check(ec_report_save(report.p, o.out.c_str()));
  if (o.verbosity > 0) {
    std::fprintf(stderr, "converged=%d outer_iterations=%d final_rms_px=%.4f\n",
                 ec_report_converged(report.p), ec_report_outer_iterations(report.p),
                 ec_report_final_rms(report.p));
  }
  return 0;
}

int cmd_simulate(const Options& o) {
  ensure_dir(o.out);
  check(ec_simulate(o.scene.c_str(), o.seed.value_or(0), o.out.c_str(), o.perturb_deg,
                    o.perturb_cm));
  if (o.verbosity > 0) std::fprintf(stderr, "wrote %s bundle to %s\n", o.scene.c_str(),
                                    o.out.c_str());
  return 0;
}

int cmd_overlay(const Options& o) {
  Cloud cloud;
  Image image;
  ec_intrinsics k{};
  ec_extrinsics t{};
  load_inputs(o, cloud, image, k);
  check(ec_extrinsics_load(o.extrinsics.c_str(), &t));
  check(ec_overlay(cloud.p, image.p, &k, &t, o.out.c_str()));
  return 0;
}

int cmd_colorize(const Options& o) {
  Cloud cloud;
  Image image;
  ec_intrinsics k{};
  ec_extrinsics t{};
  load_inputs(o, cloud, image, k);
  check(ec_extrinsics_load(o.extrinsics.c_str(), &t));
  size_t written = 0;
  check(ec_colorize(cloud.p, image.p, &k, &t, o.out.c_str(), &written));
  if (o.verbosity > 0) std::fprintf(stderr, "colored %zu points\n", written);
  return 0;
}

int cmd_metrics(const Options& o) {
  ec_extrinsics a{}, b{};
  check(ec_extrinsics_load(o.metrics_a.c_str(), &a));
  check(ec_extrinsics_load(o.metrics_b.c_str(), &b));
  double rot = 0.0, trans = 0.0;
  check(ec_metrics(&a, &b, &rot, &trans));
  std::printf("%.4f %.4f\n", rot, trans);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Targetless LiDAR-camera extrinsic calibration from multi-feature edges"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ec_version()));
  Options o;
  // Subcommands fall through to the global -v so it may follow them.
  app.fallthrough();
  app.add_flag("-v,--verbose", o.verbosity, "Summary on stderr");

  auto* cal = app.add_subcommand("calibrate", "Estimate the LiDAR-to-camera extrinsic");
  cal->add_option("--cloud", o.cloud, "Point cloud (PCD or PLY)")->required();
  cal->add_option("--image", o.image, "Camera image (PNG or PGM)")->required();
  cal->add_option("--intrinsics", o.intrinsics, "Intrinsics JSON")->required();
  cal->add_option("--init", o.init, "Initial extrinsics JSON")->required();
  cal->add_option("--config", o.config, "key = value config file");
  cal->add_option("--out", o.out, "Report JSON")->required();
  cal->add_option("--seed", o.seed, "Overrides the config seed");
  cal->add_option("--debug-dir", o.debug_dir, "Directory for intermediate artifacts");
  cal->add_option("--reference", o.reference, "Reference extrinsics; adds errors to the report");

  auto* sim = app.add_subcommand("simulate", "Write a synthetic fixture bundle");
  sim->add_option("--scene", o.scene, "corner_room | stripes | box_wall | mixed")
      ->capture_default_str();
  sim->add_option("--seed", o.seed, "Scene seed");
  sim->add_option("--out", o.out, "Output directory")->required();
  sim->add_option("--perturb-deg", o.perturb_deg, "Max init rotation offset (deg)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sim->add_option("--perturb-cm", o.perturb_cm, "Max init translation offset (cm)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  auto add_projection = [&](CLI::App* sub, const char* out_help) {
    sub->add_option("--cloud", o.cloud, "Point cloud (PCD or PLY)")->required();
    sub->add_option("--image", o.image, "Camera image (PNG or PGM)")->required();
    sub->add_option("--intrinsics", o.intrinsics, "Intrinsics JSON")->required();
    sub->add_option("--extrinsics", o.extrinsics, "Extrinsics JSON")->required();
    sub->add_option("--out", o.out, out_help)->required();
  };
  auto* ovl = app.add_subcommand("overlay", "Draw the projected cloud over the image");
  add_projection(ovl, "Output PNG");
  auto* col = app.add_subcommand("colorize", "Color the cloud from the image");
  add_projection(col, "Output PLY");

  auto* met = app.add_subcommand("metrics", "Rotation (deg) and translation (cm) error");
  met->add_option("a", o.metrics_a, "Extrinsics JSON")->required();
  met->add_option("b", o.metrics_b, "Extrinsics JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error(1, "usage_error", e.what());
    return 1;
  }

  try {
    if (*cal) return cmd_calibrate(o);
    if (*sim) return cmd_simulate(o);
    if (*ovl) return cmd_overlay(o);
    if (*col) return cmd_colorize(o);
    return cmd_metrics(o);
  } catch (const Failure& f) {
    if (f.status == EC_OK) return 1;
    const int code = exit_code_for(f.status);
    print_error(code, ec_status_name(f.status), ec_last_error());
    return code;
  }
}
