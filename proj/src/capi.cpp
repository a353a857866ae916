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

#include "edgecalib/edgecalib.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <utility>

#include "edgecalib/config.hpp"
#include "edgecalib/errors.hpp"
#include "edgecalib/io.hpp"
#include "edgecalib/pipeline.hpp"
#include "edgecalib/registration.hpp"
#include "edgecalib/simulator.hpp"

struct ec_cloud {
  edgecalib::IntensityPointCloud cloud;
};
struct ec_image {
  edgecalib::GrayImage image;
};
struct ec_config {
  edgecalib::CalibConfig config;
};
struct ec_report {
  edgecalib::CalibrationReport report;
};

namespace {

using namespace edgecalib;

thread_local std::string g_last_error;

// ErrorCode values map one-to-one onto ec_status, shifted past EC_OK.
ec_status status_of(ErrorCode code) { return static_cast<ec_status>(static_cast<int>(code) + 1); }

ec_status fail(ec_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `body`, translating exceptions into a status and a thread-local
// message.
template <typename F>
ec_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return EC_OK;
  } catch (const CalibError& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(EC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(EC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(EC_ERR_INTERNAL, "unknown failure");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw CalibError(ErrorCode::kInvalidArgument, what);
}

CameraIntrinsics to_cpp(const ec_intrinsics& k) {
  CameraIntrinsics out;
  out.fx = k.fx;
  out.fy = k.fy;
  out.cx = k.cx;
  out.cy = k.cy;
  for (int i = 0; i < 5; ++i) out.distortion[i] = k.dist[i];
  out.width = k.width;
  out.height = k.height;
  out.validate();
  return out;
}

ec_intrinsics to_c(const CameraIntrinsics& k) {
  ec_intrinsics out{};
  out.fx = k.fx;
  out.fy = k.fy;
  out.cx = k.cx;
  out.cy = k.cy;
  for (int i = 0; i < 5; ++i) out.dist[i] = k.distortion[i];
  out.width = k.width;
  out.height = k.height;
  return out;
}

RigidTransform to_cpp(const ec_extrinsics& t) {
  Mat3 r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) r(i, j) = t.rotation[3 * i + j];
  }
  RigidTransform out;
  out.rotation = Rotation::FromMatrix(r);
  out.translation = Vec3(t.translation[0], t.translation[1], t.translation[2]);
  return out;
}

ec_extrinsics to_c(const RigidTransform& t) {
  ec_extrinsics out{};
  const Mat3 r = t.rotation.matrix();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out.rotation[3 * i + j] = r(i, j);
    out.translation[i] = t.translation[i];
  }
  return out;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string join(const char* dir, const char* name) {
  std::string base(dir);
  if (!base.empty() && base.back() != '/') base += '/';
  return base + name;
}

}  // namespace

extern "C" {

const char* ec_version(void) { return "1.0.0"; }

const char* ec_last_error(void) { return g_last_error.c_str(); }

const char* ec_status_name(ec_status status) {
  if (status == EC_OK) return "ok";
  if (status == EC_ERR_INTERNAL) return "internal_error";
  if (status > EC_OK && status < EC_ERR_INTERNAL) {
    return to_string(static_cast<ErrorCode>(static_cast<int>(status) - 1));
  }
  return "unknown_status";
}

void ec_string_free(char* s) { std::free(s); }

ec_status ec_cloud_load(const char* path, ec_cloud** out) {
  return guarded([&] {
    require(path && out, "ec_cloud_load: null argument");
    auto result = read_point_cloud(path);
    *out = new ec_cloud{std::move(result.cloud)};
  });
}

ec_status ec_cloud_create(const float* xyzi, size_t n, ec_cloud** out) {
  return guarded([&] {
    require(out && (xyzi || n == 0), "ec_cloud_create: null argument");
    auto* c = new ec_cloud;
    c->cloud.points.resize(n);
    for (size_t i = 0; i < n; ++i) {
      const float* r = xyzi + 4 * i;
      c->cloud.points[i].position = Vec3(r[0], r[1], r[2]);
      c->cloud.points[i].intensity = r[3];
    }
    *out = c;
  });
}

size_t ec_cloud_size(const ec_cloud* cloud) { return cloud ? cloud->cloud.size() : 0; }

ec_status ec_cloud_get(const ec_cloud* cloud, size_t index, float xyzi[4]) {
  return guarded([&] {
    require(cloud && xyzi, "ec_cloud_get: null argument");
    require(index < cloud->cloud.size(), "ec_cloud_get: index out of range");
    const auto& p = cloud->cloud.points[index];
    for (int i = 0; i < 3; ++i) xyzi[i] = static_cast<float>(p.position[i]);
    xyzi[3] = static_cast<float>(p.intensity);
  });
}

ec_status ec_cloud_save_pcd(const ec_cloud* cloud, const char* path, int binary) {
  return guarded([&] {
    require(cloud && path, "ec_cloud_save_pcd: null argument");
    write_point_cloud_pcd(cloud->cloud, path, binary ? PcdEncoding::kBinary : PcdEncoding::kAscii);
  });
}

void ec_cloud_free(ec_cloud* cloud) { delete cloud; }

ec_status ec_image_load(const char* path, ec_image** out) {
  return guarded([&] {
    require(path && out, "ec_image_load: null argument");
    *out = new ec_image{read_image(path)};
  });
}

ec_status ec_image_create(const uint8_t* pixels, int width, int height, ec_image** out) {
  return guarded([&] {
    require(pixels && out, "ec_image_create: null argument");
    require(width > 0 && height > 0, "ec_image_create: non-positive size");
    auto* img = new ec_image{GrayImage(width, height)};
    std::memcpy(img->image.data.data(), pixels, img->image.data.size());
    *out = img;
  });
}

int ec_image_width(const ec_image* image) { return image ? image->image.width : 0; }
int ec_image_height(const ec_image* image) { return image ? image->image.height : 0; }
const uint8_t* ec_image_data(const ec_image* image) {
  return image ? image->image.data.data() : nullptr;
}

ec_status ec_image_save_png(const ec_image* image, const char* path) {
  return guarded([&] {
    require(image && path, "ec_image_save_png: null argument");
    write_png(image->image, path);
  });
}

void ec_image_free(ec_image* image) { delete image; }

ec_status ec_intrinsics_load(const char* path, ec_intrinsics* out) {
  return guarded([&] {
    require(path && out, "ec_intrinsics_load: null argument");
    *out = to_c(read_intrinsics(path));
  });
}

ec_status ec_intrinsics_save(const ec_intrinsics* k, const char* path) {
  return guarded([&] {
    require(k && path, "ec_intrinsics_save: null argument");
    write_intrinsics(to_cpp(*k), path);
  });
}

ec_status ec_extrinsics_load(const char* path, ec_extrinsics* out) {
  return guarded([&] {
    require(path && out, "ec_extrinsics_load: null argument");
    *out = to_c(read_extrinsics(path));
  });
}

ec_status ec_extrinsics_save(const ec_extrinsics* t, const char* path) {
  return guarded([&] {
    require(t && path, "ec_extrinsics_save: null argument");
    write_extrinsics(to_cpp(*t), path);
  });
}

ec_status ec_config_create(ec_config** out) {
  return guarded([&] {
    require(out, "ec_config_create: null argument");
    *out = new ec_config;
  });
}

ec_status ec_config_load(const char* path, ec_config** out) {
  return guarded([&] {
    require(path && out, "ec_config_load: null argument");
    *out = new ec_config{read_config(path)};
  });
}

ec_status ec_config_set(ec_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config && key && value, "ec_config_set: null argument");
    // Re-parse the full text so the override goes through the same
    // validation as a config file.
    config->config =
        parse_config(format_config(config->config) + key + " = " + value + "\n");
  });
}

ec_status ec_config_set_seed(ec_config* config, uint64_t seed) {
  return guarded([&] {
    require(config, "ec_config_set_seed: null argument");
    config->config.seed = seed;
  });
}

ec_status ec_config_to_string(const ec_config* config, char** out) {
  return guarded([&] {
    require(config && out, "ec_config_to_string: null argument");
    *out = dup_string(format_config(config->config));
  });
}

void ec_config_free(ec_config* config) { delete config; }

ec_status ec_calibrate(const ec_cloud* cloud, const ec_image* image, const ec_intrinsics* k,
                       const ec_extrinsics* init, const ec_config* config,
                       const char* debug_dir, ec_report** out) {
  return guarded([&] {
    require(cloud && image && k && init && out, "ec_calibrate: null argument");
    const CalibConfig cfg = config ? config->config : CalibConfig{};
    const CameraIntrinsics intr = to_cpp(*k);
    CalibrationRun run = calibrate(cloud->cloud, image->image, intr, to_cpp(*init), cfg);
    if (debug_dir) write_debug_artifacts(debug_dir, run, image->image, intr);
    *out = new ec_report{std::move(run.report)};
  });
}

ec_status ec_report_extrinsics(const ec_report* report, ec_extrinsics* out) {
  return guarded([&] {
    require(report && out, "ec_report_extrinsics: null argument");
    *out = to_c(report->report.extrinsics);
  });
}

int ec_report_converged(const ec_report* report) {
  return report && report->report.converged ? 1 : 0;
}

int ec_report_outer_iterations(const ec_report* report) {
  return report ? report->report.outer_iterations : 0;
}

double ec_report_final_rms(const ec_report* report) {
  return report ? report->report.final_rms : 0.0;
}

ec_status ec_report_set_reference(ec_report* report, const ec_extrinsics* reference) {
  return guarded([&] {
    require(report && reference, "ec_report_set_reference: null argument");
    attach_errors(report->report, to_cpp(*reference));
  });
}

ec_status ec_report_to_json(const ec_report* report, char** out) {
  return guarded([&] {
    require(report && out, "ec_report_to_json: null argument");
    *out = dup_string(report_to_json(report->report));
  });
}

ec_status ec_report_save(const ec_report* report, const char* path) {
  return guarded([&] {
    require(report && path, "ec_report_save: null argument");
    write_text_file(path, report_to_json(report->report));
  });
}

void ec_report_free(ec_report* report) { delete report; }

ec_status ec_metrics(const ec_extrinsics* a, const ec_extrinsics* b, double* rotation_deg,
                     double* translation_cm) {
  return guarded([&] {
    require(a && b && rotation_deg && translation_cm, "ec_metrics: null argument");
    const RigidTransform ta = to_cpp(*a), tb = to_cpp(*b);
    *rotation_deg = rotation_error_deg(ta.rotation, tb.rotation);
    *translation_cm = translation_error_cm(ta.translation, tb.translation);
  });
}

ec_status ec_overlay(const ec_cloud* cloud, const ec_image* image, const ec_intrinsics* k,
                     const ec_extrinsics* t, const char* out_png) {
  return guarded([&] {
    require(cloud && image && k && t && out_png, "ec_overlay: null argument");
    write_png(render_overlay(cloud->cloud, image->image, to_cpp(*k), to_cpp(*t)), out_png);
  });
}

ec_status ec_colorize(const ec_cloud* cloud, const ec_image* image, const ec_intrinsics* k,
                      const ec_extrinsics* t, const char* out_ply, size_t* written) {
  return guarded([&] {
    require(cloud && image && k && t && out_ply, "ec_colorize: null argument");
    const std::size_t n =
        write_colored_cloud(cloud->cloud, image->image, to_cpp(*k), to_cpp(*t), out_ply);
    if (written) *written = n;
  });
}

ec_status ec_simulate(const char* scene, uint64_t seed, const char* out_dir, double max_deg,
                      double max_cm) {
  return guarded([&] {
    require(scene && out_dir, "ec_simulate: null argument");
    require(max_deg >= 0.0 && max_cm >= 0.0, "ec_simulate: negative perturbation");
    const BenchmarkScene b = make_benchmark_scene(scene, seed);
    write_point_cloud_pcd(raycast(b.scene, b.lidar), join(out_dir, "cloud.pcd"),
                          PcdEncoding::kBinary);
    write_png(render_camera(b.scene, b.intrinsics, b.t_gt), join(out_dir, "image.png"));
    write_intrinsics(b.intrinsics, join(out_dir, "intrinsics.json"));
    write_extrinsics(b.t_gt, join(out_dir, "extrinsics_gt.json"));
    write_text_file(join(out_dir, "edges_gt.json"),
                    ground_truth_edges_to_json(ground_truth_edges(b.scene)));
    if (max_deg > 0.0 || max_cm > 0.0) {
      // Same perturbation seed offset as the benchmark protocol.
      write_extrinsics(perturb(b.t_gt, max_deg, max_cm, seed + 1000), join(out_dir, "init.json"));
    }
  });
}

}  // extern "C"
