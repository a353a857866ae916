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

/* C interface to the edgecalib library. All objects are opaque handles
 * created and released through this API; every fallible call returns an
 * ec_status and leaves a message retrievable with ec_last_error() on the
 * calling thread. Output pointers are written only on EC_OK. */

#ifndef EDGECALIB_EDGECALIB_H_
#define EDGECALIB_EDGECALIB_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define EC_API __declspec(dllexport)
#elif defined(__GNUC__)
#define EC_API __attribute__((visibility("default")))
#else
#define EC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ec_status {
  EC_OK = 0,
  EC_ERR_IO = 1,
  EC_ERR_PARSE = 2,
  EC_ERR_INVALID_ARGUMENT = 3,
  EC_ERR_UNSUPPORTED_FORMAT = 4,
  EC_ERR_CORRUPT_STREAM = 5,
  EC_ERR_DEGENERATE_RANGES = 6,
  EC_ERR_NO_IMAGE_EDGES = 7,
  EC_ERR_INSUFFICIENT_NEIGHBORS = 8,
  EC_ERR_DEGENERATE_LINE = 9,
  EC_ERR_DEGENERATE_BIAS = 10,
  EC_ERR_INSUFFICIENT_CORRESPONDENCES = 11,
  EC_ERR_DEGENERATE_GEOMETRY = 12,
  EC_ERR_UNKNOWN_SCENE = 13,
  EC_ERR_INTERNAL = 14
} ec_status;

typedef struct ec_cloud ec_cloud;
typedef struct ec_image ec_image;
typedef struct ec_config ec_config;
typedef struct ec_report ec_report;

/* Pinhole camera with Brown-Conrady distortion (k1, k2, p1, p2, k3). */
typedef struct ec_intrinsics {
  double fx, fy, cx, cy;
  double dist[5];
  int width, height;
} ec_intrinsics;

/* LiDAR-to-camera rigid transform: x_cam = R x_lidar + t, R row-major. */
typedef struct ec_extrinsics {
  double rotation[9];
  double translation[3]; /* m */
} ec_extrinsics;

EC_API const char* ec_version(void);
/* Message of the last failure on this thread; empty string if none. */
EC_API const char* ec_last_error(void);
/* Stable identifier such as "degenerate_geometry". */
EC_API const char* ec_status_name(ec_status status);
EC_API void ec_string_free(char* s);

/* Point clouds: PCD (ascii / binary) or ASCII PLY with x y z intensity. */
EC_API ec_status ec_cloud_load(const char* path, ec_cloud** out);
/* xyzi holds n interleaved (x, y, z, intensity) records. */
EC_API ec_status ec_cloud_create(const float* xyzi, size_t n, ec_cloud** out);
EC_API size_t ec_cloud_size(const ec_cloud* cloud);
EC_API ec_status ec_cloud_get(const ec_cloud* cloud, size_t index, float xyzi[4]);
EC_API ec_status ec_cloud_save_pcd(const ec_cloud* cloud, const char* path, int binary);
EC_API void ec_cloud_free(ec_cloud* cloud);

/* 8-bit grayscale images: PNG or PGM in, PNG out. */
EC_API ec_status ec_image_load(const char* path, ec_image** out);
EC_API ec_status ec_image_create(const uint8_t* pixels, int width, int height, ec_image** out);
EC_API int ec_image_width(const ec_image* image);
EC_API int ec_image_height(const ec_image* image);
EC_API const uint8_t* ec_image_data(const ec_image* image);
EC_API ec_status ec_image_save_png(const ec_image* image, const char* path);
EC_API void ec_image_free(ec_image* image);

EC_API ec_status ec_intrinsics_load(const char* path, ec_intrinsics* out);
EC_API ec_status ec_intrinsics_save(const ec_intrinsics* k, const char* path);
EC_API ec_status ec_extrinsics_load(const char* path, ec_extrinsics* out);
EC_API ec_status ec_extrinsics_save(const ec_extrinsics* t, const char* path);

/* Configuration: defaults, a `key = value` file, or single overrides. */
EC_API ec_status ec_config_create(ec_config** out);
EC_API ec_status ec_config_load(const char* path, ec_config** out);
EC_API ec_status ec_config_set(ec_config* config, const char* key, const char* value);
EC_API ec_status ec_config_set_seed(ec_config* config, uint64_t seed);
/* Caller releases the text with ec_string_free. */
EC_API ec_status ec_config_to_string(const ec_config* config, char** out);
EC_API void ec_config_free(ec_config* config);

/* Full pipeline. `config` may be NULL for defaults; `debug_dir` may be NULL,
 * otherwise it must exist and receives the intermediate artifacts. On
 * failures after extraction (e.g. degenerate geometry) no report is made. */
EC_API ec_status ec_calibrate(const ec_cloud* cloud, const ec_image* image,
                              const ec_intrinsics* k, const ec_extrinsics* init,
                              const ec_config* config, const char* debug_dir, ec_report** out);
EC_API ec_status ec_report_extrinsics(const ec_report* report, ec_extrinsics* out);
EC_API int ec_report_converged(const ec_report* report);
EC_API int ec_report_outer_iterations(const ec_report* report);
EC_API double ec_report_final_rms(const ec_report* report);
/* Fills errors against a reference transform; they appear in the JSON. */
EC_API ec_status ec_report_set_reference(ec_report* report, const ec_extrinsics* reference);
EC_API ec_status ec_report_to_json(const ec_report* report, char** out);
EC_API ec_status ec_report_save(const ec_report* report, const char* path);
EC_API void ec_report_free(ec_report* report);

/* Rotation error in degrees and translation error in centimeters. */
EC_API ec_status ec_metrics(const ec_extrinsics* a, const ec_extrinsics* b, double* rotation_deg,
                            double* translation_cm);

/* Cloud drawn over the image, colored by intensity with a jet map (PNG). */
EC_API ec_status ec_overlay(const ec_cloud* cloud, const ec_image* image, const ec_intrinsics* k,
                            const ec_extrinsics* t, const char* out_png);
/* Points that project into the image, colored by the pixel under them (PLY). */
EC_API ec_status ec_colorize(const ec_cloud* cloud, const ec_image* image,
                             const ec_intrinsics* k, const ec_extrinsics* t, const char* out_ply,
                             size_t* written);

/* Writes cloud.pcd, image.png, intrinsics.json, extrinsics_gt.json and
 * edges_gt.json for a benchmark scene ("corner_room", "stripes", "box_wall",
 * "mixed") into an existing directory. When max_deg or max_cm is positive
 * a perturbed init.json is written as well. */
EC_API ec_status ec_simulate(const char* scene, uint64_t seed, const char* out_dir,
                             double max_deg, double max_cm);

#ifdef __cplusplus
}
#endif

#endif /* EDGECALIB_EDGECALIB_H_ */
