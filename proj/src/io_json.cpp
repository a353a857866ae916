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

#include <cmath>
#include <fstream>
#include <sstream>

#include "edgecalib/errors.hpp"
#include "edgecalib/io.hpp"
#include "json.hpp"

namespace edgecalib {
namespace {

using nlohmann::json;

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw CalibError(ErrorCode::kParse, std::string(what) + ": " + e.what());
  }
}

double finite_number(const json& j, const char* what) {
  if (!j.is_number()) throw CalibError(ErrorCode::kParse, std::string(what) + ": expected number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw CalibError(ErrorCode::kParse, std::string(what) + ": not finite");
  return v;
}

const json& member(const json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key)) {
    throw CalibError(ErrorCode::kParse, std::string(what) + ": missing key '" + key + "'");
  }
  return j.at(key);
}

void require_array(const json& j, std::size_t n, const char* what) {
  if (!j.is_array() || j.size() != n) {
    throw CalibError(ErrorCode::kParse,
                     std::string(what) + ": expected array of " + std::to_string(n));
  }
}

}  // namespace

std::string extrinsics_to_json(const RigidTransform& t) {
  json j;
  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rot.push_back(t.rotation.matrix()(r, c));
  }
  j["rotation"] = rot;
  j["translation"] = {t.translation.x(), t.translation.y(), t.translation.z()};
  return j.dump(2) + "\n";
}

RigidTransform extrinsics_from_json(const std::string& text) {
  const json j = parse_json(text, "extrinsics");
  const json& rot = member(j, "rotation", "extrinsics");
  const json& tr = member(j, "translation", "extrinsics");
  require_array(rot, 9, "extrinsics.rotation");
  require_array(tr, 3, "extrinsics.translation");
  Mat3 m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = finite_number(rot[i], "extrinsics.rotation");
  RigidTransform t;
  try {
    t.rotation = Rotation::FromMatrix(m);
  } catch (const CalibError&) {
    // Hand-written files carry rounded entries; accept them if close to SO(3).
    if ((m.transpose() * m - Mat3::Identity()).norm() > 1e-4 || m.determinant() < 0.0) {
      throw CalibError(ErrorCode::kParse, "extrinsics.rotation is not a rotation matrix");
    }
    t.rotation = Rotation::Orthonormalized(m);
  }
  for (int i = 0; i < 3; ++i) t.translation[i] = finite_number(tr[i], "extrinsics.translation");
  return t;
}

RigidTransform read_extrinsics(const std::string& path) {
  return extrinsics_from_json(read_text_file(path));
}

void write_extrinsics(const RigidTransform& t, const std::string& path) {
  write_text_file(path, extrinsics_to_json(t));
}

std::string intrinsics_to_json(const CameraIntrinsics& k) {
  json j;
  j["fx"] = k.fx;
  j["fy"] = k.fy;
  j["cx"] = k.cx;
  j["cy"] = k.cy;
  j["dist"] = k.distortion;
  j["width"] = k.width;
  j["height"] = k.height;
  return j.dump(2) + "\n";
}

CameraIntrinsics intrinsics_from_json(const std::string& text) {
  const json j = parse_json(text, "intrinsics");
  CameraIntrinsics k;
  k.fx = finite_number(member(j, "fx", "intrinsics"), "intrinsics.fx");
  k.fy = finite_number(member(j, "fy", "intrinsics"), "intrinsics.fy");
  k.cx = finite_number(member(j, "cx", "intrinsics"), "intrinsics.cx");
  k.cy = finite_number(member(j, "cy", "intrinsics"), "intrinsics.cy");
  if (j.contains("dist")) {
    require_array(j.at("dist"), 5, "intrinsics.dist");
    for (int i = 0; i < 5; ++i) k.distortion[i] = finite_number(j.at("dist")[i], "intrinsics.dist");
  }
  const json& w = member(j, "width", "intrinsics");
  const json& h = member(j, "height", "intrinsics");
  if (!w.is_number_integer() || !h.is_number_integer()) {
    throw CalibError(ErrorCode::kParse, "intrinsics: width/height must be integers");
  }
  k.width = w.get<int>();
  k.height = h.get<int>();
  try {
    k.validate();
  } catch (const CalibError& e) {
    throw CalibError(ErrorCode::kParse, e.what());
  }
  return k;
}

CameraIntrinsics read_intrinsics(const std::string& path) {
  return intrinsics_from_json(read_text_file(path));
}

void write_intrinsics(const CameraIntrinsics& k, const std::string& path) {
  write_text_file(path, intrinsics_to_json(k));
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CalibError(ErrorCode::kIo, "cannot write file: " + path);
  out << content;
  if (!out) throw CalibError(ErrorCode::kIo, "write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CalibError(ErrorCode::kIo, "cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace edgecalib
