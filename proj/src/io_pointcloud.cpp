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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string_view>

#include "edgecalib/errors.hpp"
#include "edgecalib/io.hpp"

namespace edgecalib {
namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

bool ends_with(const std::string& s, std::string_view suffix) {
  if (s.size() < suffix.size()) return false;
  std::string tail = s.substr(s.size() - suffix.size());
  std::transform(tail.begin(), tail.end(), tail.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return tail == suffix;
}

[[noreturn]] void header_error(const std::string& path, const std::string& what) {
  throw CalibError(ErrorCode::kParse, "malformed header in " + path + ": " + what);
}

struct FieldSlot {
  int x = -1, y = -1, z = -1, intensity = -1;
};

FieldSlot locate_fields(const std::vector<std::string>& names, const std::string& path) {
  FieldSlot s;
  for (int i = 0; i < static_cast<int>(names.size()); ++i) {
    if (names[i] == "x") s.x = i;
    if (names[i] == "y") s.y = i;
    if (names[i] == "z") s.z = i;
    if (names[i] == "intensity") s.intensity = i;
  }
  if (s.x < 0 || s.y < 0 || s.z < 0) {
    throw CalibError(ErrorCode::kUnsupportedFormat, path + ": fields x y z are required");
  }
  if (s.intensity < 0) {
    throw CalibError(ErrorCode::kUnsupportedFormat,
                     path + ": intensity channel required");
  }
  return s;
}

double parse_value(std::string_view tok, bool single_precision, bool& ok) {
  const char* end = tok.data() + tok.size();
  if (single_precision) {
    float f = 0.0f;
    auto [ptr, ec] = std::from_chars(tok.data(), end, f);
    ok = (ec == std::errc() || ec == std::errc::result_out_of_range) && ptr == end;
    if (!ok && (tok == "nan" || tok == "NaN" || tok == "-nan")) {
      ok = true;
      return std::nan("");
    }
    return static_cast<double>(f);
  }
  double d = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), end, d);
  ok = (ec == std::errc() || ec == std::errc::result_out_of_range) && ptr == end;
  if (!ok && (tok == "nan" || tok == "NaN" || tok == "-nan")) {
    ok = true;
    return std::nan("");
  }
  return d;
}

void accept_point(PointCloudReadResult& out, double x, double y, double z, double i) {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z) || !std::isfinite(i) ||
      i < 0.0) {
    ++out.dropped;
    return;
  }
  out.cloud.points.push_back({Vec3(x, y, z), i});
}

PointCloudReadResult read_pcd(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CalibError(ErrorCode::kIo, "cannot open point cloud: " + path);

  std::vector<std::string> fields;
  std::vector<int> sizes;
  std::vector<char> types;
  std::vector<int> counts;
  long long points = -1;
  long long width = -1, height = 1;
  std::string data_mode;

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    const std::string& key = tok[0];
    try {
      if (key == "VERSION") {
        continue;
      } else if (key == "FIELDS") {
        fields.assign(tok.begin() + 1, tok.end());
      } else if (key == "SIZE") {
        sizes.clear();
        for (size_t i = 1; i < tok.size(); ++i) sizes.push_back(std::stoi(tok[i]));
      } else if (key == "TYPE") {
        types.clear();
        for (size_t i = 1; i < tok.size(); ++i) {
          if (tok[i].size() != 1) header_error(path, "bad TYPE entry");
          types.push_back(tok[i][0]);
        }
      } else if (key == "COUNT") {
        counts.clear();
        for (size_t i = 1; i < tok.size(); ++i) counts.push_back(std::stoi(tok[i]));
      } else if (key == "WIDTH") {
        width = std::stoll(tok.at(1));
      } else if (key == "HEIGHT") {
        height = std::stoll(tok.at(1));
      } else if (key == "VIEWPOINT") {
        continue;
      } else if (key == "POINTS") {
        points = std::stoll(tok.at(1));
      } else if (key == "DATA") {
        data_mode = tok.at(1);
        break;
      } else {
        header_error(path, "unexpected header line '" + line + "'");
      }
    } catch (const std::logic_error&) {
      header_error(path, "cannot parse '" + line + "'");
    }
  }
  if (data_mode.empty()) header_error(path, "missing DATA line");
  if (fields.empty()) header_error(path, "missing FIELDS");
  if (sizes.empty()) sizes.assign(fields.size(), 4);
  if (types.empty()) types.assign(fields.size(), 'F');
  if (counts.empty()) counts.assign(fields.size(), 1);
  if (sizes.size() != fields.size() || types.size() != fields.size() ||
      counts.size() != fields.size()) {
    header_error(path, "FIELDS/SIZE/TYPE/COUNT lengths differ");
  }
  if (points < 0) {
    if (width < 0) header_error(path, "missing POINTS and WIDTH");
    points = width * height;
  }
  const FieldSlot slot = locate_fields(fields, path);
  for (int idx : {slot.x, slot.y, slot.z, slot.intensity}) {
    if (counts[idx] != 1 || (types[idx] != 'F' && types[idx] != 'U' && types[idx] != 'I')) {
      throw CalibError(ErrorCode::kUnsupportedFormat,
                       path + ": unsupported field layout for x/y/z/intensity");
    }
  }

  PointCloudReadResult out;
  out.declared = static_cast<std::size_t>(points);
  out.cloud.points.reserve(out.declared);

  if (data_mode == "ascii") {
    // Columns are expanded by COUNT.
    std::vector<int> column(fields.size());
    int total_cols = 0;
    for (size_t i = 0; i < fields.size(); ++i) {
      column[i] = total_cols;
      total_cols += counts[i];
    }
    auto single = [&](int idx) { return types[idx] == 'F' && sizes[idx] == 4; };
    long long read = 0;
    while (read < points && std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto tok = split_ws(line);
      if (static_cast<int>(tok.size()) < total_cols) {
        throw CalibError(ErrorCode::kParse, path + ": short data row " + std::to_string(read));
      }
      double v[4];
      const int idx[4] = {slot.x, slot.y, slot.z, slot.intensity};
      for (int c = 0; c < 4; ++c) {
        bool ok = false;
        v[c] = parse_value(tok[column[idx[c]]], single(idx[c]), ok);
        if (!ok) {
          throw CalibError(ErrorCode::kParse,
                           path + ": bad number '" + tok[column[idx[c]]] + "'");
        }
      }
      accept_point(out, v[0], v[1], v[2], v[3]);
      ++read;
    }
    return out;
  }

  if (data_mode == "binary") {
    int stride = 0;
    std::vector<int> offset(fields.size());
    for (size_t i = 0; i < fields.size(); ++i) {
      offset[i] = stride;
      stride += sizes[i] * counts[i];
    }
    for (int idx : {slot.x, slot.y, slot.z, slot.intensity}) {
      if (types[idx] != 'F' || sizes[idx] != 4) {
        throw CalibError(ErrorCode::kUnsupportedFormat,
                         path + ": binary PCD supports float32 x y z intensity only");
      }
    }
    std::vector<char> row(stride);
    for (long long i = 0; i < points; ++i) {
      if (!in.read(row.data(), stride)) {
        throw CalibError(ErrorCode::kParse, path + ": binary data truncated at point " +
                                                std::to_string(i));
      }
      float v[4];
      const int idx[4] = {slot.x, slot.y, slot.z, slot.intensity};
      for (int c = 0; c < 4; ++c) std::memcpy(&v[c], row.data() + offset[idx[c]], 4);
      accept_point(out, v[0], v[1], v[2], v[3]);
    }
    return out;
  }

  throw CalibError(ErrorCode::kUnsupportedFormat,
                   path + ": unsupported DATA mode '" + data_mode + "'");
}

PointCloudReadResult read_ply(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CalibError(ErrorCode::kIo, "cannot open point cloud: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) {
    header_error(path, "missing 'ply' magic");
  }
  std::vector<std::string> props;
  std::vector<bool> prop_single;
  long long vertices = -1;
  bool in_vertex = false;
  bool saw_format = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "format") {
      if (tok.size() < 2 || tok[1] != "ascii") {
        throw CalibError(ErrorCode::kUnsupportedFormat, path + ": only ASCII PLY is supported");
      }
      saw_format = true;
    } else if (tok[0] == "element") {
      if (tok.size() < 3) header_error(path, "bad element line");
      if (tok[1] == "vertex") {
        if (vertices >= 0) header_error(path, "duplicate vertex element");
        if (!props.empty()) header_error(path, "vertex element must come first");
        try {
          vertices = std::stoll(tok[2]);
        } catch (const std::logic_error&) {
          header_error(path, "bad vertex count");
        }
        in_vertex = true;
      } else {
        in_vertex = false;
        if (vertices < 0) header_error(path, "vertex element must come first");
      }
    } else if (tok[0] == "property") {
      if (in_vertex) {
        if (tok.size() < 3 || tok[1] == "list") {
          throw CalibError(ErrorCode::kUnsupportedFormat,
                           path + ": list properties on vertices are not supported");
        }
        props.push_back(tok.back());
        prop_single.push_back(tok[1] == "float" || tok[1] == "float32");
      }
    } else if (tok[0] == "end_header") {
      break;
    } else {
      header_error(path, "unexpected header line '" + line + "'");
    }
  }
  if (!saw_format) header_error(path, "missing format line");
  if (vertices < 0) header_error(path, "missing vertex element");
  const FieldSlot slot = locate_fields(props, path);

  PointCloudReadResult out;
  out.declared = static_cast<std::size_t>(vertices);
  out.cloud.points.reserve(out.declared);
  for (long long i = 0; i < vertices; ++i) {
    if (!std::getline(in, line)) {
      throw CalibError(ErrorCode::kParse, path + ": vertex data truncated");
    }
    const auto tok = split_ws(line);
    if (tok.size() < props.size()) {
      throw CalibError(ErrorCode::kParse, path + ": short vertex row " + std::to_string(i));
    }
    double v[4];
    const int idx[4] = {slot.x, slot.y, slot.z, slot.intensity};
    for (int c = 0; c < 4; ++c) {
      bool ok = false;
      v[c] = parse_value(tok[idx[c]], prop_single[idx[c]], ok);
      if (!ok) throw CalibError(ErrorCode::kParse, path + ": bad number '" + tok[idx[c]] + "'");
    }
    accept_point(out, v[0], v[1], v[2], v[3]);
  }
  return out;
}

}  // namespace

PointCloudReadResult read_point_cloud(const std::string& path) {
  if (ends_with(path, ".ply")) return read_ply(path);
  if (ends_with(path, ".pcd")) return read_pcd(path);
  throw CalibError(ErrorCode::kUnsupportedFormat,
                   "unknown point cloud extension (expected .pcd or .ply): " + path);
}

void write_point_cloud_pcd(const IntensityPointCloud& cloud, const std::string& path,
                           PcdEncoding encoding) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CalibError(ErrorCode::kIo, "cannot write point cloud: " + path);
  const std::size_t n = cloud.size();
  out << "# .PCD v0.7 - Point Cloud Data file format\n"
      << "VERSION 0.7\n"
      << "FIELDS x y z intensity\n"
      << "SIZE 4 4 4 4\n"
      << "TYPE F F F F\n"
      << "COUNT 1 1 1 1\n"
      << "WIDTH " << n << "\n"
      << "HEIGHT 1\n"
      << "VIEWPOINT 0 0 0 1 0 0 0\n"
      << "POINTS " << n << "\n"
      << "DATA " << (encoding == PcdEncoding::kAscii ? "ascii" : "binary") << "\n";
  if (encoding == PcdEncoding::kAscii) {
    char buf[128];
    for (const auto& p : cloud.points) {
      const int len = std::snprintf(
          buf, sizeof(buf), "%.9g %.9g %.9g %.9g\n", static_cast<double>(static_cast<float>(p.position.x())),
          static_cast<double>(static_cast<float>(p.position.y())),
          static_cast<double>(static_cast<float>(p.position.z())),
          static_cast<double>(static_cast<float>(p.intensity)));
      out.write(buf, len);
    }
  } else {
    std::vector<float> row(4 * n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = cloud.points[i];
      row[4 * i + 0] = static_cast<float>(p.position.x());
      row[4 * i + 1] = static_cast<float>(p.position.y());
      row[4 * i + 2] = static_cast<float>(p.position.z());
      row[4 * i + 3] = static_cast<float>(p.intensity);
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw CalibError(ErrorCode::kIo, "write failed: " + path);
}

void write_colored_ply(const std::vector<ColoredPoint>& points, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw CalibError(ErrorCode::kIo, "cannot write PLY: " + path);
  out << "ply\nformat ascii 1.0\nelement vertex " << points.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  char buf[160];
  for (const auto& p : points) {
    const int len = std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g %u %u %u\n",
                                  static_cast<double>(static_cast<float>(p.position.x())),
                                  static_cast<double>(static_cast<float>(p.position.y())),
                                  static_cast<double>(static_cast<float>(p.position.z())),
                                  static_cast<unsigned>(p.r), static_cast<unsigned>(p.g),
                                  static_cast<unsigned>(p.b));
    out.write(buf, len);
  }
  if (!out) throw CalibError(ErrorCode::kIo, "write failed: " + path);
}

std::size_t write_colored_cloud(const IntensityPointCloud& cloud, const GrayImage& image,
                                const CameraIntrinsics& k, const RigidTransform& t,
                                const std::string& path) {
  std::vector<ColoredPoint> colored;
  colored.reserve(cloud.size());
  for (const auto& p : cloud.points) {
    const auto px = project(transform_point(t, p.position), k);
    if (!px || !in_image(*px, k)) continue;
    const int u = static_cast<int>(std::lround(px->x()));
    const int v = static_cast<int>(std::lround(px->y()));
    if (u < 0 || v < 0 || u >= image.width || v >= image.height) continue;
    const std::uint8_t g = image.at(u, v);
    colored.push_back({p.position, g, g, g});
  }
  write_colored_ply(colored, path);
  return colored.size();
}

}  // namespace edgecalib
