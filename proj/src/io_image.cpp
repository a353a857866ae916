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

#include <png.h>

#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "edgecalib/errors.hpp"
#include "edgecalib/io.hpp"

namespace edgecalib {
namespace {

std::vector<std::uint8_t> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CalibError(ErrorCode::kIo, "cannot open image: " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool is_png(const std::vector<std::uint8_t>& bytes) {
  static const std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return bytes.size() >= 8 && std::memcmp(bytes.data(), kSig, 8) == 0;
}

GrayImage decode_png(const std::vector<std::uint8_t>& bytes, const std::string& path) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw CalibError(ErrorCode::kCorruptStream,
                     "corrupt PNG " + path + ": " + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> rgb(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, rgb.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw CalibError(ErrorCode::kCorruptStream, "corrupt PNG " + path + ": " + msg);
  }
  GrayImage out(static_cast<int>(img.width), static_cast<int>(img.height));
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = luminance(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]);
  }
  return out;
}

// Reads one whitespace-delimited header token, skipping '#' comments.
bool pgm_token(const std::vector<std::uint8_t>& b, std::size_t& pos, long& value) {
  while (pos < b.size()) {
    if (b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else if (std::isspace(b[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  if (pos >= b.size() || !std::isdigit(b[pos])) return false;
  value = 0;
  while (pos < b.size() && std::isdigit(b[pos])) {
    value = value * 10 + (b[pos] - '0');
    if (value > (1L << 30)) return false;
    ++pos;
  }
  return true;
}

GrayImage decode_pgm(const std::vector<std::uint8_t>& b, const std::string& path) {
  const bool binary = b[1] == '5';
  std::size_t pos = 2;
  long w = 0, h = 0, maxval = 0;
  if (!pgm_token(b, pos, w) || !pgm_token(b, pos, h) || !pgm_token(b, pos, maxval) ||
      w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) {
    throw CalibError(ErrorCode::kCorruptStream, "corrupt PGM header: " + path);
  }
  GrayImage out(static_cast<int>(w), static_cast<int>(h));
  const std::size_t n = out.data.size();
  auto scale = [&](long v) {
    if (v > maxval) throw CalibError(ErrorCode::kCorruptStream, "PGM value > maxval: " + path);
    return static_cast<std::uint8_t>(std::lround(255.0 * static_cast<double>(v) / maxval));
  };
  if (binary) {
    ++pos;  // single whitespace after maxval
    const std::size_t bpp = maxval < 256 ? 1 : 2;
    if (b.size() < pos + n * bpp) {
      throw CalibError(ErrorCode::kCorruptStream, "truncated PGM raster: " + path);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const long v = bpp == 1 ? b[pos + i] : (b[pos + 2 * i] << 8) | b[pos + 2 * i + 1];
      out.data[i] = scale(v);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      long v = 0;
      if (!pgm_token(b, pos, v)) {
        throw CalibError(ErrorCode::kCorruptStream, "truncated PGM raster: " + path);
      }
      out.data[i] = scale(v);
    }
  }
  return out;
}

void encode_png(const std::uint8_t* data, int w, int h, png_uint_32 format,
                const std::string& path) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(w);
  img.height = static_cast<png_uint_32>(h);
  img.format = format;
  if (!png_image_write_to_file(&img, path.c_str(), 0, data, 0, nullptr)) {
    throw CalibError(ErrorCode::kIo, "cannot write PNG " + path + ": " + img.message);
  }
}

}  // namespace

RgbImage::RgbImage(const GrayImage& gray) : RgbImage(gray.width, gray.height) {
  for (std::size_t i = 0; i < gray.data.size(); ++i) {
    data[3 * i] = data[3 * i + 1] = data[3 * i + 2] = gray.data[i];
  }
}

void RgbImage::set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
  data[i] = r;
  data[i + 1] = g;
  data[i + 2] = b;
}

std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  // Integer arithmetic in thousandths keeps the rounding exact.
  const int v = 299 * r + 587 * g + 114 * b;
  return static_cast<std::uint8_t>((v + 500) / 1000);
}

GrayImage read_image(const std::string& path) {
  const auto bytes = slurp(path);
  if (is_png(bytes)) return decode_png(bytes, path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '5')) {
    return decode_pgm(bytes, path);
  }
  throw CalibError(ErrorCode::kUnsupportedFormat, "not a PNG or PGM image: " + path);
}

void write_png(const GrayImage& image, const std::string& path) {
  encode_png(image.data.data(), image.width, image.height, PNG_FORMAT_GRAY, path);
}

void write_png(const RgbImage& image, const std::string& path) {
  encode_png(image.data.data(), image.width, image.height, PNG_FORMAT_RGB, path);
}

void write_pgm(const GrayImage& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CalibError(ErrorCode::kIo, "cannot write PGM: " + path);
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data.data()),
            static_cast<std::streamsize>(image.data.size()));
  if (!out) throw CalibError(ErrorCode::kIo, "write failed: " + path);
}

}  // namespace edgecalib
