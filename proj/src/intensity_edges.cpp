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

#include "edgecalib/intensity_edges.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <Eigen/Eigenvalues>

#include "edgecalib/errors.hpp"

namespace edgecalib {
namespace {

int floor_div(double v, double res) { return static_cast<int>(std::floor(v / res)); }

Vec3 az_axis(double az) { return Vec3(-std::sin(az), std::cos(az), 0.0); }
Vec3 el_axis(double az, double el) {
  return Vec3(-std::sin(el) * std::cos(az), -std::sin(el) * std::sin(az), std::cos(el));
}

// PCA normal of the points, oriented toward the sensor; nullopt if the points
// do not span a plane.
std::optional<Vec3> pca_normal(const IntensityPointCloud& cloud,
                               const std::vector<std::size_t>& ids) {
  if (ids.size() < 3) return std::nullopt;
  Vec3 c = Vec3::Zero();
  for (std::size_t i : ids) c += cloud.points[i].position;
  c /= static_cast<double>(ids.size());
  Mat3 s = Mat3::Zero();
  for (std::size_t i : ids) {
    const Vec3 r = cloud.points[i].position - c;
    s += r * r.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(s);
  const Vec3 ev = es.eigenvalues();
  if (!(ev[1] > 1e-12 * std::max(1.0, ev[2]))) return std::nullopt;
  Vec3 n = es.eigenvectors().col(0).normalized();
  if (n.dot(c) > 0.0) n = -n;
  return n;
}

}  // namespace

double azimuth(const Vec3& p) { return std::atan2(p.y(), p.x()); }
double elevation(const Vec3& p) {
  const double r = p.norm();
  return std::asin(std::clamp(p.z() / r, -1.0, 1.0));
}

std::optional<std::size_t> SphericalImage::locate(double az, double el) const {
  const int c = floor_div(az - az_min, az_res);
  const int r = floor_div(el - el_min, el_res);
  if (c < 0 || r < 0 || c >= cols || r >= rows) return std::nullopt;
  return pixel_index(r, c);
}

SphericalImage spherical_project(const IntensityPointCloud& cloud, double az_res, double el_res,
                                 const std::optional<SphericalWindow>& window,
                                 const std::vector<std::uint8_t>* keep) {
  if (!(az_res > 0.0) || !(el_res > 0.0)) {
    throw CalibError(ErrorCode::kInvalidArgument, "spherical resolutions must be > 0");
  }
  SphericalImage sph;
  sph.az_res = az_res;
  sph.el_res = el_res;
  const std::size_t n = cloud.size();
  std::vector<double> az(n), el(n), range(n);
  std::vector<std::uint8_t> valid(n, 0);
  double az_lo = std::numeric_limits<double>::infinity(), az_hi = -az_lo;
  double el_lo = az_lo, el_hi = -az_lo;
  std::size_t usable = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep && !(*keep)[i]) continue;
    const Vec3& p = cloud.points[i].position;
    range[i] = p.norm();
    if (!(range[i] > 0.0)) {
      ++sph.zero_range;
      continue;
    }
    az[i] = azimuth(p);
    el[i] = elevation(p);
    valid[i] = 1;
    ++usable;
    az_lo = std::min(az_lo, az[i]);
    az_hi = std::max(az_hi, az[i]);
    el_lo = std::min(el_lo, el[i]);
    el_hi = std::max(el_hi, el[i]);
  }
  if (usable == 0) throw CalibError(ErrorCode::kDegenerateRanges, "degenerate ranges");

  const bool fitted = !window.has_value();
  if (window) {
    sph.cols = window->cols;
    sph.rows = window->rows;
    sph.az_min = window->az_center - 0.5 * window->cols * az_res;
    sph.el_min = window->el_center - 0.5 * window->rows * el_res;
  } else {
    const int c0 = floor_div(az_lo, az_res), c1 = floor_div(az_hi, az_res);
    const int r0 = floor_div(el_lo, el_res), r1 = floor_div(el_hi, el_res);
    sph.az_min = c0 * az_res;
    sph.el_min = r0 * el_res;
    sph.cols = c1 - c0 + 1;
    sph.rows = r1 - r0 + 1;
  }
  const std::size_t npix = static_cast<std::size_t>(sph.cols) * sph.rows;
  std::vector<std::size_t> pix(n, npix);
  std::vector<std::size_t> counts(npix, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!valid[i]) continue;
    int c = floor_div(az[i] - sph.az_min, az_res);
    int r = floor_div(el[i] - sph.el_min, el_res);
    if (fitted) {
      c = std::clamp(c, 0, sph.cols - 1);
      r = std::clamp(r, 0, sph.rows - 1);
    } else if (c < 0 || r < 0 || c >= sph.cols || r >= sph.rows) {
      ++sph.outside;
      continue;
    }
    pix[i] = sph.pixel_index(r, c);
    ++counts[pix[i]];
    ++sph.in_range;
  }
  sph.offsets.assign(npix + 1, 0);
  for (std::size_t p = 0; p < npix; ++p) sph.offsets[p + 1] = sph.offsets[p] + counts[p];
  sph.point_ids.resize(sph.offsets[npix]);
  std::vector<std::size_t> cursor(sph.offsets.begin(), sph.offsets.end() - 1);
  sph.intensity.assign(npix, 0.0);
  sph.depth.assign(npix, 0.0);
  sph.occupied.assign(npix, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (pix[i] == npix) continue;
    sph.point_ids[cursor[pix[i]]++] = i;
    sph.intensity[pix[i]] += cloud.points[i].intensity;
    sph.depth[pix[i]] += range[i];
  }
  for (std::size_t p = 0; p < npix; ++p) {
    if (counts[p] == 0) continue;
    sph.occupied[p] = 1;
    sph.intensity[p] /= static_cast<double>(counts[p]);
    sph.depth[p] /= static_cast<double>(counts[p]);
  }
  return sph;
}

std::vector<std::uint8_t> bleeding_filter(const IntensityPointCloud& cloud,
                                          const SphericalImage& sph, double jump,
                                          std::size_t* removed) {
  std::vector<std::uint8_t> keep(cloud.size(), 1);
  const std::size_t npix = static_cast<std::size_t>(sph.cols) * sph.rows;
  std::vector<double> lo(npix, std::numeric_limits<double>::infinity());
  std::vector<double> hi(npix, -std::numeric_limits<double>::infinity());
  for (std::size_t p = 0; p < npix; ++p) {
    for (std::size_t i : sph.contributors(p)) {
      const double r = cloud.points[i].position.norm();
      lo[p] = std::min(lo[p], r);
      hi[p] = std::max(hi[p], r);
    }
  }
  // Opposing neighbor pairs: horizontal, vertical and both diagonals.
  static const int kPairs[4][2] = {{0, 1}, {1, 0}, {1, 1}, {1, -1}};
  std::size_t count = 0;
  for (int r = 0; r < sph.rows; ++r) {
    for (int c = 0; c < sph.cols; ++c) {
      const std::size_t p = sph.pixel_index(r, c);
      for (std::size_t i : sph.contributors(p)) {
        const double range = cloud.points[i].position.norm();
        bool between = false;
        for (const auto& d : kPairs) {
          const int ra = r - d[0], ca = c - d[1], rb = r + d[0], cb = c + d[1];
          if (ra < 0 || rb < 0 || ra >= sph.rows || rb >= sph.rows || ca < 0 || cb < 0 ||
              ca >= sph.cols || cb >= sph.cols) {
            continue;
          }
          const std::size_t a = sph.pixel_index(ra, ca), b = sph.pixel_index(rb, cb);
          if (!sph.occupied[a] || !sph.occupied[b]) continue;
          if ((lo[a] < range - jump && hi[b] > range + jump) ||
              (lo[b] < range - jump && hi[a] > range + jump)) {
            between = true;
            break;
          }
        }
        if (between) {
          keep[i] = 0;
          ++count;
        }
      }
    }
  }
  if (removed) *removed = count;
  return keep;
}

std::vector<float> normalized_intensity(const SphericalImage& sph, IntensityNormalization mode) {
  const std::size_t npix = sph.occupied.size();
  std::vector<double> vals;
  for (std::size_t p = 0; p < npix; ++p) {
    if (sph.occupied[p]) vals.push_back(sph.intensity[p]);
  }
  std::vector<float> out(npix, 0.0f);
  if (vals.empty()) return out;
  double lo, hi;
  if (mode == IntensityNormalization::kPercentile) {
    std::sort(vals.begin(), vals.end());
    const auto at = [&](double q) {
      return vals[static_cast<std::size_t>(std::floor(q * static_cast<double>(vals.size() - 1)))];
    };
    lo = at(0.01);
    hi = at(0.99);
  } else {
    const auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
    lo = *mn;
    hi = *mx;
  }
  const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
  std::deque<std::size_t> queue;
  std::vector<std::uint8_t> filled(npix, 0);
  for (std::size_t p = 0; p < npix; ++p) {
    if (!sph.occupied[p]) continue;
    out[p] = static_cast<float>(std::clamp((sph.intensity[p] - lo) * scale, 0.0, 255.0));
    filled[p] = 1;
    queue.push_back(p);
  }
  while (!queue.empty()) {
    const std::size_t p = queue.front();
    queue.pop_front();
    const int r = static_cast<int>(p / sph.cols), c = static_cast<int>(p % sph.cols);
    const int nb[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
    for (const auto& q : nb) {
      if (q[0] < 0 || q[1] < 0 || q[0] >= sph.rows || q[1] >= sph.cols) continue;
      const std::size_t j = sph.pixel_index(q[0], q[1]);
      if (filled[j]) continue;
      filled[j] = 1;
      out[j] = out[p];
      queue.push_back(j);
    }
  }
  return out;
}

ClassifiedEdges extract_and_classify(const SphericalImage& sph, const std::vector<float>& raster,
                                     const CalibConfig& config) {
  ClassifiedEdges out;
  out.edge_map = canny(raster, sph.cols, sph.rows, config.gaussian_sigma, config.canny_low,
                       config.canny_high);
  const int rad = config.neighbor_radius_px;
  for (std::size_t k = 0; k < out.edge_map.pixels.size(); ++k) {
    const auto& px = out.edge_map.pixels[k];
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int dr = -rad; dr <= rad; ++dr) {
      for (int dc = -rad; dc <= rad; ++dc) {
        if (dr * dr + dc * dc > rad * rad) continue;
        const int r = px.v + dr, c = px.u + dc;
        if (r < 0 || c < 0 || r >= sph.rows || c >= sph.cols) continue;
        const std::size_t p = sph.pixel_index(r, c);
        if (!sph.occupied[p]) continue;
        lo = std::min(lo, sph.depth[p]);
        hi = std::max(hi, sph.depth[p]);
      }
    }
    if (hi - lo > config.depth_jump_threshold) {
      out.depth_edges.push_back(k);
    } else {
      out.intensity_edges.push_back(k);
    }
  }
  return out;
}

Vec3 beam_bias(const Vec3& position, const Vec3& edge_direction, const Vec3& plane_normal,
               const Vec3& outward, double theta) {
  const double d = position.norm();
  if (!(d > 0.0)) throw CalibError(ErrorCode::kInvalidArgument, "beam_bias: zero-range point");
  Vec3 l = plane_normal.cross(edge_direction);
  const double len = l.norm();
  if (!(len > 1e-9 * plane_normal.norm() * edge_direction.norm())) {
    throw CalibError(ErrorCode::kDegenerateBias, "beam_bias: plane normal parallel to edge");
  }
  l /= len;
  // The footprint offset is lateral to the beam: drop the along-ray part so
  // oblique surfaces are corrected sideways. Unchanged for a surface facing
  // the sensor; kept as is when the edge runs along the ray.
  const Vec3 ray = position / d;
  const Vec3 lateral = l - l.dot(ray) * ray;
  if (lateral.norm() > 0.2) l = lateral.normalized();
  if (l.dot(outward) < 0.0) l = -l;
  return d * std::tan(0.5 * theta) * l;
}

std::vector<EdgePoint3D> remap_to_3d(const IntensityPointCloud& cloud, const SphericalImage& sph,
                                     const ClassifiedEdges& edges, EdgeClass edge_class,
                                     const CalibConfig& config, RemapStats* stats) {
  RemapStats local;
  std::vector<EdgePoint3D> out;
  std::vector<std::uint8_t> used(cloud.size(), 0);
  const bool depth_class = edge_class == EdgeClass::kDepthDiscontinuous;
  const auto& list = depth_class ? edges.depth_edges : edges.intensity_edges;
  const NoiseModel noise{config.range_sigma, config.bearing_sigma, config.camera_sigma};
  const double thr = config.depth_jump_threshold;
  auto range_of = [&](std::size_t i) { return cloud.points[i].position.norm(); };

  for (std::size_t k : list) {
    const PixelCoord px = edges.edge_map.pixels[k];
    const std::size_t center = sph.pixel_index(px.v, px.u);
    const double az0 = sph.az_min + (px.u + 0.5) * sph.az_res;
    const double el0 = sph.el_min + (px.v + 0.5) * sph.el_res;
    const double cos_el = std::cos(el0);

    std::size_t chosen = kNoSource;
    Vec2 outward2 = Vec2::Zero();  // metric angular direction toward the background
    if (!depth_class) {
      const auto ids = sph.contributors(center);
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i : ids) {
        const double dev = std::abs(range_of(i) - sph.depth[center]);
        if (dev < best) {
          best = dev;
          chosen = i;
        }
      }
    } else {
      std::vector<std::size_t> pool;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int r = px.v + dr, c = px.u + dc;
          if (r < 0 || c < 0 || r >= sph.rows || c >= sph.cols) continue;
          const auto ids = sph.contributors(sph.pixel_index(r, c));
          pool.insert(pool.end(), ids.begin(), ids.end());
        }
      }
      std::sort(pool.begin(), pool.end());
      if (!pool.empty()) {
        double rmin = std::numeric_limits<double>::infinity();
        for (std::size_t i : pool) rmin = std::min(rmin, range_of(i));
        std::vector<std::size_t> fg, bg;
        for (std::size_t i : pool) (range_of(i) < rmin + thr ? fg : bg).push_back(i);
        auto local2 = [&](std::size_t i) {
          const Vec3& p = cloud.points[i].position;
          double daz = azimuth(p) - az0;
          if (daz > kPi) daz -= 2.0 * kPi;
          if (daz < -kPi) daz += 2.0 * kPi;
          return Vec2(daz * cos_el, elevation(p) - el0);
        };
        if (!bg.empty()) {
          Vec2 mf = Vec2::Zero(), mb = Vec2::Zero();
          for (std::size_t i : fg) mf += local2(i);
          for (std::size_t i : bg) mb += local2(i);
          const Vec2 spread = mb / static_cast<double>(bg.size()) -
                              mf / static_cast<double>(fg.size());
          const Vec2 g = edges.edge_map.gradients[k];
          Vec2 nrm(g.x() / (sph.az_res * cos_el), g.y() / sph.el_res);
          if (!(nrm.norm() > 0.0)) nrm = spread;
          if (nrm.norm() > 0.0) {
            nrm.normalize();
            if (nrm.dot(spread) < 0.0) nrm = -nrm;
            outward2 = nrm;
          }
        }
        if (config.outermost_foreground && outward2.norm() > 0.0) {
          const Vec2 lateral(-outward2.y(), outward2.x());
          const double band = 0.5 * std::max(sph.az_res * cos_el, sph.el_res);
          for (int pass = 0; pass < 2 && chosen == kNoSource; ++pass) {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t i : fg) {
              const Vec2 q = local2(i);
              if (pass == 0 && std::abs(q.dot(lateral)) > band) continue;
              const double s = q.dot(outward2);
              if (s > best) {
                best = s;
                chosen = i;
              }
            }
          }
        } else {
          double best = std::numeric_limits<double>::infinity();
          for (std::size_t i : pool) {
            if (range_of(i) < best) {
              best = range_of(i);
              chosen = i;
            }
          }
        }
      }
    }
    if (chosen == kNoSource) {
      ++local.skipped_empty;
      continue;
    }
    if (used[chosen]) {
      ++local.duplicates;
      continue;
    }
    used[chosen] = 1;

    EdgePoint3D e;
    e.position = cloud.points[chosen].position;
    e.edge_class = edge_class;
    e.source_index = chosen;
    e.covariance = point_covariance(e.position, noise);
    const double rsel = range_of(chosen);

    // Local surface normal from same-surface points around the pixel.
    std::vector<std::size_t> surf;
    const int nr = config.normal_radius_px;
    for (int dr = -nr; dr <= nr; ++dr) {
      for (int dc = -nr; dc <= nr; ++dc) {
        if (dr * dr + dc * dc > nr * nr) continue;
        const int r = px.v + dr, c = px.u + dc;
        if (r < 0 || c < 0 || r >= sph.rows || c >= sph.cols) continue;
        for (std::size_t i : sph.contributors(sph.pixel_index(r, c))) {
          if (std::abs(range_of(i) - rsel) < thr) surf.push_back(i);
        }
      }
    }
    e.plane_normal = pca_normal(cloud, surf);

    if (depth_class && config.bias_correction) {
      const double az = azimuth(e.position), el = elevation(e.position);
      const Vec3 out3 = outward2.x() * az_axis(az) + outward2.y() * el_axis(az, el);
      const Vec3 tan3 = -outward2.y() * az_axis(az) + outward2.x() * el_axis(az, el);
      bool ok = e.plane_normal.has_value() && outward2.norm() > 0.0;
      if (ok) {
        try {
          e.bias = beam_bias(e.position, tan3, *e.plane_normal, out3, config.beam_divergence);
        } catch (const CalibError&) {
          ok = false;
        }
      }
      if (!ok) {
        const double radius = rsel * std::tan(0.5 * config.beam_divergence);
        e.bias.setZero();
        e.bias_downweighted = true;
        e.covariance += radius * radius * Mat3::Identity();
      }
    }
    out.push_back(e);
  }
  if (stats) *stats = local;
  return out;
}

IntensityExtraction extract_intensity_path(const IntensityPointCloud& cloud,
                                           const CalibConfig& config) {
  IntensityExtraction out;
  if (cloud.empty()) return out;
  out.image = spherical_project(cloud, config.spherical_az_res, config.spherical_el_res);
  if (config.bleeding_filter) {
    const auto keep = bleeding_filter(cloud, out.image, config.depth_jump_threshold,
                                      &out.bleeding_removed);
    if (out.bleeding_removed > 0) {
      out.image = spherical_project(cloud, config.spherical_az_res, config.spherical_el_res,
                                    std::nullopt, &keep);
    }
  }
  out.raster = normalized_intensity(out.image, config.intensity_normalization);
  out.classified = extract_and_classify(out.image, out.raster, config);
  auto dd = remap_to_3d(cloud, out.image, out.classified, EdgeClass::kDepthDiscontinuous, config,
                        &out.depth_stats);
  auto id = remap_to_3d(cloud, out.image, out.classified, EdgeClass::kIntensityDiscontinuous,
                        config, &out.intensity_stats);
  out.edges.reserve(dd.size() + id.size());
  for (auto& e : dd) {
    if (e.bias_downweighted) ++out.missing_normals;
    out.edges.push_back(e);
  }
  for (auto& e : id) out.edges.push_back(e);
  return out;
}

}  // namespace edgecalib
