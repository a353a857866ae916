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

#include "edgecalib/registration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "edgecalib/errors.hpp"
#include "edgecalib/io.hpp"
#include "json.hpp"

namespace edgecalib {
namespace {

constexpr double kLambdaInit = 1e-4;
constexpr double kLambdaMax = 1e12;

double huber_rho(double r, double delta) {
  const double a = std::abs(r);
  return a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
}

double huber_weight(double r, double delta) {
  const double a = std::abs(r);
  return a <= delta ? 1.0 : delta / a;
}

struct Evaluation {
  double cost = 0.0;
  double rms = 0.0;
  bool valid = true;
};

Evaluation evaluate(const std::vector<Correspondence>& corr, const RigidTransform& t,
                    const CameraIntrinsics& k, const CalibConfig& config) {
  Evaluation ev;
  double sq = 0.0;
  for (const auto& c : corr) {
    const auto z = residual(c, t, k);
    if (!z) {
      ev.valid = false;
      ev.cost = std::numeric_limits<double>::infinity();
      return ev;
    }
    const double r = *z / std::sqrt(c.sigma_sq);
    ev.cost += config.huber ? huber_rho(r, config.huber_delta) : 0.5 * r * r;
    sq += *z * *z;
  }
  ev.rms = corr.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(corr.size()));
  return ev;
}

}  // namespace

NoiseModel noise_model(const CalibConfig& config) {
  return {config.range_sigma, config.bearing_sigma, config.camera_sigma};
}

std::optional<double> residual(const Correspondence& c, const RigidTransform& t,
                               const CameraIntrinsics& k) {
  const auto px = project(transform_point(t, c.point.corrected()), k);
  if (!px) return std::nullopt;
  return c.line.n.dot(*px - c.line.q);
}

std::optional<Vec6> residual_jacobian(const Correspondence& c, const RigidTransform& t,
                                      const CameraIntrinsics& k) {
  const Vec3 x = transform_point(t, c.point.corrected());
  const auto pj = project_with_jacobian(x, k);
  if (!pj) return std::nullopt;
  const Eigen::RowVector3d nj = c.line.n.transpose() * pj->jacobian;
  Vec6 j;
  j.head<3>() = -(nj * hat(x)).transpose();
  j.tail<3>() = nj.transpose();
  return j;
}

std::optional<double> residual_variance(const Correspondence& c, const RigidTransform& t,
                                        const CameraIntrinsics& k, const NoiseModel& model) {
  const Vec3 x = transform_point(t, c.point.corrected());
  const auto pj = project_with_jacobian(x, k);
  if (!pj) return std::nullopt;
  const Mat3& r = t.rotation.matrix();
  const Eigen::RowVector3d nj = c.line.n.transpose() * pj->jacobian;
  const double lidar = nj * r * c.point.covariance * r.transpose() * nj.transpose();
  return lidar + model.camera_sigma * model.camera_sigma * c.line.n.squaredNorm();
}

std::vector<Correspondence> build_correspondences(const std::vector<EdgePoint3D>& edges,
                                                  const EdgeIndex& image_edges,
                                                  const RigidTransform& t,
                                                  const CameraIntrinsics& k,
                                                  const CalibConfig& config, double gate_px) {
  std::vector<Correspondence> out;
  const NoiseModel model = noise_model(config);
  const double gate_sq = gate_px * gate_px;
  std::vector<Vec2> nbrs;
  for (const auto& e : edges) {
    const auto px = project(transform_point(t, e.corrected()), k);
    if (!px || !in_image(*px, k)) continue;
    const auto knn = image_edges.knn(*px, static_cast<std::size_t>(config.knn_k));
    if (knn.empty() || knn.front().dist_sq > gate_sq) continue;
    nbrs.clear();
    for (const auto& nb : knn) nbrs.push_back(image_edges.point(nb.index));
    Correspondence c;
    c.point = e;
    try {
      c.line = fit_line(nbrs);
    } catch (const CalibError&) {
      continue;
    }
    const auto var = residual_variance(c, t, k, model);
    if (!var || !(*var > 0.0)) continue;
    c.sigma_sq = *var;
    c.weight = 1.0 / *var;
    out.push_back(c);
  }
  if (out.size() < kMinCorrespondences) {
    throw CalibError(ErrorCode::kInsufficientCorrespondences,
                     "insufficient correspondences: " + std::to_string(out.size()) + " < " +
                         std::to_string(kMinCorrespondences));
  }
  return out;
}

NormalEquations accumulate_normal_equations(const std::vector<Correspondence>& corr,
                                            const RigidTransform& t, const CameraIntrinsics& k,
                                            const CalibConfig& config) {
  NormalEquations ne;
  for (const auto& c : corr) {
    const auto z = residual(c, t, k);
    const auto j = residual_jacobian(c, t, k);
    if (!z || !j) continue;
    const double r = *z / std::sqrt(c.sigma_sq);
    const double w = (config.huber ? huber_weight(r, config.huber_delta) : 1.0) * c.weight;
    ne.h.noalias() += w * (*j) * j->transpose();
    ne.g.noalias() += w * (*j) * (*z);
    ne.cost += config.huber ? huber_rho(r, config.huber_delta) : 0.5 * r * r;
    ++ne.used;
  }
  return ne;
}

double condition_number(const Mat6& h) {
  Eigen::SelfAdjointEigenSolver<Mat6> es(h, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()[0], hi = es.eigenvalues()[5];
  if (!(hi > 0.0) || !(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

constexpr int kCoarseInnerIters = 3;
constexpr double kFullPoseGateFactor = 8.0;

CalibrationReport gauss_newton_solve(const std::vector<EdgePoint3D>& edges,
                                     const EdgeIndex& image_edges, const CameraIntrinsics& k,
                                     const RigidTransform& t_init, const CalibConfig& config) {
  CalibrationReport rep;
  for (const auto& e : edges) ++rep.extracted_counts[static_cast<int>(e.edge_class)];
  RigidTransform t = t_init;
  // Coarse-to-fine association. Rotation dominates the initial image offsets,
  // so while the gate is wide only rotation is estimated; the full pose then
  // starts from a gate still wide enough for translation-induced offsets.
  // Gates halve every outer iteration down to correspondence_max_px.
  const double fine_gate = config.correspondence_max_px;
  const double full_gate = fine_gate * std::min(config.coarse_gate_factor, kFullPoseGateFactor);
  double gate = fine_gate * config.coarse_gate_factor;
  bool rotation_only = gate > full_gate;
  bool last_inner_small = false;

  for (int outer = 0; outer < config.max_outer_iters; ++outer) {
    const auto corr = build_correspondences(edges, image_edges, t, k, config, gate);
    const RigidTransform t_start = t;
    Evaluation cur = evaluate(corr, t, k, config);
    double lambda = 0.0;
    last_inner_small = false;

    // While the gate is still coarse, associations are stale after a few steps.
    const int inner_limit = gate > fine_gate ? std::min(config.max_inner_iters, kCoarseInnerIters)
                                             : config.max_inner_iters;
    for (int inner = 0; inner < inner_limit; ++inner) {
      const NormalEquations ne = accumulate_normal_equations(corr, t, k, config);
      if (condition_number(ne.h) > config.max_condition_number) {
        throw CalibError(ErrorCode::kDegenerateGeometry,
                         "degenerate geometry: normal matrix is ill-conditioned");
      }
      Mat6 a = ne.h;
      if (lambda > 0.0) a.diagonal() += lambda * ne.h.diagonal();
      Vec6 delta = Vec6::Zero();
      if (rotation_only) {
        delta.head<3>() = a.topLeftCorner<3, 3>().ldlt().solve(-ne.g.head<3>());
      } else {
        delta = a.ldlt().solve(-ne.g);
      }
      const double step = delta.norm();
      ++rep.inner_iterations;
      if (!std::isfinite(step)) {
        throw CalibError(ErrorCode::kDegenerateGeometry, "degenerate geometry: singular step");
      }
      if (step < config.convergence_tol) {
        last_inner_small = true;
        break;
      }
      const RigidTransform cand = boxplus(t, delta);
      const Evaluation next = evaluate(corr, cand, k, config);
      if (next.valid && next.cost <= cur.cost) {
        t = cand;
        cur = next;
        rep.trace.push_back({outer, inner, next.cost, next.rms, corr.size(), step, lambda});
        lambda = lambda > 0.0 ? lambda / 10.0 : 0.0;
        if (lambda < kLambdaInit * 1e-3) lambda = 0.0;
      } else {
        lambda = lambda > 0.0 ? lambda * 10.0 : kLambdaInit;
        if (lambda > kLambdaMax) {
          // No descent direction left at machine precision.
          last_inner_small = true;
          break;
        }
      }
    }

    rep.outer_iterations = outer + 1;
    rep.correspondences_per_outer.push_back(corr.size());
    rep.rms_per_outer.push_back(cur.rms);
    rep.final_rms = cur.rms;
    rep.class_counts = {};
    for (const auto& c : corr) ++rep.class_counts[static_cast<int>(c.point.edge_class)];

    const double motion = log_se3(t * t_start.inverse()).norm();
    if (!rotation_only && gate <= fine_gate && motion < config.outer_convergence_tol &&
        last_inner_small) {
      rep.converged = true;
      break;
    }
    gate *= 0.5;
    if (rotation_only && gate <= full_gate) {
      rotation_only = false;
      gate = full_gate;
    }
    gate = std::max(gate, fine_gate);
  }
  rep.extrinsics = t;
  return rep;
}

std::string report_to_json(const CalibrationReport& r) {
  using nlohmann::json;
  json j = json::parse(extrinsics_to_json(r.extrinsics));
  j["converged"] = r.converged;
  j["outer_iterations"] = r.outer_iterations;
  j["inner_iterations"] = r.inner_iterations;
  j["final_rms_px"] = r.final_rms;
  json trace = json::array();
  for (const auto& it : r.trace) {
    trace.push_back({{"outer", it.outer},
                     {"inner", it.inner},
                     {"cost", it.cost},
                     {"rms_px", it.rms},
                     {"correspondences", it.correspondences},
                     {"step_norm", it.step_norm},
                     {"lambda", it.lambda}});
  }
  j["trace"] = trace;
  j["correspondences_per_outer"] = r.correspondences_per_outer;
  j["rms_per_outer"] = r.rms_per_outer;
  json counts;
  json extracted;
  for (int c = 0; c < 3; ++c) {
    counts[to_string(static_cast<EdgeClass>(c))] = r.class_counts[c];
    extracted[to_string(static_cast<EdgeClass>(c))] = r.extracted_counts[c];
  }
  j["class_counts"] = counts;
  j["extracted_counts"] = extracted;
  if (r.rotation_error_deg) j["rotation_error_deg"] = *r.rotation_error_deg;
  if (r.translation_error_cm) j["translation_error_cm"] = *r.translation_error_cm;
  return j.dump(2) + "\n";
}

}  // namespace edgecalib
