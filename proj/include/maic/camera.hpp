// Copyright 2026 The MAIC Testbed Authors
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

// Synthetic orthographic camera: rasterizes the arm as flat-intensity thick
// segments on a uniform background. No anti-aliasing; same q gives a
// bit-identical image.

#ifndef MAIC_CAMERA_HPP_
#define MAIC_CAMERA_HPP_

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "maic/arm.hpp"
#include "maic/free_energy.hpp"

namespace maic {

struct CameraConfig {
  int width = 32;
  int height = 32;
  double link_thickness = 2.0;        // pixels
  double background_intensity = 0.0;  // [0, 1]
  double arm_intensity = 1.0;         // [0, 1]

  void Validate() const {
    if (width != height) throw std::invalid_argument("CameraConfig: image must be square");
    if (width < 4) throw std::invalid_argument("CameraConfig: image too small");
    if (background_intensity < 0 || background_intensity > 1 ||
        arm_intensity < 0 || arm_intensity > 1)
      throw std::invalid_argument("CameraConfig: intensities must be in [0,1]");
    if (!(background_intensity < arm_intensity))
      throw std::invalid_argument("CameraConfig: background must be darker than arm");
    if (!(link_thickness > 0)) throw std::invalid_argument("CameraConfig: thickness <= 0");
  }

  // Pixels per meter so the full reach fits with a 10% margin.
  double scale(const ArmModel& model) const {
    return width / (2.0 * model.reach() * 1.1);
  }

  // World point to fractional pixel coordinates (col, row); base at center.
  Eigen::Vector2d project(const ArmModel& model, const Eigen::Vector2d& p) const {
    const double s = scale(model);
    return {p.x() * s + 0.5 * width, 0.5 * height - p.y() * s};
  }
};

namespace detail {

inline double PointSegmentDistance(const Eigen::Vector2d& p,
                                   const Eigen::Vector2d& a,
                                   const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 < 1e-18) return (p - a).norm();
  const double u = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + u * ab)).norm();
}

}  // namespace detail

// Grayscale rasterization of all links as thick segments.
inline Image render(const ArmModel& model, const Vec& q, const CameraConfig& cam) {
  if (q.size() != model.n_joints)
    throw std::invalid_argument("render: q dimension mismatch");
  Image img = Image::Constant(cam.height, cam.width, cam.background_intensity);
  const double half = 0.5 * cam.link_thickness;

  Eigen::Vector2d joint = cam.project(model, Eigen::Vector2d::Zero());
  Vec ph = detail::AbsoluteAngles(q);
  const double s = cam.scale(model);
  for (int link = 0; link < model.n_joints; ++link) {
    const Eigen::Vector2d dir(std::cos(ph[link]), -std::sin(ph[link]));
    const Eigen::Vector2d tip = joint + s * model.link_lengths[link] * dir;
    const int c0 = std::max(0, static_cast<int>(std::floor(std::min(joint.x(), tip.x()) - half - 1)));
    const int c1 = std::min(cam.width - 1, static_cast<int>(std::ceil(std::max(joint.x(), tip.x()) + half + 1)));
    const int r0 = std::max(0, static_cast<int>(std::floor(std::min(joint.y(), tip.y()) - half - 1)));
    const int r1 = std::min(cam.height - 1, static_cast<int>(std::ceil(std::max(joint.y(), tip.y()) + half + 1)));
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        const Eigen::Vector2d px(c + 0.5, r + 0.5);
        if (detail::PointSegmentDistance(px, joint, tip) <= half)
          img(r, c) = cam.arm_intensity;
      }
    }
    joint = tip;
  }
  return img;
}

// One tick of observations. Joint angle and velocity channels pick up
// additive Gaussian noise under the sensor-noise perturbation; the noise
// stream belongs to the scenario-owned generator.
inline SensorSnapshot observe(const ArmModel& model, const ArmState& state,
                              const Perturbation& pert, const CameraConfig& cam,
                              Rng& rng, bool with_image = true) {
  SensorSnapshot snap;
  snap.y_q = state.q;
  snap.y_qdot = state.q_dot;
  if (pert.kind == Perturbation::Kind::kSensorNoise && pert.noise_variance > 0) {
    const double stddev = std::sqrt(pert.noise_variance);
    for (Eigen::Index i = 0; i < snap.y_q.size(); ++i)
      snap.y_q[i] += rng.Gaussian(0.0, stddev);
    for (Eigen::Index i = 0; i < snap.y_qdot.size(); ++i)
      snap.y_qdot[i] += rng.Gaussian(0.0, stddev);
  }
  snap.y_ee = forward_kinematics(model, state.q);
  if (with_image) snap.y_v = render(model, state.q, cam);
  return snap;
}

}  // namespace maic

#endif  // MAIC_CAMERA_HPP_
