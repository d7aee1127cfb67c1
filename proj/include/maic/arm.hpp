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

// Deterministic rigid-body simulator of a planar N-link serial arm.
//
// Dynamics are evaluated in absolute link angles ph = S q (S lower-triangular
// ones). With B[j,m] = sum_k m_k c_kj c_km, where c_kj is the distance
// coefficient of link k's center of mass along direction j, the exact
// equations of motion reduce to
//   A(ph) phdd + h(ph, phd) + G(ph) = Q,  A = B .* cos(ph_j - ph_m) + diag(I)
//   h_j = sum_m B[j,m] sin(ph_j - ph_m) phd_m^2
// and joint-space quantities follow as M = S'AS, tau = S'Q.

#ifndef MAIC_ARM_HPP_
#define MAIC_ARM_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "maic/free_energy.hpp"
#include "maic/rng.hpp"

namespace maic {

struct ArmModel {
  int n_joints = 0;
  Vec link_lengths;    // m
  Vec link_masses;     // kg
  Vec link_inertias;   // kg m^2 about each link's center of mass
  Vec link_com;        // m, center-of-mass offset from the parent joint
  Vec joint_damping;   // N m s / rad
  Eigen::Vector2d gravity = Eigen::Vector2d::Zero();  // m/s^2
  Vec torque_limits;   // N m, symmetric box
  Mat joint_limits;    // n x 2, [lo, hi] per joint

  void Validate() const {
    if (n_joints < 1) throw std::invalid_argument("ArmModel: n_joints < 1");
    const Eigen::Index n = n_joints;
    if (link_lengths.size() != n || link_masses.size() != n ||
        link_inertias.size() != n || link_com.size() != n ||
        joint_damping.size() != n || torque_limits.size() != n ||
        joint_limits.rows() != n || joint_limits.cols() != 2)
      throw std::invalid_argument("ArmModel: field dimensions disagree");
    if (!(link_lengths.minCoeff() > 0) || !(link_masses.minCoeff() > 0) ||
        !(link_inertias.minCoeff() > 0))
      throw std::invalid_argument("ArmModel: lengths/masses/inertias must be > 0");
    if (!(torque_limits.minCoeff() > 0))
      throw std::invalid_argument("ArmModel: torque limits must be > 0");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(joint_limits(i, 0) < joint_limits(i, 1)))
        throw std::invalid_argument("ArmModel: empty joint limit interval");
      if (!(link_com[i] > 0) || link_com[i] > link_lengths[i])
        throw std::invalid_argument("ArmModel: link_com outside link");
    }
  }

  double reach() const { return link_lengths.sum(); }
};

struct ArmState {
  Vec q;      // rad
  Vec q_dot;  // rad/s
  double t = 0.0;
  // Set by step() when the corresponding clamp fired on the last step.
  bool torque_clamped = false;
  bool joint_limited = false;
};

struct Perturbation {
  enum class Kind { kNone, kInertialPayload, kElasticBand, kHumanPush, kSensorNoise };
  Kind kind = Kind::kNone;

  // kInertialPayload: point mass riding link `payload_link`, its attachment
  // offset sliding sinusoidally about the link midpoint.
  double payload_mass = 0.0;      // kg
  int payload_link = 0;           // 0-based link index
  double slosh_amplitude = 0.0;   // m
  double slosh_frequency = 0.0;   // Hz

  // kElasticBand: linear spring between the tips of two links, tension-only,
  // clamped at band_max_tension.
  double band_stiffness = 0.0;    // N/m
  double band_rest_length = 0.0;  // m
  int band_link_a = 0;
  int band_link_b = 0;
  double band_max_tension = 0.0;  // N

  // kHumanPush: fixed-magnitude torque in a per-interval random direction.
  double push_amplitude = 0.0;    // N m
  std::vector<std::pair<double, double>> push_intervals;  // s
  std::uint64_t push_seed = 0;

  // kSensorNoise: additive Gaussian noise on y_q and y_qdot (observe() only).
  double noise_variance = 0.0;    // rad^2
  std::uint64_t noise_seed = 0;

  void Validate(const ArmModel& model) const {
    switch (kind) {
      case Kind::kNone:
        break;
      case Kind::kInertialPayload:
        if (payload_mass < 0 || slosh_amplitude < 0 || slosh_frequency < 0)
          throw std::invalid_argument("Perturbation: negative payload parameter");
        if (payload_link < 0 || payload_link >= model.n_joints)
          throw std::invalid_argument("Perturbation: payload_link out of range");
        break;
      case Kind::kElasticBand:
        if (band_stiffness < 0 || band_rest_length < 0)
          throw std::invalid_argument("Perturbation: negative band parameter");
        if (!(band_max_tension > 0))
          throw std::invalid_argument("Perturbation: band_max_tension must be > 0");
        if (band_link_a < 0 || band_link_a >= model.n_joints ||
            band_link_b < 0 || band_link_b >= model.n_joints ||
            band_link_a == band_link_b)
          throw std::invalid_argument("Perturbation: bad band anchor links");
        break;
      case Kind::kHumanPush:
        if (push_amplitude < 0)
          throw std::invalid_argument("Perturbation: negative push amplitude");
        for (const auto& [lo, hi] : push_intervals)
          if (!(lo < hi)) throw std::invalid_argument("Perturbation: bad push interval");
        break;
      case Kind::kSensorNoise:
        if (noise_variance < 0)
          throw std::invalid_argument("Perturbation: negative noise variance");
        break;
    }
  }
};

namespace detail {

// Center-of-mass distance coefficients: c(k, j) is the lever arm of link k's
// center of mass along absolute direction j.
inline Mat ComCoefficients(const ArmModel& model) {
  const int n = model.n_joints;
  Mat c = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < k; ++j) c(k, j) = model.link_lengths[j];
    c(k, k) = model.link_com[k];
  }
  return c;
}

struct AbsoluteDynamics {
  Mat b;       // mass-coupling coefficients, constant per configuration set
  Vec w;       // gravity lever weights
  Vec inertia; // rotational inertias about each center of mass
};

// Payload offset along its link at time t, kept on the link.
inline double PayloadOffset(const ArmModel& model, const Perturbation& pert,
                            double t) {
  const double l = model.link_lengths[pert.payload_link];
  const double s = 0.5 * l + pert.slosh_amplitude *
                                 std::sin(2.0 * 3.14159265358979323846 *
                                          pert.slosh_frequency * t);
  return std::clamp(s, 0.0, l);
}

inline AbsoluteDynamics BuildAbsoluteDynamics(const ArmModel& model,
                                              const Perturbation& pert,
                                              double t) {
  const int n = model.n_joints;
  const Mat c = ComCoefficients(model);
  AbsoluteDynamics dyn;
  dyn.b = Mat::Zero(n, n);
  dyn.w = Vec::Zero(n);
  dyn.inertia = model.link_inertias;
  for (int k = 0; k < n; ++k) {
    dyn.b += model.link_masses[k] * c.row(k).transpose() * c.row(k);
    dyn.w += model.link_masses[k] * c.row(k).transpose();
  }
  if (pert.kind == Perturbation::Kind::kInertialPayload) {
    const int k = pert.payload_link;
    Vec cp = Vec::Zero(n);
    for (int j = 0; j < k; ++j) cp[j] = model.link_lengths[j];
    cp[k] = PayloadOffset(model, pert, t);
    dyn.b += pert.payload_mass * cp * cp.transpose();
    dyn.w += pert.payload_mass * cp;
  }
  return dyn;
}

inline Vec AbsoluteAngles(const Vec& q) {
  Vec ph(q.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    acc += q[i];
    ph[i] = acc;
  }
  return ph;
}

// S' x for the lower-triangular ones matrix: suffix sums.
inline Vec JointSpace(const Vec& absolute) {
  Vec out(absolute.size());
  double acc = 0.0;
  for (Eigen::Index i = absolute.size() - 1; i >= 0; --i) {
    acc += absolute[i];
    out[i] = acc;
  }
  return out;
}

inline Mat AbsoluteMassMatrix(const AbsoluteDynamics& dyn, const Vec& ph) {
  const Eigen::Index n = ph.size();
  Mat a(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index m = 0; m < n; ++m)
      a(j, m) = dyn.b(j, m) * std::cos(ph[j] - ph[m]);
  a.diagonal() += dyn.inertia;
  return a;
}

}  // namespace detail

// Tip position of link `link` (0-based); link = n-1 gives the end effector.
inline Eigen::Vector2d link_tip(const ArmModel& model, const Vec& q, int link) {
  if (q.size() != model.n_joints)
    throw std::invalid_argument("link_tip: q dimension mismatch");
  const Vec ph = detail::AbsoluteAngles(q);
  Eigen::Vector2d p = Eigen::Vector2d::Zero();
  for (int j = 0; j <= link; ++j)
    p += model.link_lengths[j] * Eigen::Vector2d(std::cos(ph[j]), std::sin(ph[j]));
  return p;
}

// Planar end-effector position.
inline Vec forward_kinematics(const ArmModel& model, const Vec& q) {
  return link_tip(model, q, model.n_joints - 1);
}

// 2 x n Jacobian of the tip of link `link` with respect to q.
inline Mat tip_jacobian(const ArmModel& model, const Vec& q, int link) {
  const Vec ph = detail::AbsoluteAngles(q);
  const Eigen::Index n = model.n_joints;
  Mat jac = Mat::Zero(2, n);
  for (int j = 0; j <= link; ++j) {
    const Eigen::Vector2d d(-model.link_lengths[j] * std::sin(ph[j]),
                            model.link_lengths[j] * std::cos(ph[j]));
    for (int i = 0; i <= j; ++i) jac.col(i) += d;
  }
  return jac;
}

inline Mat fk_jacobian(const ArmModel& model, const Vec& q) {
  return tip_jacobian(model, q, model.n_joints - 1);
}

// Joint-space mass matrix, including any inertial payload at time t.
inline Mat mass_matrix(const ArmModel& model, const Vec& q,
                       const Perturbation& pert = {}, double t = 0.0) {
  const auto dyn = detail::BuildAbsoluteDynamics(model, pert, t);
  const Vec ph = detail::AbsoluteAngles(q);
  const Mat a = detail::AbsoluteMassMatrix(dyn, ph);
  const Eigen::Index n = q.size();
  // M = S' A S: cumulative sums on both sides.
  Mat as(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double acc = 0.0;
    for (Eigen::Index m = n - 1; m >= 0; --m) {
      acc += a(j, m);
      as(j, m) = acc;
    }
  }
  Mat m(n, n);
  for (Eigen::Index cidx = 0; cidx < n; ++cidx) {
    double acc = 0.0;
    for (Eigen::Index j = n - 1; j >= 0; --j) {
      acc += as(j, cidx);
      m(j, cidx) = acc;
    }
  }
  return m;
}

// Joint-space Coriolis/centrifugal torque vector C(q, qd) qd.
inline Vec coriolis_vector(const ArmModel& model, const Vec& q, const Vec& qd,
                           const Perturbation& pert = {}, double t = 0.0) {
  const auto dyn = detail::BuildAbsoluteDynamics(model, pert, t);
  const Vec ph = detail::AbsoluteAngles(q);
  const Vec phd = detail::AbsoluteAngles(qd);
  const Eigen::Index n = q.size();
  Vec h = Vec::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index m = 0; m < n; ++m)
      h[j] += dyn.b(j, m) * std::sin(ph[j] - ph[m]) * phd[m] * phd[m];
  return detail::JointSpace(h);
}

// Joint-space gravity torque vector g(q).
inline Vec gravity_vector(const ArmModel& model, const Vec& q,
                          const Perturbation& pert = {}, double t = 0.0) {
  const auto dyn = detail::BuildAbsoluteDynamics(model, pert, t);
  const Vec ph = detail::AbsoluteAngles(q);
  Vec g(ph.size());
  for (Eigen::Index j = 0; j < ph.size(); ++j)
    g[j] = dyn.w[j] * (model.gravity.x() * std::sin(ph[j]) -
                       model.gravity.y() * std::cos(ph[j]));
  return detail::JointSpace(g);
}

// Elastic-band force applied at the tip of band_link_a (the tip of
// band_link_b receives the opposite force). Tension-only, norm clamped at
// band_max_tension.
inline Eigen::Vector2d band_force(const ArmModel& model, const Vec& q,
                                  const Perturbation& pert) {
  const Eigen::Vector2d pa = link_tip(model, q, pert.band_link_a);
  const Eigen::Vector2d pb = link_tip(model, q, pert.band_link_b);
  const Eigen::Vector2d d = pb - pa;
  const double len = d.norm();
  if (len <= pert.band_rest_length || len < 1e-12)
    return Eigen::Vector2d::Zero();
  const double tension = std::min(
      pert.band_stiffness * (len - pert.band_rest_length), pert.band_max_tension);
  return (tension / len) * d;
}

// Human-push torque at time t: constant random-direction vector of norm
// push_amplitude inside each configured interval, drawn from the seeded
// generator per interval index.
inline Vec push_torque(int n_joints, const Perturbation& pert, double t) {
  for (std::size_t i = 0; i < pert.push_intervals.size(); ++i) {
    const auto& [lo, hi] = pert.push_intervals[i];
    if (t >= lo && t < hi) {
      Rng rng(Rng::DeriveSeed(pert.push_seed, i));
      Vec dir(n_joints);
      for (int j = 0; j < n_joints; ++j) dir[j] = rng.Gaussian();
      const double norm = dir.norm();
      if (norm < 1e-12) return Vec::Zero(n_joints);
      return (pert.push_amplitude / norm) * dir;
    }
  }
  return Vec::Zero(n_joints);
}

// External joint torque contributed by the active perturbation at time t.
// The payload has no entry here; it augments the mass/gravity terms instead.
inline Vec external_torque(const ArmModel& model, const Vec& q,
                           const Perturbation& pert, double t) {
  const Eigen::Index n = model.n_joints;
  switch (pert.kind) {
    case Perturbation::Kind::kElasticBand: {
      const Eigen::Vector2d f = band_force(model, q, pert);
      if (f.isZero()) return Vec::Zero(n);
      const Mat ja = tip_jacobian(model, q, pert.band_link_a);
      const Mat jb = tip_jacobian(model, q, pert.band_link_b);
      return ja.transpose() * f + jb.transpose() * (-f);
    }
    case Perturbation::Kind::kHumanPush:
      return push_torque(model.n_joints, pert, t);
    default:
      return Vec::Zero(n);
  }
}

// Joint accelerations: qdd = M^-1 (tau + tau_ext - C qd - g - damping qd).
inline Vec forward_dynamics(const ArmModel& model, const ArmState& state,
                            const Vec& tau, const Perturbation& pert = {}) {
  const Eigen::Index n = model.n_joints;
  if (tau.size() != n || state.q.size() != n || state.q_dot.size() != n)
    throw std::invalid_argument("forward_dynamics: dimension mismatch");
  if (!AllFinite(tau) || !AllFinite(state.q) || !AllFinite(state.q_dot))
    throw std::invalid_argument("forward_dynamics: non-finite input");
  const Mat m = mass_matrix(model, state.q, pert, state.t);
  Vec rhs = tau - coriolis_vector(model, state.q, state.q_dot, pert, state.t) -
            gravity_vector(model, state.q, pert, state.t) -
            model.joint_damping.cwiseProduct(state.q_dot);
  if (pert.kind == Perturbation::Kind::kElasticBand ||
      pert.kind == Perturbation::Kind::kHumanPush)
    rhs += external_torque(model, state.q, pert, state.t);
  return m.ldlt().solve(rhs);
}

// Kinetic plus gravitational potential energy (potential zero at base height).
inline double mechanical_energy(const ArmModel& model, const ArmState& state) {
  const auto dyn = detail::BuildAbsoluteDynamics(model, Perturbation{}, state.t);
  const Vec ph = detail::AbsoluteAngles(state.q);
  const Vec phd = detail::AbsoluteAngles(state.q_dot);
  const Mat a = detail::AbsoluteMassMatrix(dyn, ph);
  const double kinetic = 0.5 * phd.dot(a * phd);
  double potential = 0.0;
  for (Eigen::Index j = 0; j < ph.size(); ++j)
    potential -= dyn.w[j] * (model.gravity.x() * std::cos(ph[j]) +
                             model.gravity.y() * std::sin(ph[j]));
  return kinetic + potential;
}

// One RK2 (midpoint) step. Torque is clamped to the model limits before
// integration; joint limits are enforced on the result (offending joints are
// stopped dead).
inline ArmState step(const ArmModel& model, const ArmState& state,
                     const Vec& tau, const Perturbation& pert, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
  Vec tau_c = tau.cwiseMin(model.torque_limits).cwiseMax(-model.torque_limits);
  const bool torque_clamped = (tau_c.array() != tau.array()).any();

  const Vec k1 = forward_dynamics(model, state, tau_c, pert);
  ArmState mid;
  mid.q = state.q + 0.5 * dt * state.q_dot;
  mid.q_dot = state.q_dot + 0.5 * dt * k1;
  mid.t = state.t + 0.5 * dt;
  const Vec k2 = forward_dynamics(model, mid, tau_c, pert);

  ArmState next;
  next.q = state.q + dt * mid.q_dot;
  next.q_dot = state.q_dot + dt * k2;
  next.t = state.t + dt;
  next.torque_clamped = torque_clamped;
  next.joint_limited = false;
  for (Eigen::Index i = 0; i < next.q.size(); ++i) {
    if (next.q[i] < model.joint_limits(i, 0)) {
      next.q[i] = model.joint_limits(i, 0);
      next.q_dot[i] = 0.0;
      next.joint_limited = true;
    } else if (next.q[i] > model.joint_limits(i, 1)) {
      next.q[i] = model.joint_limits(i, 1);
      next.q_dot[i] = 0.0;
      next.joint_limited = true;
    }
  }
  if (!AllFinite(next.q) || !AllFinite(next.q_dot))
    throw std::runtime_error("step: state became non-finite at t=" +
                             std::to_string(next.t));
  return next;
}

struct IkResult {
  Vec q;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
};

// Damped-least-squares inverse kinematics for the end effector.
inline IkResult damped_ls_ik(const ArmModel& model, const Eigen::Vector2d& target,
                             const Vec& q_seed, double lambda = 0.1,
                             int max_iters = 500, double tol = 1e-8) {
  IkResult result;
  result.q = q_seed;
  for (int it = 0; it < max_iters; ++it) {
    const Vec ee = forward_kinematics(model, result.q);
    const Eigen::Vector2d r = target - Eigen::Vector2d(ee[0], ee[1]);
    result.residual = r.norm();
    result.iterations = it;
    if (result.residual < tol) {
      result.converged = true;
      return result;
    }
    const Mat jac = fk_jacobian(model, result.q);
    const Eigen::Matrix2d jjt =
        jac * jac.transpose() + lambda * lambda * Eigen::Matrix2d::Identity();
    result.q += jac.transpose() * jjt.ldlt().solve(r);
  }
  const Vec ee = forward_kinematics(model, result.q);
  result.residual = (target - Eigen::Vector2d(ee[0], ee[1])).norm();
  result.converged = result.residual < tol;
  return result;
}

}  // namespace maic

#endif  // MAIC_ARM_HPP_
