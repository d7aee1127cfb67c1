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

// JSON testbed configuration. Every field is optional and overrides the
// built-in defaults; the schema is documented in the README.

#ifndef MAIC_CONFIG_HPP_
#define MAIC_CONFIG_HPP_

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "maic/scenario.hpp"

namespace maic {

namespace detail {

inline Vec VecFromJson(const Json& j) {
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

}  // namespace detail

inline void apply_config_json(const Json& j, TestbedConfig* tb,
                              bool benchmark_mode = false) {
  if (j.contains("arm")) {
    const Json& a = j.at("arm");
    ArmModel& m = tb->arm;
    if (a.contains("link_lengths")) m.link_lengths = detail::VecFromJson(a["link_lengths"]);
    m.n_joints = static_cast<int>(m.link_lengths.size());
    if (a.contains("link_masses")) m.link_masses = detail::VecFromJson(a["link_masses"]);
    if (a.contains("link_inertias")) m.link_inertias = detail::VecFromJson(a["link_inertias"]);
    else if (a.contains("link_lengths") || a.contains("link_masses"))
      m.link_inertias = m.link_masses.cwiseProduct(m.link_lengths.cwiseAbs2()) / 12.0;
    if (a.contains("link_com")) m.link_com = detail::VecFromJson(a["link_com"]);
    else if (a.contains("link_lengths")) m.link_com = 0.5 * m.link_lengths;
    if (a.contains("joint_damping")) m.joint_damping = detail::VecFromJson(a["joint_damping"]);
    else if (m.joint_damping.size() != m.n_joints)
      m.joint_damping = Vec::Constant(m.n_joints, 0.1);
    if (a.contains("gravity")) {
      m.gravity.x() = a["gravity"][0].get<double>();
      m.gravity.y() = a["gravity"][1].get<double>();
    }
    if (a.contains("torque_limits")) m.torque_limits = detail::VecFromJson(a["torque_limits"]);
    else if (m.torque_limits.size() != m.n_joints)
      m.torque_limits = Vec::Constant(m.n_joints, 5.0);
    if (a.contains("joint_limits")) {
      const Json& jl = a["joint_limits"];
      m.joint_limits.resize(static_cast<Eigen::Index>(jl.size()), 2);
      for (std::size_t i = 0; i < jl.size(); ++i) {
        m.joint_limits(static_cast<Eigen::Index>(i), 0) = jl[i][0].get<double>();
        m.joint_limits(static_cast<Eigen::Index>(i), 1) = jl[i][1].get<double>();
      }
    } else if (m.joint_limits.rows() != m.n_joints) {
      m.joint_limits.resize(m.n_joints, 2);
      m.joint_limits.col(0).setConstant(-2.97);
      m.joint_limits.col(1).setConstant(2.97);
    }
    m.Validate();
  }
  if (j.contains("camera")) {
    const Json& c = j.at("camera");
    CameraConfig& cam = tb->camera;
    cam.width = c.value("width", cam.width);
    cam.height = c.value("height", cam.height);
    cam.link_thickness = c.value("link_thickness", cam.link_thickness);
    cam.background_intensity = c.value("background_intensity", cam.background_intensity);
    cam.arm_intensity = c.value("arm_intensity", cam.arm_intensity);
    cam.Validate();
  }
  if (j.contains("gains")) {
    if (benchmark_mode)
      throw std::invalid_argument(
          "benchmark mode runs all scenarios with the stock gains; "
          "per-run gain overrides are refused");
    const Json& g = j.at("gains");
    ControllerGains& gains = tb->gains;
    gains.k_mu = g.value("k_mu", gains.k_mu);
    gains.k_q = g.value("k_q", gains.k_q);
    gains.k_v = g.value("k_v", gains.k_v);
    gains.k_ee = g.value("k_ee", gains.k_ee);
    gains.k_a = g.value("k_a", gains.k_a);
    gains.k_z = g.value("k_z", gains.k_z);
    gains.dt = g.value("dt", gains.dt);
    gains.Validate();
  }
  if (j.contains("precisions")) {
    const Json& p = j.at("precisions");
    PrecisionSet& prec = tb->precisions;
    prec.var_q = p.value("var_q", prec.var_q);
    prec.var_qdot = p.value("var_qdot", prec.var_qdot);
    prec.var_mu = p.value("var_mu", prec.var_mu);
    prec.var_mu1 = p.value("var_mu1", prec.var_mu1);
    prec.var_f = p.value("var_f", prec.var_f);
    prec.var_ee = p.value("var_ee", prec.var_ee);
    prec.Validate();
  }
  if (j.contains("goals_q")) {
    tb->goals_q.clear();
    for (const Json& g : j.at("goals_q"))
      tb->goals_q.push_back(detail::VecFromJson(g));
  }
  if (j.contains("q_home")) tb->q_home = detail::VecFromJson(j.at("q_home"));
  if (j.contains("ic_stiffness")) tb->ic_stiffness = detail::VecFromJson(j.at("ic_stiffness"));
  if (j.contains("mpc")) {
    const Json& m = j.at("mpc");
    McpConfig& mpc = tb->mpc;
    mpc.horizon = m.value("horizon", mpc.horizon);
    mpc.dt_mpc = m.value("dt_mpc", mpc.dt_mpc);
    if (m.contains("w_goal")) mpc.w_goal = detail::VecFromJson(m["w_goal"]);
    if (m.contains("w_tau")) mpc.w_tau = detail::VecFromJson(m["w_tau"]);
    mpc.max_iters = m.value("max_iters", mpc.max_iters);
    mpc.tol = m.value("tol", mpc.tol);
  }
}

inline TestbedConfig load_testbed_config(const std::filesystem::path& path,
                                         bool benchmark_mode = false) {
  TestbedConfig tb;
  if (path.empty()) return tb;
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument("config parse error in " + path.string() + ": " +
                                e.what());
  }
  apply_config_json(j, &tb, benchmark_mode);
  return tb;
}

}  // namespace maic

#endif  // MAIC_CONFIG_HPP_
