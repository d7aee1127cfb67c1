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

// Testbed defaults, the five experiment scenarios and the closed-loop runner.
//
// The canonical goal set is the verbatim 7-joint sequential-reaching fixture;
// the default 3-link desk arm takes the first three coordinates of each goal
// (a projection, not a measured pose). The home position equals the fourth
// goal, so every run starts and ends there.

#ifndef MAIC_SCENARIO_HPP_
#define MAIC_SCENARIO_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "maic/arm.hpp"
#include "maic/camera.hpp"
#include "maic/controllers.hpp"
#include "maic/free_energy.hpp"
#include "maic/gp.hpp"
#include "maic/io.hpp"
#include "maic/metrics.hpp"
#include "maic/mpc.hpp"
#include "maic/mvae.hpp"

namespace maic {

// Verbatim 7-joint sequential-reaching goals (rad); the last one doubles as
// the home position.
inline const std::vector<std::vector<double>>& canonical_goals_7dof() {
  static const std::vector<std::vector<double>> kGoals = {
      {0.45, -0.38, 0.32, -2.45, 0.14, 2.06, 1.26},
      {0.70, -0.15, 0.10, -2.65, 0.31, 2.55, 1.23},
      {-0.03, -0.73, -0.25, -2.69, -0.18, 1.83, 0.79},
      {0.31, -0.47, 0.38, -2.16, 0.14, 1.71, 1.28}};
  return kGoals;
}

inline std::vector<Vec> projected_goals(int n_joints) {
  std::vector<Vec> goals;
  for (const auto& g7 : canonical_goals_7dof()) {
    Vec g(n_joints);
    for (int i = 0; i < n_joints; ++i)
      g[i] = g7[static_cast<std::size_t>(i) % g7.size()];
    goals.push_back(g);
  }
  return goals;
}

// Desk-scale 3-link arm. Light links keep the published controller gains in
// their stable overdamped regime; gravity defaults to zero, matching a plant
// whose low-level interface already compensates it.
inline ArmModel default_arm() {
  ArmModel m;
  m.n_joints = 3;
  m.link_lengths = (Vec(3) << 0.25, 0.20, 0.15).finished();
  m.link_masses = (Vec(3) << 0.4, 0.3, 0.2).finished();
  m.link_inertias = m.link_masses.cwiseProduct(m.link_lengths.cwiseAbs2()) / 12.0;
  m.link_com = 0.5 * m.link_lengths;
  m.joint_damping = Vec::Constant(3, 0.1);
  m.gravity = Eigen::Vector2d::Zero();
  m.torque_limits = Vec::Constant(3, 5.0);
  m.joint_limits.resize(3, 2);
  m.joint_limits.col(0).setConstant(-2.97);
  m.joint_limits.col(1).setConstant(2.97);
  m.Validate();
  return m;
}

inline CameraConfig default_camera() { return CameraConfig{}; }

inline Vec default_ic_stiffness(int n_joints) { return Vec::Constant(n_joints, 12.0); }

// Everything a run needs besides the scenario itself.
struct TestbedConfig {
  ArmModel arm = default_arm();
  CameraConfig camera = default_camera();
  ControllerGains gains;
  PrecisionSet precisions;
  std::vector<Vec> goals_q = projected_goals(3);
  Vec q_home = projected_goals(3).back();
  Vec ic_stiffness = default_ic_stiffness(3);
  McpConfig mpc = default_mpc_config(3);
  int mpc_replan_ticks = 100;  // 10 Hz at the 1 kHz tick

  std::string GainsCanonicalJson() const {
    Json j{{"k_mu", gains.k_mu}, {"k_q", gains.k_q},   {"k_v", gains.k_v},
           {"k_ee", gains.k_ee}, {"k_a", gains.k_a},   {"k_z", gains.k_z},
           {"dt", gains.dt},     {"var_q", precisions.var_q},
           {"var_qdot", precisions.var_qdot}, {"var_mu", precisions.var_mu},
           {"var_mu1", precisions.var_mu1},   {"var_f", precisions.var_f},
           {"var_ee", precisions.var_ee}};
    return j.dump();
  }
  std::uint64_t GainsHash() const { return Fnv1aHash(GainsCanonicalJson()); }
};

// Joint-space waypoints along the home -> goal1 -> ... -> goal4 transit,
// used to root the grid dataset on the branch the controllers operate on.
inline std::vector<Vec> transit_path_seeds(const TestbedConfig& tb,
                                           double step = 0.05) {
  std::vector<Vec> seeds;
  Vec prev = tb.q_home;
  for (const Vec& g : tb.goals_q) {
    const int n = std::max(1, static_cast<int>(std::ceil((g - prev).norm() / step)));
    for (int k = 1; k <= n; ++k)
      seeds.push_back(prev + (static_cast<double>(k) / n) * (g - prev));
    prev = g;
  }
  return seeds;
}

// The five named experiments.
inline const std::vector<std::string>& scenario_ids() {
  static const std::vector<std::string> kIds = {"vanilla", "inertial", "constraint",
                                                "human", "noisy"};
  return kIds;
}

// Push intervals sit inside each goal window, late enough that the pre-push
// steady error is measurable and early enough that recovery fits before the
// next goal switch.
inline std::vector<std::pair<double, double>> push_schedule(int n_goals,
                                                            double per_goal) {
  std::vector<std::pair<double, double>> intervals;
  const double len = std::min(2.0, 0.1 * per_goal);
  for (int g = 0; g < n_goals; ++g) {
    const double start = g * per_goal + 0.6 * per_goal;
    intervals.emplace_back(start, start + len);
  }
  return intervals;
}

inline Perturbation scenario_perturbation(const std::string& id,
                                          const TestbedConfig& tb,
                                          double per_goal_duration,
                                          std::uint64_t seed) {
  Perturbation p;
  if (id == "vanilla") {
    p.kind = Perturbation::Kind::kNone;
  } else if (id == "inertial") {
    p.kind = Perturbation::Kind::kInertialPayload;
    p.payload_mass = 0.15;
    p.payload_link = 1;
    p.slosh_amplitude = 0.06;
    p.slosh_frequency = 0.8;
  } else if (id == "constraint") {
    p.kind = Perturbation::Kind::kElasticBand;
    p.band_stiffness = 60.0;
    p.band_rest_length = 0.05;
    p.band_link_a = 0;
    p.band_link_b = tb.arm.n_joints - 1;
    p.band_max_tension = 4.0;
  } else if (id == "human") {
    p.kind = Perturbation::Kind::kHumanPush;
    p.push_amplitude = 0.15;
    p.push_intervals =
        push_schedule(static_cast<int>(tb.goals_q.size()), per_goal_duration);
    p.push_seed = Rng::DeriveSeed(seed, 0x70757368);
  } else if (id == "noisy") {
    p.kind = Perturbation::Kind::kSensorNoise;
    p.noise_variance = 0.1;
    p.noise_seed = Rng::DeriveSeed(seed, 0x6e6f6973);
  } else {
    throw std::invalid_argument("unknown scenario id: " + id);
  }
  p.Validate(tb.arm);
  return p;
}

struct ScenarioConfig {
  std::string scenario_id = "vanilla";
  std::string controller_id = "maic-gp";
  double per_goal_duration = 20.0;
  std::uint64_t seed = 0;
  bool benchmark_mode = true;
  std::filesystem::path trajectory_csv;   // empty: not written
  std::filesystem::path diagnostics_csv;  // empty: not written

  void Validate(const TestbedConfig& tb) const {
    if (benchmark_mode && per_goal_duration < 20.0)
      throw std::invalid_argument(
          "benchmark mode requires >= 20 s per goal for the phase split");
    if (per_goal_duration < 0)
      throw std::invalid_argument("per_goal_duration must be >= 0");
    for (const Vec& g : tb.goals_q)
      for (Eigen::Index i = 0; i < g.size(); ++i)
        if (g[i] < tb.arm.joint_limits(i, 0) || g[i] > tb.arm.joint_limits(i, 1))
          throw std::invalid_argument("goal outside joint limits");
  }
};

inline std::unique_ptr<Controller> make_controller(const std::string& id,
                                                   const TestbedConfig& tb,
                                                   const GpModel* gp,
                                                   const MvaeModel* mvae) {
  if (id == "aic")
    return std::make_unique<ProprioAifController>(tb.gains, tb.precisions,
                                                  tb.arm.torque_limits);
  if (id == "maic-gp" || id == "maic-gp-ablated") {
    if (gp == nullptr)
      throw std::runtime_error(
          "controller '" + id + "' needs a trained GP model; run `maic train-gp` first");
    return std::make_unique<ProprioAifController>(tb.gains, tb.precisions,
                                                  tb.arm.torque_limits, gp,
                                                  id == "maic-gp-ablated");
  }
  if (id == "maic-vae" || id == "maic-vae-ablated") {
    if (mvae == nullptr)
      throw std::runtime_error(
          "controller '" + id + "' needs a trained MVAE model; run `maic train-mvae` first");
    return std::make_unique<MaicVaeController>(tb.gains, tb.precisions,
                                               tb.arm.torque_limits, mvae,
                                               id == "maic-vae-ablated");
  }
  if (id == "ic")
    return std::make_unique<ImpedanceController>(tb.arm, tb.ic_stiffness, tb.q_home);
  if (id == "mpc")
    return std::make_unique<MpcController>(tb.arm, tb.mpc, tb.mpc_replan_ticks);
  throw std::invalid_argument("unknown controller id: " + id);
}

struct RunResult {
  MetricsRecord metrics;
  GoalSchedule schedule;
  std::vector<std::pair<double, double>> shaded_intervals;  // push windows
};

// Closed-loop run of one controller through the goal sequence under one
// perturbation. Deterministic given the seed. Asserts the goal-switch error
// peak the protocol expects.
inline RunResult run_scenario(const TestbedConfig& tb, const ScenarioConfig& cfg,
                              const GpModel* gp = nullptr,
                              const MvaeModel* mvae = nullptr) {
  cfg.Validate(tb);
  const Perturbation pert =
      scenario_perturbation(cfg.scenario_id, tb, cfg.per_goal_duration, cfg.seed);

  RunResult result;
  result.schedule.n_goals = static_cast<int>(tb.goals_q.size());
  result.schedule.per_goal_duration = cfg.per_goal_duration;
  result.schedule.dt = tb.gains.dt;
  if (pert.kind == Perturbation::Kind::kHumanPush)
    result.shaded_intervals = pert.push_intervals;

  MetricsRecord& rec = result.metrics;
  rec.controller = cfg.controller_id;
  rec.scenario = cfg.scenario_id;
  rec.root_seed = cfg.seed;
  rec.gains_hash = tb.GainsHash();
  rec.dt = tb.gains.dt;

  const int ticks_per_goal =
      static_cast<int>(std::llround(cfg.per_goal_duration / tb.gains.dt));
  const int total_ticks = ticks_per_goal * result.schedule.n_goals;
  const Eigen::Index n = tb.arm.n_joints;
  rec.goal_error.resize(n, total_ticks);
  rec.perception_error.resize(n, total_ticks);
  rec.t.reserve(static_cast<std::size_t>(total_ticks));
  if (total_ticks == 0) return result;  // zero-duration run: empty metrics

  auto controller = make_controller(cfg.controller_id, tb, gp, mvae);
  const bool with_image = controller->needs_image();
  const bool with_gp = cfg.controller_id == "maic-gp";

  // Goals with derived end-effector and image targets.
  std::vector<Goal> goals;
  for (const Vec& q_d : tb.goals_q) {
    Goal g;
    g.q_d = q_d;
    g.ee_d = forward_kinematics(tb.arm, q_d);
    g.v_d = render(tb.arm, q_d, tb.camera);
    goals.push_back(std::move(g));
  }

  Rng noise_rng(Rng::DeriveSeed(cfg.seed, 0x6f627376));
  ArmState state;
  state.q = tb.q_home;
  state.q_dot = Vec::Zero(n);
  state.t = 0.0;

  controller->Reset(observe(tb.arm, state, pert, tb.camera, noise_rng, with_image));

  std::unique_ptr<CsvWriter> traj, diag;
  if (!cfg.trajectory_csv.empty()) {
    traj = std::make_unique<CsvWriter>(cfg.trajectory_csv);
    traj->Comment("root_seed=" + std::to_string(cfg.seed) + " controller=" +
                  cfg.controller_id + " scenario=" + cfg.scenario_id);
    std::vector<std::string> cols{"t"};
    for (Eigen::Index i = 0; i < n; ++i) cols.push_back("q" + std::to_string(i));
    for (Eigen::Index i = 0; i < n; ++i) cols.push_back("q_dot" + std::to_string(i));
    for (Eigen::Index i = 0; i < n; ++i) cols.push_back("tau" + std::to_string(i));
    cols.push_back("flags");
    traj->Header(cols);
  }
  if (!cfg.diagnostics_csv.empty()) {
    diag = std::make_unique<CsvWriter>(cfg.diagnostics_csv);
    diag->Comment("root_seed=" + std::to_string(cfg.seed) + " controller=" +
                  cfg.controller_id + " scenario=" + cfg.scenario_id +
                  " gains_hash=" + std::to_string(rec.gains_hash));
    std::vector<std::string> cols{"t"};
    for (Eigen::Index i = 0; i < n; ++i) cols.push_back("goal_err" + std::to_string(i));
    for (Eigen::Index i = 0; i < n; ++i)
      cols.push_back("belief_err" + std::to_string(i));
    cols.push_back("vfe");
    cols.push_back("image_err");
    cols.push_back("ee_err");
    diag->Header(cols);
  }

  int tick = 0;
  double prev_goal_tail_err = -1.0;
  for (int g = 0; g < result.schedule.n_goals; ++g) {
    const Goal& goal = goals[static_cast<std::size_t>(g)];
    for (int k = 0; k < ticks_per_goal; ++k, ++tick) {
      const SensorSnapshot snap =
          observe(tb.arm, state, pert, tb.camera, noise_rng, with_image);
      const Vec tau = controller->Tick(snap, goal);
      const ControllerState& cs = controller->state();

      rec.t.push_back(state.t);
      rec.goal_error.col(tick) = state.q - goal.q_d;
      rec.perception_error.col(tick) = cs.belief.mu - state.q;
      rec.vfe.push_back(cs.diag.vfe);
      if (with_image) rec.image_error.push_back(cs.diag.image_error);
      if (with_gp) rec.ee_error.push_back(cs.diag.ee_error);

      if (k == 0 && g > 0) {
        const double peak = rec.goal_error.col(tick).cwiseAbs().mean();
        if (!(peak > prev_goal_tail_err))
          throw std::runtime_error("run_scenario: no error peak at goal switch " +
                                   std::to_string(g));
      }

      if (traj) {
        std::vector<double> row{state.t};
        for (Eigen::Index i = 0; i < n; ++i) row.push_back(state.q[i]);
        for (Eigen::Index i = 0; i < n; ++i) row.push_back(state.q_dot[i]);
        for (Eigen::Index i = 0; i < n; ++i) row.push_back(tau[i]);
        row.push_back(static_cast<double>((state.torque_clamped ? 1 : 0) |
                                          (state.joint_limited ? 2 : 0)));
        traj->Row(row);
      }
      if (diag) {
        std::vector<double> row{state.t};
        for (Eigen::Index i = 0; i < n; ++i) row.push_back(rec.goal_error(i, tick));
        for (Eigen::Index i = 0; i < n; ++i)
          row.push_back(rec.perception_error(i, tick));
        row.push_back(cs.diag.vfe);
        row.push_back(with_image ? cs.diag.image_error : 0.0);
        row.push_back(with_gp ? cs.diag.ee_error : 0.0);
        diag->Row(row);
      }

      state = step(tb.arm, state, tau, pert, tb.gains.dt);
    }
    prev_goal_tail_err = rec.goal_error.col(tick - 1).cwiseAbs().mean();
  }

  compute_phase_stats(&rec, result.schedule);

  // Overshoot: any joint crossing its goal by more than 5% of the goal
  // change's magnitude (the largest per-joint step), evaluated per segment.
  rec.overshoot = false;
  for (int g = 0; g < result.schedule.n_goals && !rec.overshoot; ++g) {
    const Eigen::Index lo = g * ticks_per_goal;
    const double step_size = rec.goal_error.col(lo).cwiseAbs().maxCoeff();
    if (step_size < 1e-6) continue;
    for (Eigen::Index j = 0; j < n && !rec.overshoot; ++j) {
      const double initial = rec.goal_error(j, lo);
      if (std::abs(initial) < 1e-9) continue;
      const double sign = initial > 0 ? 1.0 : -1.0;
      for (Eigen::Index k = lo; k < lo + ticks_per_goal; ++k) {
        if (-sign * rec.goal_error(j, k) > 0.05 * step_size) {
          rec.overshoot = true;
          break;
        }
      }
    }
  }
  return result;
}

}  // namespace maic

#endif  // MAIC_SCENARIO_HPP_
