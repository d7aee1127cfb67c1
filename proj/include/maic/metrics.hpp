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

// Error traces and their phase aggregates. Each goal interval splits into a
// transient window (first 10 s) and a steady-state window (the rest); the two
// windows tile the interval exactly and no tick is counted twice.

#ifndef MAIC_METRICS_HPP_
#define MAIC_METRICS_HPP_

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "maic/free_energy.hpp"

namespace maic {

struct GoalSchedule {
  int n_goals = 0;
  double per_goal_duration = 20.0;
  double transient_duration = 10.0;
  double dt = 1e-3;

  double total_duration() const { return n_goals * per_goal_duration; }
  int ticks_per_goal() const {
    return static_cast<int>(std::llround(per_goal_duration / dt));
  }
  int transient_ticks() const {
    return static_cast<int>(std::llround(
        std::min(transient_duration, per_goal_duration) / dt));
  }

  enum class Phase { kTransient, kSteady };

  // Classification is by tick index, not by accumulated time: float drift in
  // t must not leak a goal-switch peak into the neighboring steady window.
  Phase PhaseAtTick(Eigen::Index tick) const {
    const int local = static_cast<int>(tick % ticks_per_goal());
    return local < transient_ticks() ? Phase::kTransient : Phase::kSteady;
  }

  int GoalIndexAtTick(Eigen::Index tick) const {
    return std::min(static_cast<int>(tick / ticks_per_goal()), n_goals - 1);
  }
};

struct PhaseStats {
  double rmse = 0.0;
  double stddev = 0.0;  // population std of the absolute errors
  long count = 0;
};

struct MetricsRecord {
  std::string controller;
  std::string scenario;
  std::uint64_t root_seed = 0;
  std::uint64_t gains_hash = 0;
  double dt = 1e-3;
  bool failed = false;
  std::string failure;

  std::vector<double> t;
  Mat goal_error;          // n_joints x ticks, q - q_d
  Mat perception_error;    // n_joints x ticks, mu - q
  std::vector<double> image_error;  // empty when the controller has no decoder
  std::vector<double> ee_error;     // empty when no GP mapping runs
  std::vector<double> vfe;

  PhaseStats full, transient_phase, steady;
  bool overshoot = false;  // any joint crossed its goal by more than 5% of the step

  double MeanAbsGoalError(Eigen::Index tick) const {
    return goal_error.col(tick).cwiseAbs().mean();
  }
};

namespace detail {

inline PhaseStats StatsOver(const std::vector<double>& sq_samples) {
  PhaseStats s;
  s.count = static_cast<long>(sq_samples.size());
  if (sq_samples.empty()) return s;
  double sum_sq = 0.0, sum_abs = 0.0;
  for (double v : sq_samples) {
    sum_sq += v;
    sum_abs += std::sqrt(v);
  }
  const double n = static_cast<double>(sq_samples.size());
  s.rmse = std::sqrt(sum_sq / n);
  const double mean_abs = sum_abs / n;
  double var = 0.0;
  for (double v : sq_samples) {
    const double d = std::sqrt(v) - mean_abs;
    var += d * d;
  }
  s.stddev = std::sqrt(var / n);
  return s;
}

}  // namespace detail

// Phase-split RMSE/std over the pooled per-joint goal errors.
inline void compute_phase_stats(MetricsRecord* record, const GoalSchedule& schedule) {
  std::vector<double> full, transient_sq, steady_sq;
  const Eigen::Index ticks = record->goal_error.cols();
  const Eigen::Index n = record->goal_error.rows();
  for (Eigen::Index k = 0; k < ticks; ++k) {
    const auto phase = schedule.PhaseAtTick(k);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double e2 = record->goal_error(j, k) * record->goal_error(j, k);
      full.push_back(e2);
      if (phase == GoalSchedule::Phase::kTransient)
        transient_sq.push_back(e2);
      else
        steady_sq.push_back(e2);
    }
  }
  record->full = detail::StatsOver(full);
  record->transient_phase = detail::StatsOver(transient_sq);
  record->steady = detail::StatsOver(steady_sq);
}

// RMSE/std of pooled per-joint errors over an arbitrary time window. Ticks
// are mapped to nominal times (index * dt) so boundaries are drift-free.
inline PhaseStats stats_in_window(const MetricsRecord& record, double t_lo, double t_hi) {
  std::vector<double> sq;
  for (std::size_t k = 0; k < record.t.size(); ++k) {
    const double nominal = static_cast<double>(k) * record.dt;
    if (nominal < t_lo || nominal >= t_hi) continue;
    for (Eigen::Index j = 0; j < record.goal_error.rows(); ++j)
      sq.push_back(record.goal_error(j, static_cast<Eigen::Index>(k)) *
                   record.goal_error(j, static_cast<Eigen::Index>(k)));
  }
  return detail::StatsOver(sq);
}

// Mean absolute goal error within [t_lo, t_hi).
inline double mean_abs_error_in_window(const MetricsRecord& record, double t_lo,
                                       double t_hi) {
  double sum = 0.0;
  long count = 0;
  for (std::size_t k = 0; k < record.t.size(); ++k) {
    const double nominal = static_cast<double>(k) * record.dt;
    if (nominal < t_lo || nominal >= t_hi) continue;
    sum += record.goal_error.col(static_cast<Eigen::Index>(k)).cwiseAbs().mean();
    ++count;
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

}  // namespace maic

#endif  // MAIC_METRICS_HPP_
