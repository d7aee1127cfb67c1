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

// Full benchmark over {controllers} x {scenarios}: the phase-split RMSE/std
// table with rank annotations, the ablation study, and the --check assertions
// on the orderings the benchmark is expected to reproduce.

#ifndef MAIC_BENCH_HPP_
#define MAIC_BENCH_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "maic/io.hpp"
#include "maic/metrics.hpp"
#include "maic/scenario.hpp"

namespace maic {

inline const std::vector<std::string>& bench_controllers() {
  static const std::vector<std::string> kIds = {"aic", "maic-gp", "maic-vae",
                                                "mpc", "ic"};
  return kIds;
}

struct BenchCell {
  bool failed = false;
  std::string failure;
  PhaseStats full, transient_phase, steady;
  bool overshoot = false;
  std::uint64_t gains_hash = 0;
};

struct BenchTable {
  std::uint64_t root_seed = 0;
  std::vector<std::string> controllers;
  std::vector<std::string> scenarios;
  // cells[controller][scenario]
  std::vector<std::vector<BenchCell>> cells;
  bool any_failed = false;

  const BenchCell& At(const std::string& controller, const std::string& scenario) const {
    for (std::size_t i = 0; i < controllers.size(); ++i)
      for (std::size_t j = 0; j < scenarios.size(); ++j)
        if (controllers[i] == controller && scenarios[j] == scenario)
          return cells[i][j];
    throw std::out_of_range("bench cell not found");
  }
};

inline BenchTable bench_all(const TestbedConfig& tb, std::uint64_t root_seed,
                            const GpModel* gp, const MvaeModel* mvae,
                            const std::filesystem::path& out_dir) {
  BenchTable table;
  table.root_seed = root_seed;
  table.controllers = bench_controllers();
  table.scenarios = scenario_ids();
  table.cells.assign(table.controllers.size(),
                     std::vector<BenchCell>(table.scenarios.size()));

  std::uint64_t common_hash = 0;
  bool have_hash = false;
  for (std::size_t ci = 0; ci < table.controllers.size(); ++ci) {
    for (std::size_t si = 0; si < table.scenarios.size(); ++si) {
      BenchCell& cell = table.cells[ci][si];
      ScenarioConfig cfg;
      cfg.controller_id = table.controllers[ci];
      cfg.scenario_id = table.scenarios[si];
      cfg.seed = Rng::DeriveSeed(root_seed, si);
      if (!out_dir.empty())
        cfg.diagnostics_csv = out_dir / (cfg.controller_id + "_" +
                                         cfg.scenario_id + ".csv");
      try {
        const RunResult run = run_scenario(tb, cfg, gp, mvae);
        cell.full = run.metrics.full;
        cell.transient_phase = run.metrics.transient_phase;
        cell.steady = run.metrics.steady;
        cell.overshoot = run.metrics.overshoot;
        cell.gains_hash = run.metrics.gains_hash;
        if (!have_hash) {
          common_hash = cell.gains_hash;
          have_hash = true;
        } else if (cell.gains_hash != common_hash) {
          throw std::runtime_error("gains hash changed between scenarios");
        }
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.failure = e.what();
        table.any_failed = true;
      }
    }
  }
  return table;
}

inline Json bench_table_json(const BenchTable& table) {
  Json out;
  out["root_seed"] = table.root_seed;
  out["controllers"] = table.controllers;
  out["scenarios"] = table.scenarios;
  Json cells = Json::array();
  for (std::size_t ci = 0; ci < table.controllers.size(); ++ci) {
    for (std::size_t si = 0; si < table.scenarios.size(); ++si) {
      const BenchCell& cell = table.cells[ci][si];
      Json c{{"controller", table.controllers[ci]},
             {"scenario", table.scenarios[si]}};
      if (cell.failed) {
        c["status"] = "FAILED";
        c["failure"] = cell.failure;
      } else {
        c["status"] = "ok";
        c["gains_hash"] = cell.gains_hash;
        c["overshoot"] = cell.overshoot;
        auto phase = [](const PhaseStats& s) {
          return Json{{"rmse", s.rmse}, {"std", s.stddev}, {"count", s.count}};
        };
        c["full"] = phase(cell.full);
        c["transient"] = phase(cell.transient_phase);
        c["steady"] = phase(cell.steady);
      }
      cells.push_back(c);
    }
  }
  out["cells"] = cells;

  // Rank annotations: lowest and second-lowest RMSE per (scenario, phase).
  Json ranks = Json::array();
  for (std::string_view phase : {"full", "transient", "steady"}) {
    for (std::size_t si = 0; si < table.scenarios.size(); ++si) {
      std::vector<std::pair<double, std::string>> entries;
      for (std::size_t ci = 0; ci < table.controllers.size(); ++ci) {
        const BenchCell& cell = table.cells[ci][si];
        if (cell.failed) continue;
        const PhaseStats& s = phase == "full" ? cell.full
                              : phase == "transient" ? cell.transient_phase
                                                     : cell.steady;
        entries.emplace_back(s.rmse, table.controllers[ci]);
      }
      std::sort(entries.begin(), entries.end());
      Json r{{"scenario", table.scenarios[si]}, {"phase", std::string(phase)}};
      if (!entries.empty()) r["min"] = entries[0].second;
      if (entries.size() > 1) r["second_min"] = entries[1].second;
      ranks.push_back(r);
    }
  }
  out["ranks"] = ranks;
  return out;
}

inline std::string bench_table_text(const BenchTable& table) {
  std::ostringstream out;
  out << "root_seed=" << table.root_seed << "\n";
  for (std::string_view phase : {"full", "transient", "steady"}) {
    out << "\n[" << phase << "] RMSE (std) [rad]\n";
    out << std::left << std::setw(12) << "controller";
    for (const auto& s : table.scenarios) out << std::setw(24) << s;
    out << "\n";
    for (std::size_t ci = 0; ci < table.controllers.size(); ++ci) {
      out << std::left << std::setw(12) << table.controllers[ci];
      for (std::size_t si = 0; si < table.scenarios.size(); ++si) {
        const BenchCell& cell = table.cells[ci][si];
        if (cell.failed) {
          out << std::setw(24) << "FAILED";
          continue;
        }
        const PhaseStats& s = phase == "full" ? cell.full
                              : phase == "transient" ? cell.transient_phase
                                                     : cell.steady;
        std::ostringstream v;
        v << std::scientific << std::setprecision(2) << s.rmse << " ("
          << s.stddev << ")";
        out << std::setw(24) << v.str();
      }
      out << "\n";
    }
  }
  return out.str();
}

struct CheckResult {
  bool ok = true;
  std::vector<std::string> violations;

  void Require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      violations.push_back(what);
    }
  }
};

// Fixed-seed regression assertions over the benchmark table: the orderings
// and patterns the five experiments are expected to reproduce at desk scale.
inline CheckResult bench_check(const BenchTable& table) {
  CheckResult check;
  if (table.any_failed) {
    check.Require(false, "one or more scenario runs failed");
    return check;
  }
  for (const std::string& ctrl : table.controllers)
    for (const std::string& scen : table.scenarios) {
      const BenchCell& cell = table.At(ctrl, scen);
      check.Require(cell.steady.rmse < cell.transient_phase.rmse,
                    ctrl + "/" + scen + ": steady RMSE not below transient");
    }
  // Constraint adaptation ordering at steady state.
  check.Require(table.At("maic-gp", "constraint").steady.rmse <
                    table.At("aic", "constraint").steady.rmse,
                "constraint steady: maic-gp not below aic");
  check.Require(table.At("aic", "constraint").steady.rmse <
                    table.At("ic", "constraint").steady.rmse,
                "constraint steady: aic not below ic");
  // Noise rejection: the learned multimodal controllers beat the ablated one.
  check.Require(table.At("maic-vae", "noisy").full.rmse <
                    table.At("aic", "noisy").full.rmse,
                "noisy full: maic-vae not below aic");
  check.Require(table.At("maic-gp", "noisy").full.rmse <
                    table.At("aic", "noisy").full.rmse,
                "noisy full: maic-gp not below aic");
  // Human-push steady state dominated by MPC's failure to recover.
  for (const char* ctrl : {"aic", "maic-gp", "maic-vae", "ic"})
    check.Require(table.At(ctrl, "human").steady.rmse <
                      table.At("mpc", "human").steady.rmse,
                  std::string(ctrl) + "/human: not below mpc steady RMSE");
  return check;
}

struct AblationReport {
  MetricsRecord full_gp, ablated_gp, aic;
  MetricsRecord full_vae, ablated_vae;
  bool gp_ablation_bit_identical = false;
  double gp_rmse_rel_delta = 0.0;
  double vae_rmse_rel_delta = 0.0;
  bool gp_shape_class_unchanged = false;
  bool vae_shape_class_unchanged = false;
};

// Vanilla-scenario ablation study: MAIC-GP against its EE-stripped variant
// (which must reproduce AIC exactly) and MAIC-VAE against its
// proprioceptive-only variant.
inline AblationReport ablate(const TestbedConfig& tb, std::uint64_t seed,
                             const GpModel& gp, const MvaeModel& mvae) {
  AblationReport report;
  ScenarioConfig cfg;
  cfg.scenario_id = "vanilla";
  cfg.seed = seed;

  cfg.controller_id = "maic-gp";
  report.full_gp = run_scenario(tb, cfg, &gp, &mvae).metrics;
  cfg.controller_id = "maic-gp-ablated";
  report.ablated_gp = run_scenario(tb, cfg, &gp, &mvae).metrics;
  cfg.controller_id = "aic";
  report.aic = run_scenario(tb, cfg, &gp, &mvae).metrics;
  cfg.controller_id = "maic-vae";
  report.full_vae = run_scenario(tb, cfg, &gp, &mvae).metrics;
  cfg.controller_id = "maic-vae-ablated";
  report.ablated_vae = run_scenario(tb, cfg, &gp, &mvae).metrics;

  report.gp_ablation_bit_identical =
      report.ablated_gp.goal_error == report.aic.goal_error &&
      report.ablated_gp.perception_error == report.aic.perception_error;
  report.gp_rmse_rel_delta =
      std::abs(report.full_gp.full.rmse - report.ablated_gp.full.rmse) /
      report.ablated_gp.full.rmse;
  report.vae_rmse_rel_delta =
      std::abs(report.full_vae.full.rmse - report.ablated_vae.full.rmse) /
      report.ablated_vae.full.rmse;
  report.gp_shape_class_unchanged =
      report.full_gp.overshoot == report.ablated_gp.overshoot;
  report.vae_shape_class_unchanged =
      report.full_vae.overshoot == report.ablated_vae.overshoot;
  return report;
}

}  // namespace maic

#endif  // MAIC_BENCH_HPP_
