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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "maic/bench.hpp"
#include "maic/config.hpp"
#include "maic/io.hpp"
#include "maic/metrics.hpp"
#include "maic/scenario.hpp"
#include "maic/svg.hpp"

namespace maic {
namespace {

namespace fs = std::filesystem;

std::string ReadFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path TempDir() {
  const fs::path dir = fs::temp_directory_path() / "maic_harness_test";
  fs::create_directories(dir);
  return dir;
}

TEST(ComputeMetrics, HandArithmeticOnTwoPhaseTrace) {
  MetricsRecord rec;
  GoalSchedule schedule{1, 20.0, 10.0, 0.01};
  const int ticks = 2000;
  rec.goal_error.resize(1, ticks);
  for (int k = 0; k < ticks; ++k) {
    const double t = k * 0.01;
    rec.t.push_back(t);
    rec.goal_error(0, k) = t < 10.0 ? 0.1 : 0.01;
  }
  compute_phase_stats(&rec, schedule);
  EXPECT_NEAR(rec.transient_phase.rmse, 0.1, 1e-12);
  EXPECT_NEAR(rec.steady.rmse, 0.01, 1e-12);
  EXPECT_NEAR(rec.full.rmse, std::sqrt((0.1 * 0.1 + 0.01 * 0.01) / 2.0), 1e-12);
  EXPECT_NEAR(rec.transient_phase.stddev, 0.0, 1e-12);
}

TEST(ComputeMetrics, PhaseWindowsTileEachGoal) {
  MetricsRecord rec;
  GoalSchedule schedule{3, 20.0, 10.0, 1e-3};
  const int ticks = 3 * 20000;
  rec.goal_error.resize(2, ticks);
  rec.goal_error.setConstant(0.5);
  for (int k = 0; k < ticks; ++k) rec.t.push_back(k * 1e-3);
  compute_phase_stats(&rec, schedule);
  EXPECT_EQ(rec.transient_phase.count + rec.steady.count, rec.full.count);
  EXPECT_EQ(rec.full.count, 2L * ticks);
  EXPECT_EQ(rec.transient_phase.count, rec.steady.count);  // equal windows
}

TEST(ComputeMetrics, ConstantZeroTraceGivesZeroRmse) {
  MetricsRecord rec;
  GoalSchedule schedule{1, 20.0, 10.0, 0.2};
  rec.goal_error = Mat::Zero(3, 100);
  for (int k = 0; k < 100; ++k) rec.t.push_back(k * 0.2);
  compute_phase_stats(&rec, schedule);
  EXPECT_EQ(rec.full.rmse, 0.0);
  EXPECT_EQ(rec.steady.rmse, 0.0);
}

TEST(ImageError, FrobeniusNormOfOnesImage) {
  const Image a = Image::Ones(4, 4);
  const Image b = Image::Zero(4, 4);
  EXPECT_DOUBLE_EQ((a - b).norm(), 4.0);
}

TEST(RunScenario, ZeroDurationYieldsEmptyMetrics) {
  TestbedConfig tb;
  ScenarioConfig cfg;
  cfg.controller_id = "aic";
  cfg.per_goal_duration = 0.0;
  cfg.benchmark_mode = false;
  const RunResult run = run_scenario(tb, cfg);
  EXPECT_EQ(run.metrics.t.size(), 0u);
  EXPECT_EQ(run.metrics.full.count, 0);
}

TEST(RunScenario, DemoRunConvergesAndWritesDeterministicCsv) {
  TestbedConfig tb;
  ScenarioConfig cfg;
  cfg.controller_id = "aic";
  cfg.scenario_id = "vanilla";
  cfg.per_goal_duration = 6.0;
  cfg.benchmark_mode = false;
  cfg.seed = 11;
  const fs::path dir = TempDir();
  cfg.trajectory_csv = dir / "traj_a.csv";
  cfg.diagnostics_csv = dir / "diag_a.csv";
  const RunResult a = run_scenario(tb, cfg);
  // Last second of every goal: settled well below 2e-2 rad.
  for (int g = 0; g < 4; ++g) {
    const double err = mean_abs_error_in_window(a.metrics, g * 6.0 + 5.0, (g + 1) * 6.0);
    EXPECT_LT(err, 2e-2) << "goal " << g;
  }
  EXPECT_FALSE(a.metrics.overshoot);

  cfg.trajectory_csv = dir / "traj_b.csv";
  cfg.diagnostics_csv = dir / "diag_b.csv";
  run_scenario(tb, cfg);
  EXPECT_EQ(ReadFile(dir / "traj_a.csv"), ReadFile(dir / "traj_b.csv"));
  EXPECT_EQ(ReadFile(dir / "diag_a.csv"), ReadFile(dir / "diag_b.csv"));
}

TEST(RunScenario, MissingGoalPeakIsAFault) {
  TestbedConfig tb;
  // All goals identical: no error peak at the switches.
  tb.goals_q = {tb.q_home, tb.q_home, tb.q_home};
  ScenarioConfig cfg;
  cfg.controller_id = "aic";
  cfg.per_goal_duration = 1.0;
  cfg.benchmark_mode = false;
  EXPECT_THROW(run_scenario(tb, cfg), std::runtime_error);
}

TEST(RunScenario, BenchmarkModeRequiresTwentySecondGoals) {
  TestbedConfig tb;
  ScenarioConfig cfg;
  cfg.per_goal_duration = 5.0;
  cfg.benchmark_mode = true;
  EXPECT_THROW(cfg.Validate(tb), std::invalid_argument);
}

TEST(MakeController, MissingModelsNameTheTrainingSubcommand) {
  TestbedConfig tb;
  try {
    make_controller("maic-gp", tb, nullptr, nullptr);
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("train-gp"), std::string::npos);
  }
  try {
    make_controller("maic-vae", tb, nullptr, nullptr);
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("train-mvae"), std::string::npos);
  }
  EXPECT_THROW(make_controller("bogus", tb, nullptr, nullptr), std::invalid_argument);
}

TEST(ScenarioPerturbation, CoversAllIdsAndRejectsUnknown) {
  TestbedConfig tb;
  for (const std::string& id : scenario_ids()) {
    const Perturbation p = scenario_perturbation(id, tb, 20.0, 1);
    if (id == "vanilla") {
      EXPECT_EQ(p.kind, Perturbation::Kind::kNone);
    }
    if (id == "noisy") {
      EXPECT_DOUBLE_EQ(p.noise_variance, 0.1);
    }
    if (id == "human") {
      EXPECT_EQ(p.push_intervals.size(), tb.goals_q.size());
    }
  }
  EXPECT_THROW(scenario_perturbation("wat", tb, 20.0, 1), std::invalid_argument);
}

TEST(Config, GainsOverrideRefusedInBenchmarkMode) {
  const fs::path dir = TempDir();
  const fs::path cfg_path = dir / "cfg.json";
  std::ofstream(cfg_path) << R"({"gains": {"k_a": 4.0}})";
  EXPECT_NO_THROW(load_testbed_config(cfg_path, /*benchmark=*/false));
  EXPECT_THROW(load_testbed_config(cfg_path, /*benchmark=*/true),
               std::invalid_argument);
}

TEST(Config, ParseErrorsAreConfigErrors) {
  const fs::path dir = TempDir();
  const fs::path cfg_path = dir / "broken.json";
  std::ofstream(cfg_path) << "{ not json";
  EXPECT_THROW(load_testbed_config(cfg_path), std::invalid_argument);
  EXPECT_THROW(load_testbed_config(dir / "does_not_exist.json"),
               std::invalid_argument);
}

TEST(Config, OverridesApplyAndValidate) {
  const fs::path dir = TempDir();
  const fs::path cfg_path = dir / "ok.json";
  std::ofstream(cfg_path) << R"({
    "arm": {"link_lengths": [0.3, 0.3], "link_masses": [0.5, 0.4]},
    "camera": {"width": 16, "height": 16},
    "precisions": {"var_q": 2.0},
    "per_goal_duration": 20
  })";
  const TestbedConfig tb = load_testbed_config(cfg_path);
  EXPECT_EQ(tb.arm.n_joints, 2);
  EXPECT_EQ(tb.camera.width, 16);
  EXPECT_DOUBLE_EQ(tb.precisions.var_q, 2.0);
}

TEST(GainsHash, StableAndSensitive) {
  TestbedConfig a, b;
  EXPECT_EQ(a.GainsHash(), b.GainsHash());
  b.gains.k_a = 10.0;
  EXPECT_NE(a.GainsHash(), b.GainsHash());
}

TEST(BenchTable, JsonCarries150NumericCells) {
  BenchTable table;
  table.root_seed = 5;
  table.controllers = bench_controllers();
  table.scenarios = scenario_ids();
  table.cells.assign(5, std::vector<BenchCell>(5));
  const Json j = bench_table_json(table);
  EXPECT_EQ(j["cells"].size(), 25u);
  int numeric = 0;
  for (const auto& cell : j["cells"])
    for (const char* phase : {"full", "transient", "steady"}) {
      EXPECT_TRUE(cell.contains(phase));
      numeric += 2;  // rmse + std
    }
  EXPECT_EQ(numeric, 150);
  const std::string text = bench_table_text(table);
  EXPECT_NE(text.find("controller"), std::string::npos);
}

TEST(BenchTable, FailedCellsAreMarked) {
  BenchTable table;
  table.controllers = {"aic"};
  table.scenarios = {"vanilla"};
  table.cells.assign(1, std::vector<BenchCell>(1));
  table.cells[0][0].failed = true;
  table.cells[0][0].failure = "boom";
  table.any_failed = true;
  const Json j = bench_table_json(table);
  EXPECT_EQ(j["cells"][0]["status"], "FAILED");
  EXPECT_NE(bench_table_text(table).find("FAILED"), std::string::npos);
  const CheckResult check = bench_check(table);
  EXPECT_FALSE(check.ok);
}

TEST(EmitPlot, DeterministicAndHandlesEmptyRecords) {
  const fs::path dir = TempDir();
  MetricsRecord rec;
  rec.controller = "aic";
  rec.goal_error = Mat::Zero(2, 50);
  for (int k = 0; k < 50; ++k) {
    rec.t.push_back(k * 0.1);
    rec.goal_error(0, k) = std::exp(-0.1 * k);
  }
  emit_plot(dir / "p1.svg", {&rec}, {{1.0, 2.0}}, 7);
  emit_plot(dir / "p2.svg", {&rec}, {{1.0, 2.0}}, 7);
  EXPECT_EQ(ReadFile(dir / "p1.svg"), ReadFile(dir / "p2.svg"));

  MetricsRecord empty;
  empty.controller = "none";
  empty.goal_error = Mat::Zero(0, 0);
  emit_plot(dir / "empty.svg", {&empty}, {}, 0);
  const std::string svg = ReadFile(dir / "empty.svg");
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(EmitPlot, ShadesConfiguredIntervals) {
  const fs::path dir = TempDir();
  MetricsRecord rec;
  rec.controller = "aic";
  rec.goal_error = Mat::Ones(1, 100);
  for (int k = 0; k < 100; ++k) rec.t.push_back(k * 0.1);
  emit_plot(dir / "shaded.svg", {&rec}, {{2.0, 3.0}, {6.0, 7.0}}, 1);
  const std::string svg = ReadFile(dir / "shaded.svg");
  std::size_t shades = 0, pos = 0;
  while ((pos = svg.find("#f4cccc", pos)) != std::string::npos) {
    ++shades;
    pos += 1;
  }
  EXPECT_EQ(shades, 2u);
}

TEST(ModelIo, GpRoundTripsThroughDisk) {
  const fs::path dir = TempDir();
  Rng rng(1);
  Mat x_q(6, 3), x_ee(6, 2);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 3; ++j) x_q(i, j) = rng.Uniform(-1, 1);
    x_ee(i, 0) = rng.Gaussian();
    x_ee(i, 1) = rng.Gaussian();
  }
  GpHyperparams hp;
  hp.theta = Vec::Constant(3, 2.0);
  const GpModel model = fit(x_q, x_ee, hp);
  save_gp(dir / "gp.bin", model, 99);
  const GpModel loaded = load_gp(dir / "gp.bin");
  EXPECT_EQ(loaded.x_q, model.x_q);
  EXPECT_EQ(loaded.alpha, model.alpha);
  EXPECT_EQ(loaded.hp.sigma_f2, model.hp.sigma_f2);
  const Vec mu = (Vec(3) << 0.1, -0.3, 0.5).finished();
  EXPECT_EQ(predict(loaded, mu), predict(model, mu));
}

TEST(ModelIo, MvaeRoundTripsThroughDisk) {
  const fs::path dir = TempDir();
  MvaeModel m;
  m.cfg.image_h = 6;
  m.cfg.image_w = 6;
  m.cfg.n_joints = 2;
  m.cfg.latent_dim = 3;
  m.cfg.hidden_enc = 5;
  m.cfg.hidden_q = 4;
  m.cfg.hidden_v = 5;
  m.InitParams(3);
  m.precision_mask = Image::Constant(6, 6, 1.25);
  TrainConfig cfg;
  save_mvae(dir / "mvae.bin", m, cfg, 7);
  const MvaeModel loaded = load_mvae(dir / "mvae.bin");
  EXPECT_EQ(loaded.enc1.w, m.enc1.w);
  EXPECT_EQ(loaded.v2.b, m.v2.b);
  EXPECT_EQ(loaded.precision_mask, m.precision_mask);
  const Vec z = Vec::Ones(3);
  EXPECT_EQ(decode_q(loaded, z), decode_q(m, z));
}

TEST(ModelIo, WrongFormatIsRejected) {
  const fs::path dir = TempDir();
  Rng rng(2);
  Mat x_q(3, 2), x_ee(3, 2);
  x_q.setRandom();
  x_ee.setRandom();
  GpHyperparams hp;
  hp.theta = Vec::Ones(2);
  save_gp(dir / "model.bin", fit(x_q, x_ee, hp), 0);
  EXPECT_THROW(load_mvae(dir / "model.bin"), std::runtime_error);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(FormatDouble(0.1), "0.1");
  EXPECT_EQ(FormatDouble(-3.0), "-3");
  const double v = 0.123456789123456789;
  EXPECT_EQ(std::stod(FormatDouble(v)), v);
}

}  // namespace
}  // namespace maic
