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

// Command-line front end: dataset/model lifecycle, scenario runs, the full
// benchmark with regression checks, the ablation study, mental simulation
// and plot emission.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime fault,
// 3 benchmark regression (bench --check).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "maic/bench.hpp"
#include "maic/config.hpp"
#include "maic/controllers.hpp"
#include "maic/io.hpp"
#include "maic/scenario.hpp"
#include "maic/svg.hpp"

namespace fs = std::filesystem;
using namespace maic;

namespace {

struct CommonOpts {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
};

void AddCommon(CLI::App* cmd, CommonOpts* opts) {
  cmd->add_option("--config", opts->config_path, "JSON testbed config");
  cmd->add_option("--seed", opts->seed, "root seed");
  cmd->add_option("--out", opts->out_dir, "output directory");
}

WorkspaceBox DefaultWorkspace(const TestbedConfig& tb, double margin = 0.06) {
  WorkspaceBox box;
  box.lo = Eigen::Vector2d::Constant(1e9);
  box.hi = Eigen::Vector2d::Constant(-1e9);
  for (const Vec& g : tb.goals_q) {
    const Vec ee = forward_kinematics(tb.arm, g);
    box.lo = box.lo.cwiseMin(Eigen::Vector2d(ee[0], ee[1]));
    box.hi = box.hi.cwiseMax(Eigen::Vector2d(ee[0], ee[1]));
  }
  box.lo.array() -= margin;
  box.hi.array() += margin;
  return box;
}

GpModel LoadGpOrDie(const fs::path& path) {
  if (!fs::exists(path))
    throw std::invalid_argument("missing GP model " + path.string() +
                                "; run `maic gen-dataset` then `maic train-gp` first");
  return load_gp(path);
}

MvaeModel LoadMvaeOrDie(const fs::path& path) {
  if (!fs::exists(path))
    throw std::invalid_argument("missing MVAE model " + path.string() +
                                "; run `maic train-mvae` first");
  return load_mvae(path);
}

int GenDataset(const CommonOpts& opts, int n_per_axis) {
  const TestbedConfig tb = load_testbed_config(opts.config_path);
  fs::create_directories(opts.out_dir);
  const WorkspaceBox box = DefaultWorkspace(tb);
  const GridDataset ds = generate_grid_dataset(tb.arm, n_per_axis, box, tb.q_home,
                                               transit_path_seeds(tb));
  save_dataset(fs::path(opts.out_dir) / "dataset.bin", ds, opts.seed);
  std::cout << "dataset: " << ds.x_q.rows() << " kept / " << ds.candidates
            << " candidates (" << ds.dropped << " unreachable), box diameter "
            << FormatDouble(box.diameter()) << " m\n";
  return 0;
}

int TrainGp(const CommonOpts& opts, int n_per_axis) {
  const fs::path ds_path = fs::path(opts.out_dir) / "dataset.bin";
  if (!fs::exists(ds_path))
    throw std::invalid_argument("missing dataset " + ds_path.string() +
                                "; run `maic gen-dataset` first");
  const GridDataset ds = load_dataset(ds_path);
  const TrainTestSplit split = split_dataset(ds.x_q, ds.x_ee, 0.2, opts.seed);
  const GpHyperparams hp = default_hyperparams(split.x_q_train, split.x_ee_train,
                                               n_per_axis);
  const GpModel model = fit(split.x_q_train, split.x_ee_train, hp);
  save_gp(fs::path(opts.out_dir) / "gp.bin", model, opts.seed);
  std::cout << "gp: fit on " << model.n_points() << " points, holdout "
            << split.x_q_test.rows() << " points\n";
  return 0;
}

int EvalGp(const CommonOpts& opts) {
  const TestbedConfig tb = load_testbed_config(opts.config_path);
  const GridDataset ds = load_dataset(fs::path(opts.out_dir) / "dataset.bin");
  const GpModel model = LoadGpOrDie(fs::path(opts.out_dir) / "gp.bin");
  const TrainTestSplit split = split_dataset(ds.x_q, ds.x_ee, 0.2, opts.seed);
  const HoldoutReport report = evaluate_holdout(model, split.x_q_test, split.x_ee_test);
  const WorkspaceBox box = DefaultWorkspace(tb);
  std::cout << "gp holdout: mean error " << FormatDouble(report.mean_error)
            << " m over " << report.per_point_errors.size() << " points ("
            << FormatDouble(100.0 * report.mean_error / box.diameter())
            << "% of workspace diameter)\n";
  return 0;
}

int TrainMvae(const CommonOpts& opts) {
  const TestbedConfig tb = load_testbed_config(opts.config_path);
  const fs::path ds_path = fs::path(opts.out_dir) / "dataset.bin";
  if (!fs::exists(ds_path))
    throw std::invalid_argument("missing dataset " + ds_path.string() +
                                "; run `maic gen-dataset` first");
  const GridDataset grid = load_dataset(ds_path);
  const TrainTestSplit split = split_dataset(grid.x_q, grid.x_ee, 0.2, opts.seed);

  MvaeDataset images = build_image_dataset(tb.arm, tb.camera, split.x_q_train, 3,
                                           0.02, Rng::DeriveSeed(opts.seed, 1));
  MvaeModel model;
  model.cfg.image_h = tb.camera.height;
  model.cfg.image_w = tb.camera.width;
  model.cfg.n_joints = tb.arm.n_joints;
  model.InitParams(Rng::DeriveSeed(opts.seed, 2));
  model.precision_mask = precision_mask(images.x_v, tb.camera.height, tb.camera.width);

  TrainConfig cfg;
  cfg.seed = Rng::DeriveSeed(opts.seed, 3);
  const TrainResult result = train(model, images, cfg);
  save_mvae(fs::path(opts.out_dir) / "mvae.bin", model, cfg, opts.seed);

  CsvWriter loss_csv(fs::path(opts.out_dir) / "mvae_loss.csv");
  loss_csv.Comment("root_seed=" + std::to_string(opts.seed));
  loss_csv.Header({"epoch", "loss"});
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e)
    loss_csv.Row({static_cast<double>(e), result.epoch_loss[e]});
  std::cout << "mvae: " << images.size() << " samples, final epoch loss "
            << FormatDouble(result.epoch_loss.back()) << "\n";
  return 0;
}

int EvalMvae(const CommonOpts& opts) {
  const TestbedConfig tb = load_testbed_config(opts.config_path);
  const GridDataset grid = load_dataset(fs::path(opts.out_dir) / "dataset.bin");
  const MvaeModel model = LoadMvaeOrDie(fs::path(opts.out_dir) / "mvae.bin");
  const TrainTestSplit split = split_dataset(grid.x_q, grid.x_ee, 0.2, opts.seed);

  CsvWriter csv(fs::path(opts.out_dir) / "mvae_eval.csv");
  csv.Comment("root_seed=" + std::to_string(opts.seed));
  csv.Header({"sample", "joint_roundtrip_inf_err", "image_frobenius_err"});
  double worst = 0.0;
  int within = 0;
  for (Eigen::Index i = 0; i < split.x_q_test.rows(); ++i) {
    const Vec q = split.x_q_test.row(i).transpose();
    const Image img = render(tb.arm, q, tb.camera);
    const Vec z = encode(model, img, q);
    const double q_err = (decode_q(model, z) - q).lpNorm<Eigen::Infinity>();
    const double v_err = (calibrated_decode_v(model, z) - img).norm();
    csv.Row({static_cast<double>(i), q_err, v_err});
    worst = std::max(worst, q_err);
    if (q_err < 0.05) ++within;
  }
  std::cout << "mvae holdout: " << within << "/" << split.x_q_test.rows()
            << " joint round-trips within 0.05 rad (worst "
            << FormatDouble(worst) << ")\n";
  return 0;
}

int RunOne(const CommonOpts& opts, const std::string& controller,
           const std::string& scenario, double per_goal, bool benchmark_mode) {
  const TestbedConfig tb = load_testbed_config(opts.config_path, benchmark_mode);
  fs::create_directories(opts.out_dir);

  GpModel gp;
  MvaeModel mvae;
  const GpModel* gp_ptr = nullptr;
  const MvaeModel* mvae_ptr = nullptr;
  if (controller.rfind("maic-gp", 0) == 0) {
    gp = LoadGpOrDie(fs::path(opts.out_dir) / "gp.bin");
    gp_ptr = &gp;
  }
  if (controller.rfind("maic-vae", 0) == 0) {
    mvae = LoadMvaeOrDie(fs::path(opts.out_dir) / "mvae.bin");
    mvae_ptr = &mvae;
  }

  ScenarioConfig cfg;
  cfg.controller_id = controller;
  cfg.scenario_id = scenario;
  cfg.per_goal_duration = per_goal;
  cfg.seed = opts.seed;
  cfg.benchmark_mode = benchmark_mode;
  cfg.trajectory_csv = fs::path(opts.out_dir) / (controller + "_" + scenario + "_traj.csv");
  cfg.diagnostics_csv = fs::path(opts.out_dir) / (controller + "_" + scenario + "_diag.csv");

  const RunResult run = run_scenario(tb, cfg, gp_ptr, mvae_ptr);
  emit_plot(fs::path(opts.out_dir) / (controller + "_" + scenario + ".svg"),
            {&run.metrics}, run.shaded_intervals, opts.seed);

  Json summary{{"controller", controller},
               {"scenario", scenario},
               {"root_seed", opts.seed},
               {"gains_hash", run.metrics.gains_hash},
               {"overshoot", run.metrics.overshoot},
               {"full", {{"rmse", run.metrics.full.rmse}, {"std", run.metrics.full.stddev}}},
               {"transient", {{"rmse", run.metrics.transient_phase.rmse},
                              {"std", run.metrics.transient_phase.stddev}}},
               {"steady", {{"rmse", run.metrics.steady.rmse},
                           {"std", run.metrics.steady.stddev}}}};
  std::ofstream((fs::path(opts.out_dir) / (controller + "_" + scenario + ".json")))
      << summary.dump(2) << "\n";
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int Bench(const CommonOpts& opts, bool check) {
  const TestbedConfig tb = load_testbed_config(opts.config_path, /*benchmark=*/true);
  fs::create_directories(opts.out_dir);
  const GpModel gp = LoadGpOrDie(fs::path(opts.out_dir) / "gp.bin");
  const MvaeModel mvae = LoadMvaeOrDie(fs::path(opts.out_dir) / "mvae.bin");

  const BenchTable table = bench_all(tb, opts.seed, &gp, &mvae, opts.out_dir);
  const Json table_json = bench_table_json(table);
  std::ofstream(fs::path(opts.out_dir) / "bench_table.json")
      << table_json.dump(2) << "\n";
  const std::string text = bench_table_text(table);
  std::ofstream(fs::path(opts.out_dir) / "bench_table.txt") << text;
  std::cout << text;

  if (table.any_failed) {
    std::cerr << "bench: one or more scenario runs FAILED\n";
    return 2;
  }
  if (check) {
    const CheckResult result = bench_check(table);
    if (!result.ok) {
      for (const std::string& v : result.violations)
        std::cerr << "check violation: " << v << "\n";
      return 3;
    }
    std::cout << "bench --check: all regression assertions hold\n";
  }
  return 0;
}

int Ablate(const CommonOpts& opts) {
  const TestbedConfig tb = load_testbed_config(opts.config_path, /*benchmark=*/true);
  fs::create_directories(opts.out_dir);
  const GpModel gp = LoadGpOrDie(fs::path(opts.out_dir) / "gp.bin");
  const MvaeModel mvae = LoadMvaeOrDie(fs::path(opts.out_dir) / "mvae.bin");
  const AblationReport report = ablate(tb, opts.seed, gp, mvae);

  Json j{{"root_seed", opts.seed},
         {"gp_ablation_bit_identical", report.gp_ablation_bit_identical},
         {"gp_rmse_full", report.full_gp.full.rmse},
         {"gp_rmse_ablated", report.ablated_gp.full.rmse},
         {"gp_rmse_rel_delta", report.gp_rmse_rel_delta},
         {"gp_shape_class_unchanged", report.gp_shape_class_unchanged},
         {"vae_rmse_full", report.full_vae.full.rmse},
         {"vae_rmse_ablated", report.ablated_vae.full.rmse},
         {"vae_rmse_rel_delta", report.vae_rmse_rel_delta},
         {"vae_shape_class_unchanged", report.vae_shape_class_unchanged}};
  std::ofstream(fs::path(opts.out_dir) / "ablation.json") << j.dump(2) << "\n";
  std::cout << j.dump(2) << "\n";
  emit_plot(fs::path(opts.out_dir) / "ablation.svg",
            {&report.full_gp, &report.ablated_gp, &report.full_vae,
             &report.ablated_vae},
            {}, opts.seed);
  return 0;
}

int Imagine(const CommonOpts& opts, double per_goal) {
  const TestbedConfig tb = load_testbed_config(opts.config_path);
  fs::create_directories(opts.out_dir);
  const MvaeModel mvae = LoadMvaeOrDie(fs::path(opts.out_dir) / "mvae.bin");

  std::vector<Goal> goals;
  for (const Vec& q_d : tb.goals_q) {
    Goal g;
    g.q_d = q_d;
    g.ee_d = forward_kinematics(tb.arm, q_d);
    g.v_d = render(tb.arm, q_d, tb.camera);
    goals.push_back(std::move(g));
  }
  LatentBelief z0{encode(mvae, render(tb.arm, tb.q_home, tb.camera), tb.q_home)};
  const int ticks = static_cast<int>(std::llround(per_goal / tb.gains.dt));
  const MentalSimResult sim =
      mental_simulate(mvae, z0, goals, tb.gains, tb.precisions, ticks);

  CsvWriter csv(fs::path(opts.out_dir) / "imagined.csv");
  csv.Comment("root_seed=" + std::to_string(opts.seed));
  csv.Header({"tick", "joint_error", "image_error"});
  for (std::size_t k = 0; k < sim.joint_error.size(); ++k)
    csv.Row({static_cast<double>(k), sim.joint_error[k], sim.image_error[k]});
  for (std::size_t g = 0; g < goals.size(); ++g) {
    const std::size_t lo = g * static_cast<std::size_t>(ticks);
    const double initial = sim.joint_error[lo];
    std::size_t reached = 0;
    for (std::size_t k = lo; k < lo + static_cast<std::size_t>(ticks); ++k)
      if (sim.joint_error[k] <= 0.1 * initial) {
        reached = k - lo;
        break;
      }
    std::cout << "goal " << g + 1 << ": imagined error 10% crossing at tick "
              << reached << "\n";
  }
  return 0;
}

int Plot(const CommonOpts& opts, const std::vector<std::string>& csvs,
         const std::string& out_name) {
  std::vector<MetricsRecord> records;
  for (const std::string& file : csvs) {
    std::ifstream in(file);
    if (!in) throw std::invalid_argument("cannot open " + file);
    MetricsRecord rec;
    rec.controller = fs::path(file).stem().string();
    std::string line;
    std::vector<std::vector<double>> goal_cols;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (line.rfind("t,", 0) == 0) continue;  // header
      std::stringstream ss(line);
      std::vector<double> vals;
      std::string cell;
      while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
      if (vals.size() < 3) continue;
      rec.t.push_back(vals[0]);
      // diagnostics rows: t, goal_err..., belief_err..., vfe, image, ee
      const std::size_t n = (vals.size() - 4) / 2;
      goal_cols.emplace_back(vals.begin() + 1, vals.begin() + 1 + n);
    }
    if (!goal_cols.empty()) {
      rec.goal_error.resize(static_cast<Eigen::Index>(goal_cols[0].size()),
                            static_cast<Eigen::Index>(goal_cols.size()));
      for (std::size_t k = 0; k < goal_cols.size(); ++k)
        for (std::size_t j = 0; j < goal_cols[k].size(); ++j)
          rec.goal_error(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
              goal_cols[k][j];
    }
    records.push_back(std::move(rec));
  }
  fs::create_directories(opts.out_dir);
  std::vector<const MetricsRecord*> ptrs;
  for (const auto& r : records) ptrs.push_back(&r);
  emit_plot(fs::path(opts.out_dir) / out_name, ptrs, {}, opts.seed);
  std::cout << "wrote " << (fs::path(opts.out_dir) / out_name).string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"maic: multisensory active-inference control testbed"};
  app.require_subcommand(1);

  CommonOpts opts;
  int n_per_axis = 21;
  std::string controller = "maic-gp";
  std::string scenario = "vanilla";
  double per_goal = 20.0;
  bool demo_mode = false;
  bool check = false;
  std::vector<std::string> plot_inputs;
  std::string plot_out = "plot.svg";

  auto* gen = app.add_subcommand("gen-dataset", "generate the grid dataset");
  AddCommon(gen, &opts);
  gen->add_option("--n-per-axis", n_per_axis, "grid resolution per axis");

  auto* tgp = app.add_subcommand("train-gp", "fit the GP mapping");
  AddCommon(tgp, &opts);
  tgp->add_option("--n-per-axis", n_per_axis, "grid resolution used for length-scales");

  auto* egp = app.add_subcommand("eval-gp", "hold-out evaluation of the GP");
  AddCommon(egp, &opts);

  auto* tmv = app.add_subcommand("train-mvae", "train the multimodal autoencoder");
  AddCommon(tmv, &opts);

  auto* emv = app.add_subcommand("eval-mvae", "hold-out evaluation of the MVAE");
  AddCommon(emv, &opts);

  auto* run = app.add_subcommand("run", "run one controller on one scenario");
  AddCommon(run, &opts);
  run->add_option("--controller", controller,
                  "aic | maic-gp | maic-gp-ablated | maic-vae | maic-vae-ablated | ic | mpc");
  run->add_option("--scenario", scenario, "vanilla | inertial | constraint | human | noisy");
  run->add_option("--per-goal", per_goal, "seconds per goal");
  run->add_flag("--demo", demo_mode, "allow < 20 s per goal (skips phase-split guarantees)");

  auto* bench = app.add_subcommand("bench", "full controllers x scenarios benchmark");
  AddCommon(bench, &opts);
  bench->add_flag("--check", check, "assert the expected orderings (exit 3 on regression)");

  auto* abl = app.add_subcommand("ablate", "ablation study on the vanilla scenario");
  AddCommon(abl, &opts);

  auto* img = app.add_subcommand("imagine", "sensor-free mental simulation");
  AddCommon(img, &opts);
  img->add_option("--per-goal", per_goal, "seconds per goal");

  auto* plt = app.add_subcommand("plot", "render diagnostics CSVs to SVG");
  AddCommon(plt, &opts);
  plt->add_option("inputs", plot_inputs, "diagnostics CSV files")->required();
  plt->add_option("--name", plot_out, "output SVG file name");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return GenDataset(opts, n_per_axis);
    if (tgp->parsed()) return TrainGp(opts, n_per_axis);
    if (egp->parsed()) return EvalGp(opts);
    if (tmv->parsed()) return TrainMvae(opts);
    if (emv->parsed()) return EvalMvae(opts);
    if (run->parsed())
      return RunOne(opts, controller, scenario, per_goal, !demo_mode);
    if (bench->parsed()) return Bench(opts, check);
    if (abl->parsed()) return Ablate(opts);
    if (img->parsed()) return Imagine(opts, per_goal);
    if (plt->parsed()) return Plot(opts, plot_inputs, plot_out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime fault: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
