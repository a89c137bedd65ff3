// Experiment command line: train / eval / plot / sweep.

#include <CLI11.hpp>
#include <atomic>
#include <cstdio>
#include <iostream>
#include <thread>

#include "love/agent/trainer.hpp"
#include "love/env/registry.hpp"
#include "love/harness/curves.hpp"
#include "love/harness/heatmap.hpp"
#include "love/harness/npy.hpp"
#include "love/harness/occupancy.hpp"
#include "love/harness/run_dir.hpp"
#include "love/harness/strip.hpp"
#include "love/harness/tomlish.hpp"

namespace {

struct CommonOverrides {
  std::string config_path;
  long seed = -1;
  std::string mode, env, out;
  long episodes = -1;
};

love::RunConfig load_with_overrides(const CommonOverrides& o) {
  love::RunConfig cfg = o.config_path.empty() ? love::RunConfig{}
                                              : love::RunConfig::load(o.config_path);
  if (o.seed >= 0) cfg.seed = std::uint64_t(o.seed);
  if (!o.mode.empty()) cfg.mode = love::parse_mode(o.mode);
  if (!o.env.empty()) cfg.env_name = o.env;
  if (o.episodes >= 0) cfg.episodes = int(o.episodes);
  if (!o.out.empty()) cfg.out_dir = o.out;
  cfg.apply_mode();
  cfg.validate();
  return cfg;
}

love::RunConfig config_of_run(const std::string& run_dir) {
  return love::RunConfig::load(run_dir + "/config.toml");
}

love::env::ArenaGeometry geometry_of(const love::RunConfig& cfg) {
  love::env::EnvOptions opts;
  opts.params = cfg.env_params;
  opts.walls_file = cfg.walls_file;
  auto params = love::env::PointmassParams{};
  auto it = cfg.env_params.find("radius");
  if (it != cfg.env_params.end()) params.radius = it->second;
  if (cfg.env_name.rfind("bugtrap", 0) == 0) return love::env::bugtrap_geometry(params);
  if (cfg.env_name.rfind("maze", 0) == 0) return love::env::maze_geometry(params);
  if (cfg.env_name.rfind("pointmass_file", 0) == 0)
    return love::env::geometry_from_file(cfg.walls_file);
  throw std::invalid_argument("run is not a pointmass environment: " + cfg.env_name);
}

std::vector<Eigen::MatrixXd> load_position_logs(const std::string& run_dir) {
  std::vector<Eigen::MatrixXd> logs;
  for (const auto& name : love::list_dir(run_dir + "/episodes")) {
    const std::string f = run_dir + "/episodes/" + name + "/true_state.npy";
    if (love::file_exists(f)) logs.push_back(love::load_npy(f));
  }
  if (logs.empty()) throw std::runtime_error("no episode logs under " + run_dir);
  return logs;
}

int cmd_train(const CommonOverrides& o) {
  auto cfg = load_with_overrides(o);
  love::run_experiment(cfg);
  std::printf("run complete: %s\n", cfg.out_dir.c_str());
  return 0;
}

int cmd_eval(const std::string& run_dir, int episodes, const std::string& checkpoint) {
  auto cfg = config_of_run(run_dir);
  love::Trainer trainer(cfg);
  const std::string ckpt =
      checkpoint.empty() ? run_dir + "/checkpoints/latest.ckpt" : checkpoint;
  trainer.load_from(ckpt);
  const auto returns = trainer.evaluate(episodes);
  double mean = 0;
  for (double r : returns) mean += r;
  mean /= double(returns.size());
  for (std::size_t i = 0; i < returns.size(); ++i)
    std::printf("episode %zu return %.6g\n", i, returns[i]);
  std::printf("mean return over %d episodes: %.6g\n", episodes, mean);
  return 0;
}

int cmd_plot_occupancy(const std::string& run_dir, const std::string& out, int grid) {
  auto cfg = config_of_run(run_dir);
  auto geometry = geometry_of(cfg);
  double radius = love::env::PointmassParams{}.radius;
  auto it = cfg.env_params.find("radius");
  if (it != cfg.env_params.end()) radius = it->second;

  auto occ = love::occupancy(load_position_logs(run_dir), geometry, radius, grid);
  const std::string img_path =
      out.empty() ? run_dir + "/plots/occupancy.ppm" : out;
  love::ensure_dir(run_dir + "/plots");
  love::occupancy_image(occ, geometry).save_ppm(img_path);

  char buf[160];
  std::snprintf(buf, sizeof(buf), "coverage,%.9g\nescaped,%d\ntotal_steps,%ld\n",
                occ.coverage, occ.escaped ? 1 : 0, occ.grid.total_steps);
  love::write_text_file(run_dir + "/plots/occupancy.csv", buf);
  std::printf("occupancy: coverage=%.4f escaped=%d image=%s\n", occ.coverage,
              occ.escaped ? 1 : 0, img_path.c_str());
  return 0;
}

int cmd_plot_heatmap(const std::string& run_dir, const std::string& out, int grid) {
  auto cfg = config_of_run(run_dir);
  if (cfg.env_name.rfind("pendulum", 0) != 0)
    throw std::invalid_argument("heatmap requires a pendulum run");
  love::Trainer trainer(cfg);
  trainer.load_from(run_dir + "/checkpoints/latest.ckpt");

  love::env::PendulumParams params;
  auto spec = trainer.environment().observation_spec();
  auto map = love::value_heatmap(trainer.ensemble(), params, spec, grid, grid);

  love::ensure_dir(run_dir + "/plots");
  const std::string img_path = out.empty() ? run_dir + "/plots/value_heatmap.ppm" : out;
  love::heatmap_image(map).save_ppm(img_path);
  love::save_npy(run_dir + "/plots/value_mean.npy", map.mean_values);
  love::save_npy(run_dir + "/plots/value_std.npy", map.std_values);
  std::printf("heatmap: mean in [%.4g, %.4g], std in [%.4g, %.4g], image=%s\n",
              map.mean_values.minCoeff(), map.mean_values.maxCoeff(),
              map.std_values.minCoeff(), map.std_values.maxCoeff(), img_path.c_str());
  return 0;
}

int cmd_plot_strip(const std::string& run_dir, int episode, int t0,
                   const std::string& out) {
  auto cfg = config_of_run(run_dir);
  love::Trainer trainer(cfg);
  trainer.load_from(run_dir + "/checkpoints/latest.ckpt");

  char name[32];
  std::snprintf(name, sizeof(name), "ep_%05d", episode);
  const std::string dir = run_dir + "/episodes/" + name;
  love::EpisodeRecord ep;
  ep.obs = love::load_npy(dir + "/obs.npy").cast<float>();
  ep.actions = love::load_npy(dir + "/actions.npy").cast<float>();
  ep.rewards = love::load_npy(dir + "/rewards.npy").cast<float>().col(0);
  auto strip = love::prediction_strip(trainer.ensemble(), ep, t0);

  love::ensure_dir(run_dir + "/plots");
  const std::string img_path = out.empty() ? run_dir + "/plots/strip.ppm" : out;
  strip.grid.save_ppm(img_path);
  std::printf("strip: mean inter-particle pixel std %.6g, image=%s\n",
              strip.mean_pixel_std, img_path.c_str());
  return 0;
}

int cmd_plot_curves(const std::vector<std::string>& runs, const std::string& out,
                    int smooth) {
  std::vector<std::string> files;
  for (const auto& r : runs) files.push_back(r + "/metrics.csv");
  auto summary = love::learning_curve(files, smooth);
  const std::string img_path = out.empty() ? "curves.ppm" : out;
  love::curve_image(summary).save_ppm(img_path);
  const std::string csv_path = img_path.substr(0, img_path.find_last_of('.')) + ".csv";
  love::write_text_file(csv_path, love::curve_csv(summary));
  std::printf("curves: %d seeds, final %.6g +- %.6g, image=%s\n", summary.seeds,
              summary.final_mean, summary.final_std, img_path.c_str());
  return 0;
}

struct GridAxis {
  std::string section, key;
  std::vector<std::string> values;
};

GridAxis parse_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("grid axis must look like section.key=v1,v2");
  std::string path = text.substr(0, eq);
  GridAxis axis;
  const auto dot = path.find('.');
  if (dot == std::string::npos) {
    axis.section = "agent";  // unqualified keys default to the [agent] section
    axis.key = path;
  } else {
    axis.section = path.substr(0, dot);
    axis.key = path.substr(dot + 1);
  }
  std::stringstream vs(text.substr(eq + 1));
  std::string v;
  while (std::getline(vs, v, ',')) axis.values.push_back(v);
  if (axis.values.empty()) throw std::invalid_argument("grid axis has no values");
  return axis;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& grid_specs,
              int jobs, const std::string& out_base) {
  love::KvFile base = love::KvFile::load(config_path);
  std::vector<GridAxis> axes;
  for (const auto& s : grid_specs) axes.push_back(parse_axis(s));

  // Cross product of all axis values.
  std::vector<love::RunConfig> configs;
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    love::KvFile kv = base;
    std::string tag;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      kv.set_string(axes[a].section, axes[a].key, axes[a].values[idx[a]]);
      if (!tag.empty()) tag += "_";
      tag += axes[a].key + "=" + axes[a].values[idx[a]];
    }
    auto cfg = love::RunConfig::from_kv(kv);
    const std::string root = out_base.empty() ? cfg.out_dir : out_base;
    cfg.out_dir = tag.empty() ? root : root + "/" + tag;
    configs.push_back(cfg);

    std::size_t a = 0;
    for (; a < axes.size(); ++a) {
      if (++idx[a] < axes[a].values.size()) break;
      idx[a] = 0;
    }
    if (a == axes.size()) break;
    if (axes.empty()) break;
  }

  std::printf("sweep: %zu runs, %d workers\n", configs.size(), jobs);
  std::atomic<std::size_t> next{0};
  std::atomic<int> failures{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= configs.size()) return;
      try {
        love::run_experiment(configs[i]);
        std::printf("done: %s\n", configs[i].out_dir.c_str());
      } catch (const std::exception& e) {
        std::fprintf(stderr, "run failed (%s): %s\n", configs[i].out_dir.c_str(),
                     e.what());
        failures.fetch_add(1);
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return failures.load() == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent-ensemble exploration experiments"};
  app.require_subcommand(1);

  CommonOverrides common;

  auto* train = app.add_subcommand("train", "Run one training experiment");
  train->add_option("--config", common.config_path, "Config file (.toml)");
  train->add_option("--seed", common.seed, "Override run.seed");
  train->add_option("--mode", common.mode, "Override run.mode (love/lve/dreamer/dreamer_curious)");
  train->add_option("--env", common.env, "Override run.env");
  train->add_option("--episodes", common.episodes, "Override run.episodes");
  train->add_option("--out", common.out, "Override run.out_dir");

  auto* eval = app.add_subcommand("eval", "Deterministic evaluation-policy rollouts");
  std::string eval_run, eval_ckpt;
  int eval_episodes = 5;
  eval->add_option("--run", eval_run, "Run directory")->required();
  eval->add_option("--episodes", eval_episodes, "Number of episodes");
  eval->add_option("--checkpoint", eval_ckpt, "Checkpoint path (default: latest)");

  auto* plot = app.add_subcommand("plot", "Render artifacts from run logs");
  plot->require_subcommand(1);

  std::string occ_run, occ_out;
  int occ_grid = 32;
  auto* occ = plot->add_subcommand("occupancy", "Occupancy map + coverage");
  occ->add_option("--run", occ_run, "Run directory")->required();
  occ->add_option("--out", occ_out, "Output image (.ppm)");
  occ->add_option("--grid", occ_grid, "Grid resolution");

  std::string heat_run, heat_out;
  int heat_grid = 64;
  auto* heat = plot->add_subcommand("heatmap", "Value ensemble mean/std over states");
  heat->add_option("--run", heat_run, "Run directory")->required();
  heat->add_option("--out", heat_out, "Output image (.ppm)");
  heat->add_option("--grid", heat_grid, "Grid resolution");

  std::string strip_run, strip_out;
  int strip_episode = 0, strip_t0 = 0;
  auto* strip = plot->add_subcommand("strip", "Open-loop prediction strip");
  strip->add_option("--run", strip_run, "Run directory")->required();
  strip->add_option("--episode", strip_episode, "Episode index");
  strip->add_option("--t0", strip_t0, "Window start row");
  strip->add_option("--out", strip_out, "Output image (.ppm)");

  std::vector<std::string> curve_runs;
  std::string curve_out;
  int curve_smooth = 1;
  auto* curves = plot->add_subcommand("curves", "Learning curves across seeds");
  curves->add_option("--runs", curve_runs, "Run directories")->required()->delimiter(',');
  curves->add_option("--out", curve_out, "Output image (.ppm)");
  curves->add_option("--smooth", curve_smooth, "Moving-average window");

  auto* sweep = app.add_subcommand("sweep", "Expand a config grid and run all combos");
  std::string sweep_config, sweep_out;
  std::vector<std::string> sweep_grid;
  int sweep_jobs = int(std::thread::hardware_concurrency());
  sweep->add_option("--config", sweep_config, "Base config file")->required();
  sweep->add_option("--grid", sweep_grid,
                    "Axis like agent.particles=2,5,10 (repeatable)");
  sweep->add_option("--jobs", sweep_jobs, "Concurrent runs");
  sweep->add_option("--out", sweep_out, "Base output directory");

  auto* envs = app.add_subcommand("envs", "List registered environments");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(common);
    if (*eval) return cmd_eval(eval_run, eval_episodes, eval_ckpt);
    if (*occ) return cmd_plot_occupancy(occ_run, occ_out, occ_grid);
    if (*heat) return cmd_plot_heatmap(heat_run, heat_out, heat_grid);
    if (*strip) return cmd_plot_strip(strip_run, strip_episode, strip_t0, strip_out);
    if (*curves) return cmd_plot_curves(curve_runs, curve_out, curve_smooth);
    if (*sweep) return cmd_sweep(sweep_config, sweep_grid, std::max(1, sweep_jobs), sweep_out);
    if (*envs) {
      for (const auto& name : love::env::registered_envs()) std::printf("%s\n", name.c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
