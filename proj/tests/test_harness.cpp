#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>

#include "love/agent/config.hpp"
#include "love/agent/trainer.hpp"
#include "love/harness/curves.hpp"
#include "love/harness/heatmap.hpp"
#include "love/harness/npy.hpp"
#include "love/harness/occupancy.hpp"
#include "love/harness/run_dir.hpp"
#include "love/harness/strip.hpp"
#include "love/harness/tomlish.hpp"
#include "test_helpers.hpp"

using love::KvFile;
using love::RunConfig;

TEST_CASE("tomlish: parse, typed access, serialize round trip") {
  const std::string text =
      "# comment\n[run]\nmode = \"love\"\nseed = 3\n\n[optim]\nmodel_lr = 6e-4\n"
      "flag = true\n";
  auto kv = KvFile::parse(text);
  CHECK(kv.get_string("run", "mode", "") == "love");
  CHECK(kv.get_long("run", "seed", 0) == 3);
  CHECK(kv.get_double("optim", "model_lr", 0) == doctest::Approx(6e-4));
  CHECK(kv.get_bool("optim", "flag", false));
  CHECK(kv.get_long("run", "missing", 9) == 9);

  auto again = KvFile::parse(kv.serialize());
  CHECK(again.get_string("run", "mode", "") == "love");
  CHECK(again.serialize() == kv.serialize());

  CHECK_THROWS(KvFile::parse("[run\nbad"));
  CHECK_THROWS(KvFile::parse("[run]\nnovalue\n"));
}

TEST_CASE("config: defaults echoed, unknown keys rejected, env overrides applied") {
  RunConfig def;
  auto kv = def.to_kv();
  for (const char* key : {"particles", "horizon", "seq_len", "batch_size",
                          "episode_steps", "train_steps", "action_repeat",
                          "discount", "lambda", "beta_initial", "beta_delta"})
    CHECK(kv.has("agent", key));

  KvFile bad = kv;
  bad.set_double("agent", "particels", 3);  // typo must be fatal
  CHECK_THROWS(RunConfig::from_kv(bad));

  setenv("LOVE_RUN_SEED", "1234", 1);
  auto cfg = RunConfig::from_kv(def.to_kv());
  unsetenv("LOVE_RUN_SEED");
  CHECK(cfg.seed == 1234);

  // Mode constraints.
  KvFile d = def.to_kv();
  d.set_string("run", "mode", "dreamer");
  auto dreamer = RunConfig::from_kv(d);
  CHECK(dreamer.particles == 1);
  CHECK(dreamer.beta_delta == 0.0);

  KvFile hash_check = def.to_kv();
  CHECK(RunConfig::from_kv(hash_check).hash() == def.hash());
}

TEST_CASE("npy: float and double round trips") {
  Eigen::MatrixXd d(3, 4);
  for (int i = 0; i < d.size(); ++i) d(i) = 0.37 * i - 1.0;
  love::save_npy("test_roundtrip_f8.npy", d);
  auto back = love::load_npy("test_roundtrip_f8.npy");
  CHECK((back - d).cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXf f = d.cast<float>();
  love::save_npy("test_roundtrip_f4.npy", f);
  auto back_f = love::load_npy("test_roundtrip_f4.npy");
  CHECK((back_f.cast<float>() - f).cwiseAbs().maxCoeff() == 0.0f);
  std::remove("test_roundtrip_f8.npy");
  std::remove("test_roundtrip_f4.npy");
}

TEST_CASE("occupancy: stationary agent fills exactly one cell") {
  love::env::PointmassParams p;
  auto g = love::env::bugtrap_geometry(p);
  Eigen::MatrixXd log = Eigen::MatrixXd::Zero(50, 2);
  log.col(0).setConstant(4.75);
  log.col(1).setConstant(5.0);
  auto occ = love::occupancy({log}, g, p.radius, 32);
  CHECK((occ.grid.counts.array() > 0).count() == 1);
  CHECK(occ.grid.total_steps == 50);
  CHECK_FALSE(occ.escaped);
  CHECK(occ.coverage > 0.0);
  CHECK(occ.coverage <= 1.0);
}

TEST_CASE("occupancy: straight-line escape raises the flag") {
  love::env::PointmassParams p;
  auto g = love::env::bugtrap_geometry(p);
  Eigen::MatrixXd log(100, 2);
  for (int i = 0; i < 100; ++i) {
    log(i, 0) = 4.75 + (9.5 - 4.75) * i / 99.0;
    log(i, 1) = 5.0;
  }
  auto occ = love::occupancy({log}, g, p.radius, 32);
  CHECK(occ.escaped);
}

TEST_CASE("occupancy: counts always sum to the number of logged positions") {
  love::env::PointmassParams p;
  auto g = love::env::maze_geometry(p);
  love::Rng rng(100);
  for (int it = 0; it < 100; ++it) {
    std::vector<Eigen::MatrixXd> logs;
    long total = 0;
    const int n_logs = 1 + int(rng.uniform_int(3));
    for (int l = 0; l < n_logs; ++l) {
      const int rows = 1 + int(rng.uniform_int(40));
      Eigen::MatrixXd log(rows, 2);
      for (int r = 0; r < rows; ++r) {
        log(r, 0) = rng.uniform(0, g.size);
        log(r, 1) = rng.uniform(0, g.size);
      }
      logs.push_back(log);
      total += rows;
    }
    auto occ = love::occupancy(logs, g, p.radius, 24);
    CHECK(occ.grid.total_steps == total);
    CHECK(occ.grid.counts.sum() == total);
  }
}

TEST_CASE("value_heatmap: clones have zero spread, fresh ensembles stay small") {
  auto cfg = test_helpers::tiny_vector_config(3, 1);
  love::Ensemble<float> ens(cfg, 2, love::Rng(200));
  love::env::PendulumParams params;
  auto spec = love::ObservationSpec::vector_obs(3);

  test_helpers::clone_particle(ens, 0, 1);
  auto map = love::value_heatmap(ens, params, spec, 12, 10);
  CHECK(map.mean_values.rows() == 10);
  CHECK(map.mean_values.cols() == 12);
  CHECK(map.std_values.minCoeff() >= 0.0);
  CHECK(map.std_values.maxCoeff() < 1e-6);

  love::Ensemble<float> fresh(cfg, 3, love::Rng(201));
  auto map2 = love::value_heatmap(fresh, params, spec, 12, 10);
  CHECK(map2.mean_values.cwiseAbs().maxCoeff() < 1.0);

  auto img = love::heatmap_image(map2);
  CHECK(img.width() > 0);
}

TEST_CASE("prediction_strip: layout, ground truth row, vector mode rejected") {
  auto cfg = test_helpers::tiny_image_config(1);
  love::Ensemble<float> ens(cfg, 2, love::Rng(202));
  love::Rng rng(203);

  const int rows = 25;
  love::EpisodeRecord ep;
  ep.obs.resize(rows, cfg.obs.flat_dim());
  for (Eigen::Index i = 0; i < ep.obs.size(); ++i) ep.obs(i) = float(rng.uniform());
  ep.actions = Eigen::MatrixXf::Zero(rows, 1);
  ep.rewards = Eigen::VectorXf::Zero(rows);
  ep.true_state = Eigen::MatrixXd::Zero(rows, 1);

  auto strip = love::prediction_strip(ens, ep, 0, 5, 15);
  const int res = cfg.obs.height;
  CHECK(strip.grid.height() == (2 + 1) * (res + 1));
  CHECK(strip.grid.width() == 15 * (res + 1));
  REQUIRE(strip.truth.size() == 15);
  for (int k = 0; k < 15; ++k)
    CHECK((strip.truth[std::size_t(k)].transpose() - ep.obs.row(5 + k)).cwiseAbs().maxCoeff() ==
          0.0f);
  CHECK(strip.mean_pixel_std >= 0.0);

  auto vec_cfg = test_helpers::tiny_vector_config();
  love::Ensemble<float> vec_ens(vec_cfg, 2, love::Rng(204));
  CHECK_THROWS_AS(love::prediction_strip(vec_ens, ep, 0), std::invalid_argument);
}

TEST_CASE("learning_curve: single seed, exact two-seed stats, recompute oracle") {
  namespace fs = std::filesystem;
  fs::create_directories("build_test_runs/curves");
  auto write_metrics = [&](const std::string& path, const std::vector<double>& returns) {
    std::string text = "# love-metrics v1\nepisode,env_steps,episode_return\n";
    for (std::size_t i = 0; i < returns.size(); ++i)
      text += std::to_string(i) + ",100," + std::to_string(returns[i]) + "\n";
    love::write_text_file(path, text);
  };
  write_metrics("build_test_runs/curves/a.csv", {1, 1, 1, 1});
  write_metrics("build_test_runs/curves/b.csv", {3, 3, 3, 3});

  auto single = love::learning_curve({"build_test_runs/curves/a.csv"}, 1, 2);
  CHECK(single.final_std == doctest::Approx(0.0));
  CHECK(single.final_mean == doctest::Approx(1.0));

  auto both = love::learning_curve(
      {"build_test_runs/curves/a.csv", "build_test_runs/curves/b.csv"}, 1, 2);
  CHECK(both.final_mean == doctest::Approx(2.0));
  CHECK(both.final_std == doctest::Approx(1.0));
  for (double m : both.mean_curve) CHECK(m == doctest::Approx(2.0));

  // Independent recomputation straight from the raw files.
  auto ta = love::read_metrics_csv("build_test_runs/curves/a.csv");
  auto tb = love::read_metrics_csv("build_test_runs/curves/b.csv");
  auto ra = ta.series("episode_return");
  auto rb = tb.series("episode_return");
  double fa = (ra[ra.size() - 1] + ra[ra.size() - 2]) / 2.0;
  double fb = (rb[rb.size() - 1] + rb[rb.size() - 2]) / 2.0;
  const double mean = (fa + fb) / 2.0;
  const double var = ((fa - mean) * (fa - mean) + (fb - mean) * (fb - mean)) / 2.0;
  CHECK(both.final_mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(both.final_std == doctest::Approx(std::sqrt(var)).epsilon(1e-12));

  // Purity: identical inputs give byte-identical CSV output.
  CHECK(love::curve_csv(both) == love::curve_csv(both));
  auto img = love::curve_image(both);
  CHECK(img.width() == 480);
}

TEST_CASE("images: ppm output is deterministic") {
  love::Image img(16, 12, 0.2f, 0.3f, 0.4f);
  img.line(0, 0, 15, 11, 1, 0, 0);
  img.fill_rect(2, 2, 6, 6, 0, 1, 0);
  img.save_ppm("test_img_a.ppm");
  img.save_ppm("test_img_b.ppm");
  CHECK(love::read_text_file("test_img_a.ppm") == love::read_text_file("test_img_b.ppm"));
  std::remove("test_img_a.ppm");
  std::remove("test_img_b.ppm");
}

TEST_CASE("run_dir helpers") {
  love::ensure_dir("build_test_runs/dirs/nested");
  CHECK(love::file_exists("build_test_runs/dirs/nested"));
  love::write_text_file("build_test_runs/dirs/nested/x.txt", "hello");
  CHECK(love::read_text_file("build_test_runs/dirs/nested/x.txt") == "hello");
  auto names = love::list_dir("build_test_runs/dirs");
  REQUIRE(names.size() == 1);
  CHECK(names[0] == "nested");
  CHECK(love::list_dir("no/such/dir").empty());
}
