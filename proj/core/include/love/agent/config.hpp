#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "love/harness/tomlish.hpp"

namespace love {

enum class AgentMode { love, lve, dreamer, dreamer_curious };

AgentMode parse_mode(const std::string& name);
std::string mode_name(AgentMode mode);

// Every hyperparameter, schedule, baseline switch and environment choice of
// one experiment. Loading applies mode constraints: lve forces beta == 0,
// dreamer forces a single particle and beta == 0, dreamer_curious forces
// beta == 0 and enables the disagreement bonus.
struct RunConfig {
  // [run]
  AgentMode mode = AgentMode::love;
  std::uint64_t seed = 0;
  int episodes = 100;
  std::string env_name = "bugtrap";
  int image_size = 64;
  std::string walls_file;
  std::string out_dir = "runs/run";

  // [agent]
  int particles = 5;         // M
  int horizon = 15;          // H
  int seq_len = 50;          // L
  int batch_size = 50;       // B
  int episode_steps = 1000;  // T, raw environment interactions per episode
  int train_steps = 200;     // S, offline updates per episode
  int action_repeat = 2;
  int seed_episodes = 5;
  int buffer_capacity = 1000;  // episodes
  double discount = 0.99;
  double lambda = 0.95;
  double beta_initial = 0.0;
  double beta_delta = 1e-3;
  double beta_factor = 1.01;
  std::string beta_mode = "linear";  // or "multiplicative"
  double interleave_prob = 0.0;      // probability of an evaluation-policy action
  double curiosity_weight = 1.0;     // active only in dreamer_curious mode
  int imagination_starts = 0;        // 0 = every posterior state of the batch
  std::string online_filter = "fixed0";  // or "random": particle per episode
  int checkpoint_every = 10;

  // [model]
  int deter_dim = 200;
  int stoch_dim = 30;
  int units = 400;
  int reward_layers = 2;
  int value_layers = 3;
  int policy_layers = 4;
  int vector_enc_layers = 2;
  int vector_enc_units = 256;
  int channel_base = 32;
  double free_nats = 3.0;
  double kl_scale = 1.0;
  double std_floor = 1e-4;
  double policy_mean_scale = 5.0;
  double policy_init_std = 5.0;
  double policy_min_std = 1e-4;
  std::string kernel_init = "glorot_uniform";  // or "variance_scaling"
  std::string bias_init = "zeros";             // or "variance_scaling"
  double vs_scale = 0.333;

  // [optim]
  double model_lr = 6e-4;
  double value_lr = 8e-5;
  double policy_lr = 2e-4;
  double grad_clip = 100.0;

  // [env] physics overrides, passed to the registry.
  std::map<std::string, double> env_params;

  // Fills fields from the file, then applies LOVE_<SECTION>_<KEY>
  // environment-variable overrides, then mode constraints. Unknown keys are
  // an error.
  static RunConfig load(const std::string& path);
  static RunConfig from_kv(KvFile kv);

  // Complete snapshot with every field explicit (defaults echoed).
  KvFile to_kv() const;

  void apply_mode();
  void validate() const;

  // FNV-1a over the canonical serialization.
  std::uint64_t hash() const;

  int stored_steps_per_episode() const { return episode_steps / action_repeat; }
  bool pixels() const;
};

}  // namespace love
