#pragma once

#include <memory>
#include <string>
#include <vector>

#include "love/agent/checkpoint.hpp"
#include "love/agent/config.hpp"
#include "love/agent/replay_buffer.hpp"
#include "love/env/env.hpp"
#include "love/policy.hpp"
#include "love/returns.hpp"
#include "love/wm/world_model.hpp"

// The training loop: alternate an online phase (episode collection with the
// acquisition policy) with an offline phase (per-particle representation and
// value updates on independently shuffled batches, then the two-policy
// update on a shared batch).

namespace love {

using Real = float;

struct ParticleLossRecord {
  double model_total = 0, reconstruction = 0, reward = 0, kl = 0, value = 0;
};

struct PolicyLossRecord {
  double actor_aq = 0, actor_ev = 0;
  double imagined_mean = 0, imagined_std = 0;
};

struct EpisodeMetrics {
  int episode = 0;
  long env_steps = 0;
  double beta = 0;
  std::vector<ParticleLossRecord> particles;
  PolicyLossRecord policy;
  double episode_return = 0;
};

class Trainer {
 public:
  explicit Trainer(RunConfig config);

  // Full experiment: episodes, metrics.csv, episode logs, checkpoints.
  void run();

  // Algorithm pieces, exposed for tests and tools.
  EpisodeRecord collect_episode(bool random_actions);
  ParticleLossRecord train_particle(int i);
  PolicyLossRecord train_policies(double beta);
  double current_beta(int episode) const;
  std::vector<double> evaluate(int episodes);

  Ensemble<Real>& ensemble() { return ensemble_; }
  const Ensemble<Real>& ensemble() const { return ensemble_; }
  ActionModel<Real>& acquisition() { return aq_.net; }
  ActionModel<Real>& evaluation() { return ev_.net; }
  ReplayBuffer& buffer() { return buffer_; }
  const RunConfig& config() const { return cfg_; }
  env::Env& environment() { return *env_; }

  nn::ParamList<Real> checkpoint_params();
  void save_to(const std::string& path, long episode);
  CheckpointMeta load_from(const std::string& path);

  static std::string metrics_header(int particles);
  static std::string metrics_row(const EpisodeMetrics& m);

 private:
  struct OnlineState;
  Eigen::VectorXd act_online(const LatentState<Real>& state, bool random_actions);
  std::vector<LatentState<Real>> filter_batch(int particle, const SequenceBatch<Real>& batch,
                                              Rng& rng);
  LatentState<Real> gather_starts(const std::vector<LatentState<Real>>& posts);

  RunConfig cfg_;
  BetaSchedule<double> schedule_;
  std::unique_ptr<env::Env> env_;
  ObservationSpec obs_spec_;
  Ensemble<Real> ensemble_;
  Policy<Real> aq_, ev_;
  std::vector<nn::Adam<Real>> model_opts_, value_opts_;
  nn::Adam<Real> aq_opt_, ev_opt_;
  ReplayBuffer buffer_;
  std::vector<Rng> particle_streams_;
  Rng policy_stream_, action_stream_, rollout_stream_, misc_stream_;
  int online_particle_ = 0;
};

// Convenience used by the CLI: run one experiment from a config.
void run_experiment(const RunConfig& config);

}  // namespace love
