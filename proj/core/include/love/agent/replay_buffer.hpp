#pragma once

#include <Eigen/Dense>
#include <deque>
#include <vector>

#include "love/rng.hpp"
#include "love/wm/world_model.hpp"

namespace love {

// One stored episode, observation-led: row k holds (o_k, a_{k-1}, r_{k-1}),
// with zeros at k = 0. `transitions()` counts the environment steps.
struct EpisodeRecord {
  Eigen::MatrixXf obs;         // (N+1) x obs_flat
  Eigen::MatrixXf actions;     // (N+1) x action_dim
  Eigen::VectorXf rewards;     // (N+1)
  Eigen::MatrixXd true_state;  // (N+1) x state_dim, diagnostic

  int transitions() const { return int(rewards.size()) - 1; }
  double episode_return() const { return double(rewards.sum()); }
};

// Episode store with length-L subsequence sampling. Sampled windows never
// cross episode boundaries. The caller supplies the rng, so independent
// per-particle streams yield independently shuffled batches.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity_episodes = 1000)
      : capacity_(capacity_episodes) {}

  void add(EpisodeRecord episode);

  SequenceBatch<float> sample(int batch_size, int seq_len, Rng& rng) const;

  int size() const { return int(episodes_.size()); }
  long total_steps() const { return total_steps_; }
  const EpisodeRecord& episode(int i) const { return episodes_.at(std::size_t(i)); }

 private:
  int capacity_;
  std::deque<EpisodeRecord> episodes_;
  long total_steps_ = 0;
};

}  // namespace love
