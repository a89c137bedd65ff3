#include "love/agent/replay_buffer.hpp"

#include <stdexcept>

namespace love {

void ReplayBuffer::add(EpisodeRecord episode) {
  if (episode.rewards.size() < 2)
    throw std::invalid_argument("replay: episode needs at least one transition");
  total_steps_ += episode.transitions();
  episodes_.push_back(std::move(episode));
  while (int(episodes_.size()) > capacity_) {
    total_steps_ -= episodes_.front().transitions();
    episodes_.pop_front();
  }
}

SequenceBatch<float> ReplayBuffer::sample(int batch_size, int seq_len, Rng& rng) const {
  if (episodes_.empty()) throw std::runtime_error("replay: buffer is empty");

  std::vector<int> eligible;
  for (int i = 0; i < size(); ++i)
    if (episodes_[std::size_t(i)].rewards.size() >= seq_len) eligible.push_back(i);
  if (eligible.empty())
    throw std::runtime_error("replay: no episode long enough for the requested window");

  const auto& first = episodes_[std::size_t(eligible[0])];
  const Eigen::Index obs_dim = first.obs.cols();
  const Eigen::Index act_dim = first.actions.cols();

  SequenceBatch<float> batch;
  batch.obs.assign(std::size_t(seq_len), Eigen::MatrixXf(batch_size, obs_dim));
  batch.actions.assign(std::size_t(seq_len), Eigen::MatrixXf(batch_size, act_dim));
  batch.rewards.assign(std::size_t(seq_len), Eigen::MatrixXf(batch_size, 1));

  for (int b = 0; b < batch_size; ++b) {
    const int e = eligible[std::size_t(rng.uniform_int(eligible.size()))];
    const auto& ep = episodes_[std::size_t(e)];
    const int rows = int(ep.rewards.size());
    const int start = int(rng.uniform_int(std::uint64_t(rows - seq_len + 1)));
    for (int k = 0; k < seq_len; ++k) {
      batch.obs[std::size_t(k)].row(b) = ep.obs.row(start + k);
      batch.actions[std::size_t(k)].row(b) = ep.actions.row(start + k);
      batch.rewards[std::size_t(k)](b, 0) = ep.rewards(start + k);
    }
  }
  return batch;
}

}  // namespace love
