#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "love/nn/layers.hpp"

namespace love {

// Version-tagged binary checkpoint: named parameter arrays keyed by
// (component, particle, layer) path plus a metadata record.
struct CheckpointMeta {
  std::uint64_t config_hash = 0;
  long episode = 0;
  std::vector<std::string> rng_states;
};

void save_checkpoint(const std::string& path, const nn::ParamList<float>& params,
                     const CheckpointMeta& meta);

// Loads into an existing parameter list; names and shapes must match.
CheckpointMeta load_checkpoint(const std::string& path, nn::ParamList<float>& params);

}  // namespace love
