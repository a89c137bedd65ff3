#pragma once

#include <Eigen/Dense>
#include <vector>

#include "love/agent/replay_buffer.hpp"
#include "love/harness/image.hpp"
#include "love/wm/world_model.hpp"

namespace love {

struct PredictionStrip {
  Image grid;                          // (M+1) rows x pred_len columns of frames
  std::vector<Eigen::VectorXf> truth;  // the ground-truth frames
  double mean_pixel_std = 0;           // inter-particle std, averaged
};

// Open-loop prediction strip: ground truth row on top, one row per particle
// below. Context frames [t0, t0+context) feed the filter; the logged actions
// drive the imagination for pred_len steps. Rejects vector-observation logs.
PredictionStrip prediction_strip(const Ensemble<float>& ensemble,
                                 const EpisodeRecord& episode, int t0,
                                 int context_length = 5, int pred_length = 15);

}  // namespace love
