#pragma once

#include <Eigen/Dense>

#include "love/env/pendulum.hpp"
#include "love/harness/image.hpp"
#include "love/wm/world_model.hpp"

namespace love {

struct ValueHeatmap {
  Eigen::MatrixXd mean_values;  // (n_velocity x n_angle)
  Eigen::MatrixXd std_values;   // population std across particles, >= 0
  double angle_min = -3.14159265358979323846, angle_max = 3.14159265358979323846;
  double velocity_min = -8, velocity_max = 8;
};

// Ensemble mean and standard deviation of the value function over a grid of
// pendulum states. For each grid state a short context is synthesized by
// integrating the true pendulum backward in time with zero torque, the
// context is filtered by every particle (deterministic latents), and the
// value heads are evaluated on the final posterior.
ValueHeatmap value_heatmap(const Ensemble<float>& ensemble,
                           const env::PendulumParams& params,
                           const ObservationSpec& obs_spec, int n_angle = 64,
                           int n_velocity = 64, int context_length = 5);

// Side-by-side mean / std panels.
Image heatmap_image(const ValueHeatmap& map, int upscale = 4);

}  // namespace love
