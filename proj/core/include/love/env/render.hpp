#pragma once

#include <Eigen/Dense>

#include "love/env/pointmass.hpp"

namespace love::env {

// Deterministic top-down rasterization of walls plus the agent disk.
// Returns a flattened (y, x, channel) RGB image with values in [0, 1].
// The agent is drawn first and walls on top, so wall pixels do not depend
// on agent position.
Eigen::VectorXf render_topdown(const ArenaGeometry& geometry, double agent_x,
                               double agent_y, double agent_radius, int resolution);

// Pendulum frame: rod from the pivot at the image center, bob disk at the
// tip. angle 0 points down.
Eigen::VectorXf render_pendulum(double angle, int resolution);

}  // namespace love::env
