#pragma once

#include <string>
#include <vector>

#include "love/env/env.hpp"

// Pointmass under actuation-limited acceleration control in a walled arena:
// the reward-free bug trap and maze exploration tasks.

namespace love::env {

struct Segment {
  double x1, y1, x2, y2;
};

struct PointmassParams {
  double radius = 0.25;
  double restitution = 0.3;
  double accel_gain = 8.0;
  double drag = 2.0;
  double dt = 0.05;

  double vmax() const { return accel_gain / drag; }  // terminal speed
};

struct ArenaGeometry {
  double size = 10.0;  // arena is [0, size]^2
  std::vector<Segment> walls;
  double start_x = 5.0, start_y = 5.0;
  // Bounding box of the trap (including the exit channel) when the arena has
  // one; any position outside it counts as escaped.
  bool has_trap = false;
  double trap_x0 = 0, trap_y0 = 0, trap_x1 = 0, trap_y1 = 0;

  bool escaped(double x, double y) const {
    if (!has_trap) return false;
    return x < trap_x0 || x > trap_x1 || y < trap_y0 || y > trap_y1;
  }
};

struct PointmassState {
  double px = 0, py = 0;
  double vx = 0, vy = 0;
};

// Enclosure with a narrow exit channel on the right; the ratio of agent
// diameter to passage width is exactly `passage_ratio` (0.9).
ArenaGeometry bugtrap_geometry(const PointmassParams& params, double passage_ratio = 0.9);

// Serpentine corridors; the ratio of agent diameter to corridor width is
// exactly `corridor_ratio` (0.33).
ArenaGeometry maze_geometry(const PointmassParams& params, double corridor_ratio = 0.33);

// Plain-text wall list: one "x1 y1 x2 y2" per line, '#' starts a comment.
ArenaGeometry geometry_from_file(const std::string& path);

// One transition of the shared pointmass physics: semi-implicit Euler with
// acceleration = gain * action - drag * velocity, circle-vs-segment
// collisions reflecting the normal velocity component scaled by the
// restitution. Mutates `state`; the reward of these tasks is identically 0.
void pointmass_step(PointmassState& state, const Eigen::Vector2d& action,
                    const PointmassParams& params, const ArenaGeometry& geometry);

// bugtrap_step / maze_step: the same physics core against the named geometry.
StepResult bugtrap_step(PointmassState& state, const Eigen::Vector2d& action,
                        const PointmassParams& params, const ArenaGeometry& geometry,
                        const ObservationSpec& spec);
StepResult maze_step(PointmassState& state, const Eigen::Vector2d& action,
                     const PointmassParams& params, const ArenaGeometry& geometry,
                     const ObservationSpec& spec);

class PointmassEnv final : public Env {
 public:
  PointmassEnv(ArenaGeometry geometry, PointmassParams params, ObsMode mode,
               int image_size = 64);

  StepResult reset() override;
  StepResult step(const Eigen::VectorXd& action) override;
  ObservationSpec observation_spec() const override { return spec_; }
  int action_dim() const override { return 2; }

  const ArenaGeometry& geometry() const { return geometry_; }
  const PointmassParams& params() const { return params_; }
  const PointmassState& state() const { return state_; }

 private:
  ArenaGeometry geometry_;
  PointmassParams params_;
  ObservationSpec spec_;
  PointmassState state_;
};

// Observation assembly shared by the env and the step helpers.
Eigen::VectorXf pointmass_observation(const PointmassState& state,
                                      const PointmassParams& params,
                                      const ArenaGeometry& geometry,
                                      const ObservationSpec& spec);

}  // namespace love::env
