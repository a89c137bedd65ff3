#pragma once

#include "love/env/env.hpp"

// Sparse-reward pendulum swing-up. The pendulum always starts hanging down
// (angle 0) and only receives reward inside a cone around the upright
// configuration; the torque limit is too small to reach the top in one swing.

namespace love::env {

struct PendulumParams {
  double mass = 1.0;
  double length = 1.0;
  double gravity = 10.0;
  double damping = 0.0;
  double torque_limit = 2.0;
  double dt = 0.05;
  double max_speed = 8.0;     // angular velocity clamp
  double reward_cone = 0.45;  // radians around upright
  double velocity_cap = 7.0;  // rad/s; reward requires |omega| below this
};

struct PendulumState {
  double angle = 0.0;            // radians, 0 = down, wrapped to (-pi, pi]
  double angular_velocity = 0.0; // rad/s
};

double wrap_angle(double a);

// RK4 integration of the standard pendulum dynamics at fixed dt. The torque
// is clipped to the limit. Sparse reward: 1 when the angle error to upright
// is below reward_cone and |angular velocity| is below velocity_cap.
StepResult pendulum_step(PendulumState& state, double torque,
                         const PendulumParams& params, const ObservationSpec& spec);

// 0.5 m l^2 w^2 + m g l (1 - cos angle); zero at rest hanging down.
double pendulum_energy(const PendulumState& state, const PendulumParams& params);

class PendulumEnv final : public Env {
 public:
  PendulumEnv(PendulumParams params, ObsMode mode, int image_size = 64);

  StepResult reset() override;
  StepResult step(const Eigen::VectorXd& action) override;
  ObservationSpec observation_spec() const override { return spec_; }
  int action_dim() const override { return 1; }

  const PendulumParams& params() const { return params_; }
  const PendulumState& state() const { return state_; }

 private:
  PendulumParams params_;
  ObservationSpec spec_;
  PendulumState state_;
};

Eigen::VectorXf pendulum_observation(const PendulumState& state,
                                     const PendulumParams& params,
                                     const ObservationSpec& spec);

}  // namespace love::env
