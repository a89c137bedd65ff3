#include "love/env/pendulum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "love/env/render.hpp"

namespace love::env {

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * M_PI);  // [-pi, pi]
  if (w <= -M_PI) w = M_PI;
  return w;
}

namespace {

// angle acceleration; angle 0 hangs down, gravity restores toward 0.
double accel(double angle, double omega, double torque, const PendulumParams& p) {
  const double inertia = p.mass * p.length * p.length;
  return (-p.mass * p.gravity * p.length * std::sin(angle) - p.damping * omega +
          torque) /
         inertia;
}

}  // namespace

StepResult pendulum_step(PendulumState& state, double torque,
                         const PendulumParams& params, const ObservationSpec& spec) {
  const double u = std::clamp(torque, -params.torque_limit, params.torque_limit);
  const double h = params.dt;

  const double th = state.angle, om = state.angular_velocity;
  const double k1t = om, k1o = accel(th, om, u, params);
  const double k2t = om + 0.5 * h * k1o, k2o = accel(th + 0.5 * h * k1t, om + 0.5 * h * k1o, u, params);
  const double k3t = om + 0.5 * h * k2o, k3o = accel(th + 0.5 * h * k2t, om + 0.5 * h * k2o, u, params);
  const double k4t = om + h * k3o, k4o = accel(th + h * k3t, om + h * k3o, u, params);

  state.angle = wrap_angle(th + h / 6.0 * (k1t + 2 * k2t + 2 * k3t + k4t));
  state.angular_velocity =
      std::clamp(om + h / 6.0 * (k1o + 2 * k2o + 2 * k3o + k4o), -params.max_speed,
                 params.max_speed);

  const double upright_error = M_PI - std::abs(state.angle);
  const bool at_top = upright_error < params.reward_cone &&
                      std::abs(state.angular_velocity) < params.velocity_cap;

  StepResult r;
  r.observation = pendulum_observation(state, params, spec);
  r.reward = at_top ? 1.0 : 0.0;
  r.done = false;
  r.true_state = {state.angle, state.angular_velocity};
  return r;
}

double pendulum_energy(const PendulumState& state, const PendulumParams& params) {
  const double kinetic = 0.5 * params.mass * params.length * params.length *
                         state.angular_velocity * state.angular_velocity;
  const double potential =
      params.mass * params.gravity * params.length * (1.0 - std::cos(state.angle));
  return kinetic + potential;
}

Eigen::VectorXf pendulum_observation(const PendulumState& state,
                                     const PendulumParams& params,
                                     const ObservationSpec& spec) {
  if (spec.mode == ObsMode::image) {
    return render_pendulum(state.angle, spec.height);
  }
  Eigen::VectorXf obs(3);
  obs << float(std::cos(state.angle)), float(std::sin(state.angle)),
      float(state.angular_velocity / params.max_speed);
  return obs;
}

PendulumEnv::PendulumEnv(PendulumParams params, ObsMode mode, int image_size)
    : params_(params) {
  spec_ = mode == ObsMode::image ? ObservationSpec::image_obs(image_size, image_size, 3)
                                 : ObservationSpec::vector_obs(3);
}

StepResult PendulumEnv::reset() {
  state_ = PendulumState{0.0, 0.0};  // always the downward configuration
  StepResult r;
  r.observation = pendulum_observation(state_, params_, spec_);
  r.reward = 0;
  r.done = false;
  r.true_state = {state_.angle, state_.angular_velocity};
  return r;
}

StepResult PendulumEnv::step(const Eigen::VectorXd& action) {
  if (action.size() != 1) throw std::invalid_argument("pendulum: action must be 1-d");
  // Policy actions live in [-1, 1]; scale to the torque limit.
  return pendulum_step(state_, action[0] * params_.torque_limit, params_, spec_);
}

}  // namespace love::env
