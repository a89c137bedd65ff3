#include "love/env/registry.hpp"

#include <functional>
#include <stdexcept>

#include "love/env/pendulum.hpp"
#include "love/env/pointmass.hpp"

namespace love::env {

namespace {

double opt(const EnvOptions& o, const std::string& key, double fallback) {
  auto it = o.params.find(key);
  return it == o.params.end() ? fallback : it->second;
}

PointmassParams pointmass_params(const EnvOptions& o) {
  PointmassParams p;
  p.radius = opt(o, "radius", p.radius);
  p.restitution = opt(o, "restitution", p.restitution);
  p.accel_gain = opt(o, "accel_gain", p.accel_gain);
  p.drag = opt(o, "drag", p.drag);
  p.dt = opt(o, "dt", p.dt);
  return p;
}

PendulumParams pendulum_params(const EnvOptions& o) {
  PendulumParams p;
  p.mass = opt(o, "mass", p.mass);
  p.length = opt(o, "length", p.length);
  p.gravity = opt(o, "gravity", p.gravity);
  p.damping = opt(o, "damping", p.damping);
  p.torque_limit = opt(o, "torque_limit", p.torque_limit);
  p.dt = opt(o, "dt", p.dt);
  p.max_speed = opt(o, "max_speed", p.max_speed);
  p.reward_cone = opt(o, "reward_cone", p.reward_cone);
  p.velocity_cap = opt(o, "velocity_cap", p.velocity_cap);
  return p;
}

}  // namespace

std::unique_ptr<Env> make_env(const std::string& name, const EnvOptions& options) {
  const bool pixels = name.size() > 7 && name.substr(name.size() - 7) == "_pixels";
  const std::string base = pixels ? name.substr(0, name.size() - 7) : name;
  const ObsMode mode = pixels ? ObsMode::image : ObsMode::vector;

  if (base == "bugtrap") {
    auto p = pointmass_params(options);
    return std::make_unique<PointmassEnv>(bugtrap_geometry(p), p, mode,
                                          options.image_size);
  }
  if (base == "maze") {
    auto p = pointmass_params(options);
    return std::make_unique<PointmassEnv>(maze_geometry(p), p, mode,
                                          options.image_size);
  }
  if (base == "pendulum_sparse") {
    return std::make_unique<PendulumEnv>(pendulum_params(options), mode,
                                         options.image_size);
  }
  if (base == "pointmass_file") {
    if (options.walls_file.empty())
      throw std::invalid_argument("pointmass_file requires a walls_file");
    auto p = pointmass_params(options);
    return std::make_unique<PointmassEnv>(geometry_from_file(options.walls_file), p,
                                          mode, options.image_size);
  }
  throw std::invalid_argument("unknown environment: " + name);
}

std::vector<std::string> registered_envs() {
  return {"bugtrap",          "bugtrap_pixels", "maze",
          "maze_pixels",      "pendulum_sparse", "pendulum_sparse_pixels",
          "pointmass_file",   "pointmass_file_pixels"};
}

}  // namespace love::env
