#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "love/env/env.hpp"

namespace love::env {

struct EnvOptions {
  int image_size = 64;
  std::string walls_file;                 // for the file-defined pointmass arena
  std::map<std::string, double> params;  // physics overrides by name
};

// Environments by string name: "bugtrap", "maze", "pendulum_sparse" and
// their "_pixels" variants, plus "pointmass_file" (requires walls_file).
std::unique_ptr<Env> make_env(const std::string& name, const EnvOptions& options = {});

std::vector<std::string> registered_envs();

}  // namespace love::env
