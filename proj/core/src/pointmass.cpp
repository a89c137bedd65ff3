#include "love/env/pointmass.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "love/env/render.hpp"

namespace love::env {

namespace {

// Closest point on segment to (x, y).
void closest_point(const Segment& s, double x, double y, double& cx, double& cy) {
  const double dx = s.x2 - s.x1, dy = s.y2 - s.y1;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((x - s.x1) * dx + (y - s.y1) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  cx = s.x1 + t * dx;
  cy = s.y1 + t * dy;
}

void add_box(std::vector<Segment>& walls, double x0, double y0, double x1, double y1) {
  walls.push_back({x0, y0, x1, y0});
  walls.push_back({x1, y0, x1, y1});
  walls.push_back({x1, y1, x0, y1});
  walls.push_back({x0, y1, x0, y0});
}

}  // namespace

ArenaGeometry bugtrap_geometry(const PointmassParams& params, double passage_ratio) {
  const double diameter = 2.0 * params.radius;
  const double passage = diameter / passage_ratio;
  if (std::abs(diameter / passage - passage_ratio) > 1e-12)
    throw std::logic_error("bugtrap: passage ratio violated");

  ArenaGeometry g;
  g.size = 10.0;
  add_box(g.walls, 0, 0, g.size, g.size);

  // Trap box with an opening of exactly `passage` in the right wall,
  // centered vertically, plus a short flared exit channel.
  const double x0 = 3.0, y0 = 3.5, x1 = 6.5, y1 = 6.5;
  const double cy = 0.5 * (y0 + y1);
  const double gap_lo = cy - 0.5 * passage;
  const double gap_hi = cy + 0.5 * passage;
  g.walls.push_back({x0, y0, x1, y0});          // bottom
  g.walls.push_back({x0, y1, x1, y1});          // top
  g.walls.push_back({x0, y0, x0, y1});          // left
  g.walls.push_back({x1, y0, x1, gap_lo});      // right, below the gap
  g.walls.push_back({x1, gap_hi, x1, y1});      // right, above the gap
  // Exit channel lips, flaring outward.
  const double lip = 0.8, flare = 0.25;
  g.walls.push_back({x1, gap_lo, x1 + lip, gap_lo - flare});
  g.walls.push_back({x1, gap_hi, x1 + lip, gap_hi + flare});

  g.start_x = 0.5 * (x0 + x1);
  g.start_y = cy;
  g.has_trap = true;
  g.trap_x0 = x0 - 0.1;
  g.trap_y0 = y0 - 0.1;
  g.trap_x1 = x1 + lip + 0.1;
  g.trap_y1 = y1 + 0.1;
  return g;
}

ArenaGeometry maze_geometry(const PointmassParams& params, double corridor_ratio) {
  const double diameter = 2.0 * params.radius;
  const double corridor = diameter / corridor_ratio;
  if (std::abs(diameter / corridor - corridor_ratio) > 1e-12)
    throw std::logic_error("maze: corridor ratio violated");
  const int columns = 6;  // serpentine with `columns` vertical corridors

  ArenaGeometry g;
  g.size = columns * corridor;
  add_box(g.walls, 0, 0, g.size, g.size);
  for (int k = 1; k < columns; ++k) {
    const double x = k * corridor;
    if (k % 2 == 1) {
      g.walls.push_back({x, 0, x, g.size - corridor});  // gap at the top
    } else {
      g.walls.push_back({x, corridor, x, g.size});      // gap at the bottom
    }
  }
  g.start_x = 0.5 * corridor;
  g.start_y = 0.5 * corridor;
  return g;
}

ArenaGeometry geometry_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open wall file: " + path);
  ArenaGeometry g;
  g.walls.clear();
  double max_coord = 0;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    Segment s;
    if (ls >> s.x1 >> s.y1 >> s.x2 >> s.y2) {
      g.walls.push_back(s);
      max_coord = std::max({max_coord, s.x1, s.y1, s.x2, s.y2});
    }
  }
  if (g.walls.empty()) throw std::runtime_error("wall file has no segments: " + path);
  g.size = max_coord;
  g.start_x = g.start_y = 0.5 * max_coord;
  return g;
}

void pointmass_step(PointmassState& state, const Eigen::Vector2d& action,
                    const PointmassParams& params, const ArenaGeometry& geometry) {
  const double ax = std::clamp(action.x(), -1.0, 1.0);
  const double ay = std::clamp(action.y(), -1.0, 1.0);

  state.vx += params.dt * (params.accel_gain * ax - params.drag * state.vx);
  state.vy += params.dt * (params.accel_gain * ay - params.drag * state.vy);
  state.px += params.dt * state.vx;
  state.py += params.dt * state.vy;

  // A couple of passes so corner contacts settle without interpenetration.
  for (int pass = 0; pass < 3; ++pass) {
    bool touched = false;
    for (const auto& wall : geometry.walls) {
      double cx, cy;
      closest_point(wall, state.px, state.py, cx, cy);
      const double dx = state.px - cx, dy = state.py - cy;
      const double dist = std::sqrt(dx * dx + dy * dy);
      if (dist >= params.radius) continue;
      double nx, ny;
      if (dist > 1e-12) {
        nx = dx / dist;
        ny = dy / dist;
      } else {
        // Center exactly on the wall: push back against the velocity.
        const double speed = std::hypot(state.vx, state.vy);
        nx = speed > 0 ? -state.vx / speed : 0.0;
        ny = speed > 0 ? -state.vy / speed : 1.0;
      }
      state.px = cx + nx * params.radius;
      state.py = cy + ny * params.radius;
      const double vn = state.vx * nx + state.vy * ny;
      if (vn < 0) {
        state.vx -= (1.0 + params.restitution) * vn * nx;
        state.vy -= (1.0 + params.restitution) * vn * ny;
      }
      touched = true;
    }
    if (!touched) break;
  }
  state.px = std::clamp(state.px, params.radius, geometry.size - params.radius);
  state.py = std::clamp(state.py, params.radius, geometry.size - params.radius);
}

Eigen::VectorXf pointmass_observation(const PointmassState& state,
                                      const PointmassParams& params,
                                      const ArenaGeometry& geometry,
                                      const ObservationSpec& spec) {
  if (spec.mode == ObsMode::image) {
    return render_topdown(geometry, state.px, state.py, params.radius, spec.height);
  }
  Eigen::VectorXf obs(4);
  obs << float(2.0 * state.px / geometry.size - 1.0),
      float(2.0 * state.py / geometry.size - 1.0), float(state.vx / params.vmax()),
      float(state.vy / params.vmax());
  return obs;
}

namespace {

StepResult pointmass_step_result(PointmassState& state, const Eigen::Vector2d& action,
                                 const PointmassParams& params,
                                 const ArenaGeometry& geometry,
                                 const ObservationSpec& spec) {
  pointmass_step(state, action, params, geometry);
  StepResult r;
  r.observation = pointmass_observation(state, params, geometry, spec);
  r.reward = 0.0;  // reward-free task
  r.done = false;
  r.true_state = {state.px, state.py, state.vx, state.vy};
  return r;
}

}  // namespace

StepResult bugtrap_step(PointmassState& state, const Eigen::Vector2d& action,
                        const PointmassParams& params, const ArenaGeometry& geometry,
                        const ObservationSpec& spec) {
  return pointmass_step_result(state, action, params, geometry, spec);
}

StepResult maze_step(PointmassState& state, const Eigen::Vector2d& action,
                     const PointmassParams& params, const ArenaGeometry& geometry,
                     const ObservationSpec& spec) {
  return pointmass_step_result(state, action, params, geometry, spec);
}

PointmassEnv::PointmassEnv(ArenaGeometry geometry, PointmassParams params, ObsMode mode,
                           int image_size)
    : geometry_(std::move(geometry)), params_(params) {
  spec_ = mode == ObsMode::image ? ObservationSpec::image_obs(image_size, image_size, 3)
                                 : ObservationSpec::vector_obs(4);
}

StepResult PointmassEnv::reset() {
  state_ = PointmassState{geometry_.start_x, geometry_.start_y, 0.0, 0.0};
  StepResult r;
  r.observation = pointmass_observation(state_, params_, geometry_, spec_);
  r.reward = 0;
  r.done = false;
  r.true_state = {state_.px, state_.py, state_.vx, state_.vy};
  return r;
}

StepResult PointmassEnv::step(const Eigen::VectorXd& action) {
  if (action.size() != 2) throw std::invalid_argument("pointmass: action must be 2-d");
  return pointmass_step_result(state_, Eigen::Vector2d(action.x(), action.y()), params_,
                               geometry_, spec_);
}

}  // namespace love::env
