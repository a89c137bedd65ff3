#include "love/env/render.hpp"

#include <cmath>

namespace love::env {

namespace {

double segment_distance(const Segment& s, double x, double y) {
  const double dx = s.x2 - s.x1, dy = s.y2 - s.y1;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((x - s.x1) * dx + (y - s.y1) * dy) / len2 : 0.0;
  t = t < 0 ? 0 : (t > 1 ? 1 : t);
  const double cx = s.x1 + t * dx, cy = s.y1 + t * dy;
  return std::hypot(x - cx, y - cy);
}

inline void put(Eigen::VectorXf& img, int res, int py, int px, float r, float g,
                float b) {
  const int idx = (py * res + px) * 3;
  img[idx] = r;
  img[idx + 1] = g;
  img[idx + 2] = b;
}

}  // namespace

Eigen::VectorXf render_topdown(const ArenaGeometry& geometry, double agent_x,
                               double agent_y, double agent_radius, int resolution) {
  Eigen::VectorXf img = Eigen::VectorXf::Zero(resolution * resolution * 3);
  const double cell = geometry.size / resolution;
  const double wall_half_width = 0.6 * cell;

  // Agent first, walls on top: wall pixels are invariant to agent motion.
  for (int py = 0; py < resolution; ++py) {
    for (int px = 0; px < resolution; ++px) {
      const double wx = (px + 0.5) * cell;
      const double wy = (py + 0.5) * cell;
      const double d = std::hypot(wx - agent_x, wy - agent_y);
      if (d <= agent_radius) put(img, resolution, py, px, 1.0f, 0.1f, 0.1f);
    }
  }
  for (int py = 0; py < resolution; ++py) {
    for (int px = 0; px < resolution; ++px) {
      const double wx = (px + 0.5) * cell;
      const double wy = (py + 0.5) * cell;
      for (const auto& wall : geometry.walls) {
        if (segment_distance(wall, wx, wy) <= wall_half_width) {
          put(img, resolution, py, px, 1.0f, 1.0f, 1.0f);
          break;
        }
      }
    }
  }
  return img;
}

Eigen::VectorXf render_pendulum(double angle, int resolution) {
  Eigen::VectorXf img = Eigen::VectorXf::Zero(resolution * resolution * 3);
  // World frame [-1.4, 1.4]^2 with the pivot at the center; angle 0 down.
  const double extent = 1.4;
  const double cell = 2.0 * extent / resolution;
  const double rod_len = 1.0;
  // World y points up; angle 0 hangs down at (0, -1).
  const double tip_x = rod_len * std::sin(angle);
  const double tip_y = -rod_len * std::cos(angle);
  const Segment rod{0.0, 0.0, tip_x, tip_y};
  const double rod_half_width = 0.05;
  const double bob_radius = 0.18;

  for (int py = 0; py < resolution; ++py) {
    for (int px = 0; px < resolution; ++px) {
      const double wx = -extent + (px + 0.5) * cell;
      const double wy = extent - (py + 0.5) * cell;
      if (std::hypot(wx - tip_x, wy - tip_y) <= bob_radius) {
        put(img, resolution, py, px, 1.0f, 0.1f, 0.1f);
        continue;
      }
      if (segment_distance(rod, wx, wy) <= rod_half_width)
        put(img, resolution, py, px, 0.9f, 0.9f, 0.9f);
    }
  }
  return img;
}

}  // namespace love::env
