#include "love/harness/occupancy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace love {

namespace {

double segment_distance(const env::Segment& s, double x, double y) {
  const double dx = s.x2 - s.x1, dy = s.y2 - s.y1;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((x - s.x1) * dx + (y - s.y1) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(x - (s.x1 + t * dx), y - (s.y1 + t * dy));
}

}  // namespace

OccupancyResult occupancy(const std::vector<Eigen::MatrixXd>& position_logs,
                          const env::ArenaGeometry& geometry, double agent_radius,
                          int grid_resolution) {
  if (grid_resolution < 1) throw std::invalid_argument("occupancy: bad resolution");
  OccupancyResult out;
  out.grid.counts = Eigen::MatrixXi::Zero(grid_resolution, grid_resolution);
  out.grid.cell_size = geometry.size / grid_resolution;

  for (const auto& log : position_logs) {
    if (log.cols() < 2) throw std::invalid_argument("occupancy: logs need x, y columns");
    for (Eigen::Index r = 0; r < log.rows(); ++r) {
      const double x = log(r, 0), y = log(r, 1);
      const int cx = std::clamp(int(x / out.grid.cell_size), 0, grid_resolution - 1);
      const int cy = std::clamp(int(y / out.grid.cell_size), 0, grid_resolution - 1);
      out.grid.counts(cy, cx) += 1;
      out.grid.total_steps += 1;
      if (geometry.escaped(x, y)) out.escaped = true;
    }
  }

  long reachable = 0;
  for (int cy = 0; cy < grid_resolution; ++cy) {
    for (int cx = 0; cx < grid_resolution; ++cx) {
      const double x = (cx + 0.5) * out.grid.cell_size;
      const double y = (cy + 0.5) * out.grid.cell_size;
      if (x < agent_radius || y < agent_radius || x > geometry.size - agent_radius ||
          y > geometry.size - agent_radius)
        continue;
      bool clear = true;
      for (const auto& wall : geometry.walls) {
        if (segment_distance(wall, x, y) < agent_radius) {
          clear = false;
          break;
        }
      }
      if (clear) ++reachable;
    }
  }
  out.reachable_cells = reachable;
  const long nonzero = (out.grid.counts.array() > 0).count();
  out.coverage = reachable > 0 ? double(nonzero) / double(reachable) : 0.0;
  return out;
}

Image occupancy_image(const OccupancyResult& occ, const env::ArenaGeometry& geometry,
                      int upscale) {
  const int res = int(occ.grid.counts.rows());
  Image img(res * upscale, res * upscale);
  const double max_log = std::log1p(double(occ.grid.counts.maxCoeff()));
  for (int cy = 0; cy < res; ++cy) {
    for (int cx = 0; cx < res; ++cx) {
      const double v =
          max_log > 0 ? std::log1p(double(occ.grid.counts(cy, cx))) / max_log : 0.0;
      float r, g, b;
      colormap_heat(v, r, g, b);
      if (occ.grid.counts(cy, cx) == 0) { r = 0.05f; g = 0.05f; b = 0.08f; }
      img.fill_rect(cx * upscale, cy * upscale, (cx + 1) * upscale, (cy + 1) * upscale,
                    r, g, b);
    }
  }
  const double scale = res * upscale / geometry.size;
  for (const auto& wall : geometry.walls) {
    img.line(int(wall.x1 * scale), int(wall.y1 * scale), int(wall.x2 * scale),
             int(wall.y2 * scale), 1.0f, 1.0f, 1.0f);
  }
  return img;
}

}  // namespace love
