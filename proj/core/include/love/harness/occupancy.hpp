#pragma once

#include <Eigen/Dense>
#include <vector>

#include "love/env/pointmass.hpp"
#include "love/harness/image.hpp"

namespace love {

struct OccupancyGrid {
  Eigen::MatrixXi counts;  // counts(y, x)
  double cell_size = 0;
  long total_steps = 0;
};

struct OccupancyResult {
  OccupancyGrid grid;
  bool escaped = false;     // any position left the trap interior
  double coverage = 0;      // nonzero cells / reachable cells
  long reachable_cells = 0;
};

// Histogram of logged positions over the arena. position_logs: one
// (rows x >=2) matrix of (x, y, ...) rows per episode. Reachable cells are
// those whose center the agent disk can occupy (at least `agent_radius`
// clear of every wall).
OccupancyResult occupancy(const std::vector<Eigen::MatrixXd>& position_logs,
                          const env::ArenaGeometry& geometry, double agent_radius,
                          int grid_resolution = 32);

// Log-scaled count map with walls overlaid.
Image occupancy_image(const OccupancyResult& occ, const env::ArenaGeometry& geometry,
                      int upscale = 8);

}  // namespace love
