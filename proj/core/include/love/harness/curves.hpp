#pragma once

#include <string>
#include <vector>

#include "love/harness/image.hpp"

namespace love {

struct MetricsTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;
  std::vector<double> series(const std::string& name) const;
};

// metrics.csv reader; '#' comment lines are skipped.
MetricsTable read_metrics_csv(const std::string& path);

struct CurveSummary {
  std::vector<double> mean_curve;  // per episode, across seeds, smoothed
  std::vector<double> std_curve;   // population std across seeds
  double final_mean = 0;           // mean over seeds of each seed's terminal window
  double final_std = 0;            // population std across seeds of the same
  int seeds = 0;
  int window = 10;
};

// Per-episode return curves across seeds with a terminal-window summary.
// Curves are truncated to the shortest file; smoothing is a centered moving
// average.
CurveSummary learning_curve(const std::vector<std::string>& metrics_files,
                            int smoothing_window = 1, int final_window = 10,
                            const std::string& column = "episode_return");

Image curve_image(const CurveSummary& summary, int width = 480, int height = 320);

// CSV dump of the summary (episode, mean, std per row), byte-stable.
std::string curve_csv(const CurveSummary& summary);

}  // namespace love
