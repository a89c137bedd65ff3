#pragma once

#include <Eigen/Dense>
#include <string>

// Minimal NPY v1.0 writer/reader for 2-D arrays (little-endian '<f4'/'<f8').

namespace love {

void save_npy(const std::string& path, const Eigen::MatrixXf& data);
void save_npy(const std::string& path, const Eigen::MatrixXd& data);

Eigen::MatrixXd load_npy(const std::string& path);

}  // namespace love
