#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

// RGB raster canvas plus deterministic binary PPM (P6) output. PPM carries
// no metadata, so identical pixels give byte-identical files.

namespace love {

class Image {
 public:
  Image() = default;
  Image(int width, int height, float r = 0, float g = 0, float b = 0)
      : w_(width), h_(height), pix_(std::size_t(width) * height * 3) {
    for (int y = 0; y < h_; ++y)
      for (int x = 0; x < w_; ++x) set(x, y, r, g, b);
  }

  int width() const { return w_; }
  int height() const { return h_; }

  void set(int x, int y, float r, float g, float b) {
    if (x < 0 || y < 0 || x >= w_ || y >= h_) return;
    const std::size_t i = (std::size_t(y) * w_ + x) * 3;
    pix_[i] = r; pix_[i + 1] = g; pix_[i + 2] = b;
  }

  void fill_rect(int x0, int y0, int x1, int y1, float r, float g, float b) {
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) set(x, y, r, g, b);
  }

  void line(int x0, int y0, int x1, int y1, float r, float g, float b);

  // Blit a flattened (y, x, channel) [0,1] frame of size res x res.
  void blit(const Eigen::VectorXf& frame, int res, int dst_x, int dst_y);

  void save_ppm(const std::string& path) const;

 private:
  int w_ = 0, h_ = 0;
  std::vector<float> pix_;
};

// Blue -> white -> red diverging map for signed data, value in [0, 1].
void colormap_heat(double v, float& r, float& g, float& b);

}  // namespace love
