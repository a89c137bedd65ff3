#include "love/harness/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace love {

void Image::line(int x0, int y0, int x1, int y1, float r, float g, float b) {
  // Bresenham.
  int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    set(x0, y0, r, g, b);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) { err += dy; x0 += sx; }
    if (e2 <= dx) { err += dx; y0 += sy; }
  }
}

void Image::blit(const Eigen::VectorXf& frame, int res, int dst_x, int dst_y) {
  for (int y = 0; y < res; ++y)
    for (int x = 0; x < res; ++x) {
      const int i = (y * res + x) * 3;
      set(dst_x + x, dst_y + y, frame[i], frame[i + 1], frame[i + 2]);
    }
}

void Image::save_ppm(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write image: " + path);
  out << "P6\n" << w_ << " " << h_ << "\n255\n";
  std::vector<unsigned char> bytes(pix_.size());
  for (std::size_t i = 0; i < pix_.size(); ++i) {
    const float v = std::clamp(pix_[i], 0.0f, 1.0f);
    bytes[i] = static_cast<unsigned char>(std::lround(v * 255.0f));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

void colormap_heat(double v, float& r, float& g, float& b) {
  v = std::clamp(v, 0.0, 1.0);
  if (v < 0.5) {
    const double t = v / 0.5;  // blue -> white
    r = float(0.2 + 0.8 * t);
    g = float(0.3 + 0.7 * t);
    b = 1.0f;
  } else {
    const double t = (v - 0.5) / 0.5;  // white -> red
    r = 1.0f;
    g = float(1.0 - 0.8 * t);
    b = float(1.0 - 0.9 * t);
  }
}

}  // namespace love
