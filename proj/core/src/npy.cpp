#include "love/harness/npy.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace love {

namespace {

void write_npy(const std::string& path, const char* descr, const void* data,
               std::size_t elem_size, Eigen::Index rows, Eigen::Index cols) {
  std::string header = std::string("{'descr': '") + descr +
                       "', 'fortran_order': False, 'shape': (" +
                       std::to_string(rows) + ", " + std::to_string(cols) + "), }";
  // Pad so magic + header is a multiple of 64, ending in newline.
  const std::size_t base = 10 + header.size() + 1;
  const std::size_t pad = (64 - base % 64) % 64;
  header.append(pad, ' ');
  header.push_back('\n');

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write npy: " + path);
  const unsigned char magic[8] = {0x93, 'N', 'U', 'M', 'P', 'Y', 1, 0};
  out.write(reinterpret_cast<const char*>(magic), 8);
  const std::uint16_t hlen = std::uint16_t(header.size());
  out.write(reinterpret_cast<const char*>(&hlen), 2);
  out.write(header.data(), std::streamsize(header.size()));
  out.write(reinterpret_cast<const char*>(data),
            std::streamsize(elem_size * std::size_t(rows) * std::size_t(cols)));
}

}  // namespace

void save_npy(const std::string& path, const Eigen::MatrixXf& data) {
  // Row-major on disk.
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = data;
  write_npy(path, "<f4", rm.data(), 4, data.rows(), data.cols());
}

void save_npy(const std::string& path, const Eigen::MatrixXd& data) {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = data;
  write_npy(path, "<f8", rm.data(), 8, data.rows(), data.cols());
}

Eigen::MatrixXd load_npy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open npy: " + path);
  unsigned char magic[8];
  in.read(reinterpret_cast<char*>(magic), 8);
  if (!in || std::memcmp(magic, "\x93NUMPY", 6) != 0)
    throw std::runtime_error("not an npy file: " + path);
  std::uint16_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), 2);
  std::string header(hlen, '\0');
  in.read(header.data(), hlen);

  const bool f4 = header.find("'<f4'") != std::string::npos;
  const bool f8 = header.find("'<f8'") != std::string::npos;
  if (!f4 && !f8) throw std::runtime_error("npy: unsupported dtype in " + path);
  if (header.find("'fortran_order': False") == std::string::npos)
    throw std::runtime_error("npy: only C order supported");

  const auto sh = header.find("'shape': (");
  if (sh == std::string::npos) throw std::runtime_error("npy: missing shape");
  long rows = 0, cols = 1;
  const char* p = header.c_str() + sh + 10;
  char* end = nullptr;
  rows = std::strtol(p, &end, 10);
  p = end;
  while (*p == ',' || *p == ' ') ++p;
  if (*p != ')') {
    cols = std::strtol(p, &end, 10);
    if (end == p) cols = 1;
  }

  Eigen::MatrixXd out(rows, cols);
  if (f8) {
    std::vector<double> buf(std::size_t(rows) * std::size_t(cols));
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size() * 8));
    for (long r = 0; r < rows; ++r)
      for (long c = 0; c < cols; ++c) out(r, c) = buf[std::size_t(r * cols + c)];
  } else {
    std::vector<float> buf(std::size_t(rows) * std::size_t(cols));
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size() * 4));
    for (long r = 0; r < rows; ++r)
      for (long c = 0; c < cols; ++c) out(r, c) = double(buf[std::size_t(r * cols + c)]);
  }
  if (!in) throw std::runtime_error("npy: truncated data in " + path);
  return out;
}

}  // namespace love
