#include "love/agent/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

namespace love {

namespace {

constexpr char kMagic[8] = {'L', 'O', 'V', 'E', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}
void write_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), 8);
}
void write_i64(std::ofstream& out, std::int64_t v) {
  out.write(reinterpret_cast<const char*>(&v), 8);
}
void write_string(std::ofstream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), std::streamsize(s.size()));
}

std::uint32_t read_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
std::uint64_t read_u64(std::ifstream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
std::int64_t read_i64(std::ifstream& in) {
  std::int64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
std::string read_string(std::ifstream& in) {
  const std::uint64_t n = read_u64(in);
  std::string s(n, '\0');
  in.read(s.data(), std::streamsize(n));
  return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const nn::ParamList<float>& params,
                     const CheckpointMeta& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, 8);
  write_u32(out, kVersion);
  write_u64(out, meta.config_hash);
  write_i64(out, meta.episode);
  write_u64(out, meta.rng_states.size());
  for (const auto& s : meta.rng_states) write_string(out, s);
  write_u64(out, params.size());
  for (const auto& p : params) {
    write_string(out, p.name);
    const auto& v = p.tensor.value();
    write_i64(out, v.rows());
    write_i64(out, v.cols());
    // Column-major float32 payload.
    out.write(reinterpret_cast<const char*>(v.data()),
              std::streamsize(std::size_t(v.size()) * 4));
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

CheckpointMeta load_checkpoint(const std::string& path, nn::ParamList<float>& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  const std::uint32_t version = read_u32(in);
  if (version != kVersion)
    throw std::runtime_error("unsupported checkpoint version in " + path);

  CheckpointMeta meta;
  meta.config_hash = read_u64(in);
  meta.episode = long(read_i64(in));
  const std::uint64_t n_rng = read_u64(in);
  for (std::uint64_t i = 0; i < n_rng; ++i) meta.rng_states.push_back(read_string(in));

  std::map<std::string, Eigen::MatrixXf> loaded;
  const std::uint64_t n_params = read_u64(in);
  for (std::uint64_t i = 0; i < n_params; ++i) {
    const std::string name = read_string(in);
    const auto rows = Eigen::Index(read_i64(in));
    const auto cols = Eigen::Index(read_i64(in));
    Eigen::MatrixXf m(rows, cols);
    in.read(reinterpret_cast<char*>(m.data()),
            std::streamsize(std::size_t(m.size()) * 4));
    loaded[name] = std::move(m);
  }
  if (!in) throw std::runtime_error("checkpoint truncated: " + path);

  for (auto& p : params) {
    auto it = loaded.find(p.name);
    if (it == loaded.end())
      throw std::runtime_error("checkpoint missing parameter " + p.name);
    if (it->second.rows() != p.tensor.value().rows() ||
        it->second.cols() != p.tensor.value().cols())
      throw std::runtime_error("checkpoint shape mismatch for " + p.name);
    p.tensor.value() = it->second;
  }
  return meta;
}

}  // namespace love
