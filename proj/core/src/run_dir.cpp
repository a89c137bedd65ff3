#include "love/harness/run_dir.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace love {

namespace fs = std::filesystem;

void ensure_dir(const std::string& path) { fs::create_directories(path); }

bool file_exists(const std::string& path) { return fs::exists(path); }

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> list_dir(const std::string& path) {
  std::vector<std::string> out;
  if (!fs::exists(path)) return out;
  for (const auto& e : fs::directory_iterator(path))
    out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace love
