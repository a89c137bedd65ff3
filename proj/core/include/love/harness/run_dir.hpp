#pragma once

#include <string>
#include <vector>

namespace love {

void ensure_dir(const std::string& path);
bool file_exists(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

// Sorted entries (names, not paths) of a directory; empty if missing.
std::vector<std::string> list_dir(const std::string& path);

}  // namespace love
