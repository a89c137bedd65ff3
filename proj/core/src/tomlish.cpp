#include "love/harness/tomlish.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace love {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
    return v.substr(1, v.size() - 2);
  return v;
}

bool needs_quotes(const std::string& v) {
  if (v.empty()) return true;
  if (v == "true" || v == "false") return false;
  char* end = nullptr;
  std::strtod(v.c_str(), &end);
  return end != v.c_str() + v.size();
}

}  // namespace

KvFile KvFile::parse(const std::string& text) {
  KvFile kv;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config line " + std::to_string(lineno) +
                                 ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      kv.data_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = unquote(trim(line.substr(eq + 1)));
    if (key.empty())
      throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
    kv.data_[section][key] = Entry{value, false};
  }
  return kv;
}

KvFile KvFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string KvFile::serialize() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, entries] : data_) {
    if (!first) out << "\n";
    first = false;
    if (!section.empty()) out << "[" << section << "]\n";
    for (const auto& [key, entry] : entries) {
      out << key << " = ";
      if (needs_quotes(entry.value)) out << '"' << entry.value << '"';
      else out << entry.value;
      out << "\n";
    }
  }
  return out.str();
}

void KvFile::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << serialize();
}

bool KvFile::has(const std::string& section, const std::string& key) const {
  auto s = data_.find(section);
  return s != data_.end() && s->second.count(key) > 0;
}

std::string KvFile::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  auto s = data_.find(section);
  if (s == data_.end()) return fallback;
  auto k = s->second.find(key);
  if (k == s->second.end()) return fallback;
  k->second.read = true;
  return k->second.value;
}

double KvFile::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  if (!has(section, key)) return fallback;
  const std::string raw = get_string(section, key, "");
  char* end = nullptr;
  const double v = std::strtod(raw.c_str(), &end);
  if (end != raw.c_str() + raw.size())
    throw std::runtime_error("config value " + section + "." + key +
                             " is not a number: " + raw);
  return v;
}

long KvFile::get_long(const std::string& section, const std::string& key,
                      long fallback) const {
  const double v = get_double(section, key, double(fallback));
  const long l = long(v);
  if (double(l) != v)
    throw std::runtime_error("config value " + section + "." + key +
                             " is not an integer");
  return l;
}

bool KvFile::get_bool(const std::string& section, const std::string& key,
                      bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string raw = get_string(section, key, "");
  if (raw == "true") return true;
  if (raw == "false") return false;
  throw std::runtime_error("config value " + section + "." + key +
                           " is not a boolean: " + raw);
}

void KvFile::set_string(const std::string& section, const std::string& key,
                        const std::string& value) {
  data_[section][key] = Entry{value, false};
}

void KvFile::set_double(const std::string& section, const std::string& key,
                        double value) {
  std::ostringstream os;
  os.precision(17);
  os << value;
  set_string(section, key, os.str());
}

void KvFile::set_long(const std::string& section, const std::string& key, long value) {
  set_string(section, key, std::to_string(value));
}

void KvFile::set_bool(const std::string& section, const std::string& key, bool value) {
  set_string(section, key, value ? "true" : "false");
}

std::map<std::string, std::string> KvFile::section(const std::string& name) const {
  std::map<std::string, std::string> out;
  auto s = data_.find(name);
  if (s == data_.end()) return out;
  for (const auto& [key, entry] : s->second) {
    entry.read = true;
    out[key] = entry.value;
  }
  return out;
}

std::vector<std::string> KvFile::unread_keys() const {
  std::vector<std::string> out;
  for (const auto& [section, entries] : data_)
    for (const auto& [key, entry] : entries)
      if (!entry.read) out.push_back(section.empty() ? key : section + "." + key);
  return out;
}

}  // namespace love
