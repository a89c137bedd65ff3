#pragma once

#include <map>
#include <string>
#include <vector>

// Flat key-value configuration files: TOML-style [sections] holding
// `key = value` lines with '#' comments. Values are numbers, booleans or
// quoted strings; nesting is not supported.

namespace love {

class KvFile {
 public:
  static KvFile parse(const std::string& text);
  static KvFile load(const std::string& path);

  // Deterministic output: sections and keys sorted.
  std::string serialize() const;
  void save(const std::string& path) const;

  bool has(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  long get_long(const std::string& section, const std::string& key,
                long fallback) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;

  void set_string(const std::string& section, const std::string& key,
                  const std::string& value);
  void set_double(const std::string& section, const std::string& key, double value);
  void set_long(const std::string& section, const std::string& key, long value);
  void set_bool(const std::string& section, const std::string& key, bool value);

  // All keys of one section (for pass-through sections like [env]).
  std::map<std::string, std::string> section(const std::string& name) const;

  // Keys present in the file but never read; used to reject typos.
  std::vector<std::string> unread_keys() const;

 private:
  // section -> key -> raw value; `read` tracks typed getter access.
  struct Entry {
    std::string value;
    mutable bool read = false;
  };
  std::map<std::string, std::map<std::string, Entry>> data_;
};

}  // namespace love
