#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace celltop {

// Minimal TOML subset: [section] headers, key = value pairs, values of type
// string ("..."), integer, float, and boolean, '#' comments. Enough for the
// flat config layout; nested tables and arrays are rejected.
class TomlTable {
 public:
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  int64_t get_int(const std::string& key, int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // throws std::invalid_argument when absent
  std::string require_string(const std::string& key) const;

  void set(std::string key, std::string raw, bool quoted);

 private:
  struct Entry {
    std::string raw;
    bool quoted;
  };
  const Entry* find(const std::string& key) const;
  std::map<std::string, Entry> values_;  // keys are "section.key"
};

// Errors carry file and line.
TomlTable parse_toml_file(const std::string& path);
TomlTable parse_toml(const std::string& text, const std::string& origin = "<string>");

}  // namespace celltop
