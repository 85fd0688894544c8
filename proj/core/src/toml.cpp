#include "celltop/toml.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace celltop {

namespace {

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  throw std::invalid_argument(origin + ":" + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  return true;
}

// strips a trailing comment that is not inside a quoted string
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

}  // namespace

void TomlTable::set(std::string key, std::string raw, bool quoted) {
  values_[std::move(key)] = Entry{std::move(raw), quoted};
}

const TomlTable::Entry* TomlTable::find(const std::string& key) const {
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

std::string TomlTable::get_string(const std::string& key, const std::string& fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  if (!e->quoted) throw std::invalid_argument("config key '" + key + "' is not a string");
  return e->raw;
}

std::string TomlTable::require_string(const std::string& key) const {
  if (!has(key)) throw std::invalid_argument("config key '" + key + "' is required");
  return get_string(key, "");
}

int64_t TomlTable::get_int(const std::string& key, int64_t fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  if (e->quoted) throw std::invalid_argument("config key '" + key + "' is not an integer");
  try {
    size_t pos = 0;
    int64_t v = std::stoll(e->raw, &pos);
    if (pos != e->raw.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': not an integer: '" + e->raw + "'");
  }
}

double TomlTable::get_double(const std::string& key, double fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  if (e->quoted) throw std::invalid_argument("config key '" + key + "' is not a number");
  try {
    size_t pos = 0;
    double v = std::stod(e->raw, &pos);
    if (pos != e->raw.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': not a number: '" + e->raw + "'");
  }
}

bool TomlTable::get_bool(const std::string& key, bool fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  if (e->raw == "true") return true;
  if (e->raw == "false") return false;
  throw std::invalid_argument("config key '" + key + "': not a boolean: '" + e->raw + "'");
}

TomlTable parse_toml(const std::string& text, const std::string& origin) {
  TomlTable table;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, lineno, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_key(section)) fail(origin, lineno, "invalid section name '" + section + "'");
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) fail(origin, lineno, "expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!valid_key(key)) fail(origin, lineno, "invalid key '" + key + "'");
    if (value.empty()) fail(origin, lineno, "missing value for '" + key + "'");
    std::string full = section.empty() ? key : section + "." + key;
    if (table.has(full)) fail(origin, lineno, "duplicate key '" + full + "'");
    if (value.front() == '"') {
      if (value.size() < 2 || value.back() != '"')
        fail(origin, lineno, "unterminated string for '" + key + "'");
      table.set(full, value.substr(1, value.size() - 2), true);
    } else if (value.front() == '[') {
      fail(origin, lineno, "arrays are not supported");
    } else {
      table.set(full, value, false);
    }
  }
  return table;
}

TomlTable parse_toml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw std::invalid_argument("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_toml(buf.str(), path);
}

}  // namespace celltop
