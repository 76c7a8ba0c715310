#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace repdyn {

// Flat key=value configuration with [section] headers. Keys are addressed as
// "section.key" ("key" alone before any section header). '#' starts a
// comment. Parse errors carry file and line diagnostics.
class Config {
 public:
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_uint64(const std::string& key,
                           std::uint64_t fallback) const;

 private:
  std::map<std::string, std::string> values_;
};

Config parse_config_text(const std::string& text, const std::string& origin);
Config load_config(const std::string& path);

}  // namespace repdyn
