#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace cachedrl {

// Flat key = value configuration with dotted namespaces. Every key must be
// registered; unknown keys are collected and reported together.
class Config {
 public:
  Config();  // registers every known key with its default

  static Config from_file(const std::string& path);
  static Config from_text(const std::string& text);

  bool has(const std::string& key) const;
  const std::string& raw(const std::string& key) const;

  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;       // comma separated
  std::vector<std::uint64_t> get_seeds(const std::string& key) const;  // comma separated

  void set(const std::string& key, const std::string& value);

  // Canonical key=value dump (sorted), used for the manifest hash.
  std::string canonical() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace cachedrl
