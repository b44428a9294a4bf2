#pragma once

// Flat `key = value` run configuration. Blank lines and anything after '#'
// are ignored; keys are case-sensitive and must be known.

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ghzpur::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every accepted key with a one-line description, in canonical order.
const std::map<std::string_view, std::string_view>& known_keys();

class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig parse_file(const std::string& path);

  // Throws ConfigError for unknown keys.
  void set(std::string_view key, std::string value);
  bool has(std::string_view key) const;
  std::optional<std::string> get(std::string_view key) const;

  // Other's entries win.
  void merge(const KeyValueConfig& other);

  // Sorted `key = value` lines.
  std::string serialize() const;

  std::optional<double> get_double(std::string_view key) const;
  std::optional<long long> get_int(std::string_view key) const;
  std::optional<unsigned long long> get_u64(std::string_view key) const;
  std::optional<bool> get_bool(std::string_view key) const;

  const std::map<std::string, std::string, std::less<>>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string, std::less<>> entries_;
};

}  // namespace ghzpur::cli
