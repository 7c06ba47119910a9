#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tsr {

// Minimal TOML subset for pipeline configs: [sections], scalar keys
// (string/number/bool) and flat arrays of strings or numbers. Keys are
// flattened to "section.key".
class TomlLite {
 public:
  using Value = std::variant<std::string, double, bool, std::vector<std::string>,
                             std::vector<double>>;

  static TomlLite parse(const std::string& text);
  static TomlLite parse_file(const std::string& path);

  bool contains(const std::string& key) const { return values_.count(key) > 0; }

  // Typed getters; throw ConfigError on type mismatch, return nullopt when absent.
  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<double> get_number(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  std::optional<std::vector<std::string>> get_string_array(const std::string& key) const;

  std::string require_string(const std::string& key) const;
  double require_number(const std::string& key) const;

  const std::map<std::string, Value>& values() const { return values_; }

 private:
  std::map<std::string, Value> values_;
};

}  // namespace tsr
