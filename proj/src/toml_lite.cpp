#include "tsr/toml_lite.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "tsr/error.hpp"

namespace tsr {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

TomlLite::Value parse_scalar(const std::string& raw, int line_no) {
  std::string v = trim(raw);
  if (v.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') {
      throw ConfigError("config line " + std::to_string(line_no) + ": unterminated string");
    }
    return v.substr(1, v.size() - 2);
  }
  if (v == "true") return true;
  if (v == "false") return false;
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos == v.size()) return d;
  } catch (...) {
  }
  throw ConfigError("config line " + std::to_string(line_no) + ": cannot parse value '" + v +
                    "' (strings need quotes)");
}

TomlLite::Value parse_array(const std::string& raw, int line_no) {
  std::string inner = trim(raw);
  inner = trim(inner.substr(1, inner.size() - 2));
  std::vector<TomlLite::Value> items;
  if (!inner.empty()) {
    std::string cur;
    bool in_string = false;
    for (char c : inner) {
      if (c == '"') in_string = !in_string;
      if (c == ',' && !in_string) {
        items.push_back(parse_scalar(cur, line_no));
        cur.clear();
      } else {
        cur += c;
      }
    }
    items.push_back(parse_scalar(cur, line_no));
  }
  bool all_strings = true, all_numbers = true;
  for (const auto& item : items) {
    all_strings = all_strings && std::holds_alternative<std::string>(item);
    all_numbers = all_numbers && std::holds_alternative<double>(item);
  }
  if (all_strings) {
    std::vector<std::string> out;
    for (auto& item : items) out.push_back(std::get<std::string>(item));
    return out;
  }
  if (all_numbers) {
    std::vector<double> out;
    for (auto& item : items) out.push_back(std::get<double>(item));
    return out;
  }
  throw ConfigError("config line " + std::to_string(line_no) + ": mixed-type array");
}

}  // namespace

TomlLite TomlLite::parse(const std::string& text) {
  TomlLite out;
  std::istringstream in(text);
  std::string raw_line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw_line)) {
    ++line_no;
    std::string line = trim(strip_comment(raw_line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("config line " + std::to_string(line_no) + ": unterminated section");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw ConfigError("config line " + std::to_string(line_no) + ": empty section name");
      }
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    }
    std::string full_key = section.empty() ? key : section + "." + key;
    if (out.values_.count(full_key)) {
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" +
                        full_key + "'");
    }
    if (!value.empty() && value.front() == '[') {
      if (value.back() != ']') {
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": arrays must close on the same line");
      }
      out.values_[full_key] = parse_array(value, line_no);
    } else {
      out.values_[full_key] = parse_scalar(value, line_no);
    }
  }
  return out;
}

TomlLite TomlLite::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::optional<std::string> TomlLite::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
  throw ConfigError("config key '" + key + "' must be a string");
}

std::optional<double> TomlLite::get_number(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* d = std::get_if<double>(&it->second)) return *d;
  throw ConfigError("config key '" + key + "' must be a number");
}

std::optional<bool> TomlLite::get_bool(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* b = std::get_if<bool>(&it->second)) return *b;
  throw ConfigError("config key '" + key + "' must be a boolean");
}

std::optional<std::vector<std::string>> TomlLite::get_string_array(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* a = std::get_if<std::vector<std::string>>(&it->second)) return *a;
  if (const auto* s = std::get_if<std::string>(&it->second)) {
    return std::vector<std::string>{*s};
  }
  throw ConfigError("config key '" + key + "' must be a string array");
}

std::string TomlLite::require_string(const std::string& key) const {
  auto v = get_string(key);
  if (!v) throw ConfigError("config key '" + key + "' is required");
  return *v;
}

double TomlLite::require_number(const std::string& key) const {
  auto v = get_number(key);
  if (!v) throw ConfigError("config key '" + key + "' is required");
  return *v;
}

}  // namespace tsr
