#include "fpf/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fpf/errors.hpp"

namespace fpf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0') {
    throw config_error("config: key '" + key + "': cannot parse '" + value +
                       "' as a number");
  }
  return v;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& value) {
  Int v{};
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw config_error("config: key '" + key + "': cannot parse '" + value +
                       "' as an integer");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_string(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw config_error("config: line " + std::to_string(lineno) +
                         ": expected key=value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw config_error("config: line " + std::to_string(lineno) + ": empty key");
    }
    if (cfg.entries_.count(key)) {
      throw config_error("config: duplicate key '" + key + "'");
    }
    cfg.entries_[key] = value;
    cfg.consumed_[key] = false;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

bool KeyValueConfig::has(const std::string& key) const {
  return entries_.count(key) > 0;
}

void KeyValueConfig::record(const std::string& key, const std::string& value) {
  for (auto& [k, v] : echo_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  echo_.emplace_back(key, value);
}

std::string KeyValueConfig::take(const std::string& key,
                                 const std::string& fallback, bool required) {
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    if (required) throw config_error("config: missing required key '" + key + "'");
    record(key, fallback);
    return fallback;
  }
  consumed_[key] = true;
  record(key, it->second);
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) {
  return take(key, fallback, false);
}

std::string KeyValueConfig::require_string(const std::string& key) {
  return take(key, "", true);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) {
  std::ostringstream os;
  os << fallback;
  const std::string v = take(key, os.str(), false);
  return parse_double(key, v);
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) {
  const std::string v = take(key, std::to_string(fallback), false);
  return parse_int<std::int64_t>(key, v);
}

std::uint64_t KeyValueConfig::get_uint(const std::string& key,
                                       std::uint64_t fallback) {
  const std::string v = take(key, std::to_string(fallback), false);
  return parse_int<std::uint64_t>(key, v);
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) {
  const std::string v = take(key, fallback ? "true" : "false", false);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw config_error("config: key '" + key + "': cannot parse '" + v + "' as a bool");
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key,
                                                    std::vector<double> fallback) {
  if (!has(key)) {
    std::ostringstream os;
    for (std::size_t i = 0; i < fallback.size(); ++i) os << (i ? "," : "") << fallback[i];
    take(key, os.str(), false);
    return fallback;
  }
  const std::string v = take(key, "", false);
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(parse_double(key, item));
  if (out.empty()) throw config_error("config: key '" + key + "': empty list");
  return out;
}

std::vector<std::int64_t> KeyValueConfig::get_int_list(
    const std::string& key, std::vector<std::int64_t> fallback) {
  if (!has(key)) {
    std::ostringstream os;
    for (std::size_t i = 0; i < fallback.size(); ++i) os << (i ? "," : "") << fallback[i];
    take(key, os.str(), false);
    return fallback;
  }
  const std::string v = take(key, "", false);
  std::vector<std::int64_t> out;
  for (const auto& item : split_list(v)) out.push_back(parse_int<std::int64_t>(key, item));
  if (out.empty()) throw config_error("config: key '" + key + "': empty list");
  return out;
}

void KeyValueConfig::require_all_consumed() const {
  std::string unknown;
  for (const auto& [key, used] : consumed_) {
    if (!used) unknown += (unknown.empty() ? "" : ", ") + key;
  }
  if (!unknown.empty()) {
    throw config_error("config: unknown key(s): " + unknown);
  }
}

}  // namespace fpf
