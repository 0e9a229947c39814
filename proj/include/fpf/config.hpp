#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace fpf {

/// Plain key=value configuration: one entry per line, '#' starts a comment,
/// surrounding whitespace is trimmed.  Every key must be consumed by a
/// typed getter; leftover keys are a config_error (no silent drift).  The
/// getters record the resolved value (default or explicit) for the report
/// echo.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;
  static KeyValueConfig parse_file(const std::filesystem::path& path);
  static KeyValueConfig parse_string(const std::string& text);

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback);
  std::string require_string(const std::string& key);
  double get_double(const std::string& key, double fallback);
  std::int64_t get_int(const std::string& key, std::int64_t fallback);
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::vector<double> get_double_list(const std::string& key,
                                      std::vector<double> fallback);
  std::vector<std::int64_t> get_int_list(const std::string& key,
                                         std::vector<std::int64_t> fallback);

  /// Throws config_error listing any keys no getter consumed.
  void require_all_consumed() const;

  /// Resolved key=value pairs in first-access order.
  const std::vector<std::pair<std::string, std::string>>& echo() const {
    return echo_;
  }

 private:
  std::string take(const std::string& key, const std::string& fallback,
                   bool required);
  void record(const std::string& key, const std::string& value);

  std::map<std::string, std::string> entries_;
  std::map<std::string, bool> consumed_;
  std::vector<std::pair<std::string, std::string>> echo_;
};

}  // namespace fpf
