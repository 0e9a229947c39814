#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace fpf {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

/// A named table of doubles with optional row labels (written as a leading
/// "label" column).  Every cell must be finite.
struct MetricTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::string> row_labels;  // empty or one per row
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  void add_row(std::string label, std::vector<double> row);
  void check() const;  // throws numeric_error on NaN/Inf or ragged rows
};

/// Experiment output: configuration echo, environment stamp, and metric
/// tables.  Serialized as one JSON summary plus one CSV per table; CSVs
/// carry the echo as leading '#' comment lines.
struct ExperimentReport {
  std::string experiment;
  std::vector<std::pair<std::string, std::string>> config_echo;
  std::uint64_t seed = 0;
  bool deterministic = false;
  std::vector<MetricTable> tables;

  void echo(const std::string& key, const std::string& value);
  const MetricTable* find_table(const std::string& name) const;

  std::string to_json() const;
  /// Writes <experiment>_report.json and one <table name>.csv per table.
  void write(const std::filesystem::path& out_dir) const;
};

void write_csv(const std::filesystem::path& path, const MetricTable& table,
               const std::vector<std::string>& comment_lines = {});
/// Reads a CSV produced by write_csv ('#' comments skipped).
MetricTable read_csv(const std::filesystem::path& path);

}  // namespace fpf
