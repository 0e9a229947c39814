#include "fpf/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fpf/errors.hpp"

namespace fpf {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void MetricTable::add_row(std::vector<double> row) {
  rows.push_back(std::move(row));
}

void MetricTable::add_row(std::string label, std::vector<double> row) {
  row_labels.push_back(std::move(label));
  rows.push_back(std::move(row));
}

void MetricTable::check() const {
  if (!row_labels.empty() && row_labels.size() != rows.size()) {
    throw numeric_error("MetricTable '" + name + "': label/row count mismatch");
  }
  for (const auto& row : rows) {
    if (row.size() != columns.size()) {
      throw numeric_error("MetricTable '" + name + "': ragged row");
    }
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw numeric_error("MetricTable '" + name + "': non-finite cell");
      }
    }
  }
}

void ExperimentReport::echo(const std::string& key, const std::string& value) {
  config_echo.emplace_back(key, value);
}

const MetricTable* ExperimentReport::find_table(const std::string& name) const {
  for (const auto& t : tables) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::string ExperimentReport::to_json() const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["seed"] = seed;
  j["deterministic"] = deterministic;
  nlohmann::json echo = nlohmann::json::object();
  for (const auto& [k, v] : config_echo) echo[k] = v;
  j["config"] = std::move(echo);
  nlohmann::json jt = nlohmann::json::object();
  for (const auto& t : tables) {
    t.check();
    nlohmann::json entry;
    entry["columns"] = t.columns;
    if (!t.row_labels.empty()) entry["row_labels"] = t.row_labels;
    entry["rows"] = t.rows;
    jt[t.name] = std::move(entry);
  }
  j["tables"] = std::move(jt);
  return j.dump(2);
}

void ExperimentReport::write(const std::filesystem::path& out_dir) const {
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> comments;
  comments.push_back("experiment=" + experiment);
  comments.push_back("seed=" + std::to_string(seed));
  comments.push_back(std::string("deterministic=") + (deterministic ? "1" : "0"));
  for (const auto& [k, v] : config_echo) comments.push_back(k + "=" + v);

  {
    const auto path = out_dir / (experiment + "_report.json");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << to_json() << "\n";
  }
  for (const auto& t : tables) {
    write_csv(out_dir / (t.name + ".csv"), t, comments);
  }
}

void write_csv(const std::filesystem::path& path, const MetricTable& table,
               const std::vector<std::string>& comment_lines) {
  table.check();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  for (const auto& line : comment_lines) out << "# " << line << "\n";
  const bool labeled = !table.row_labels.empty();
  if (labeled) out << "label,";
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    out << table.columns[c] << (c + 1 < table.columns.size() ? "," : "");
  }
  out << "\n";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (labeled) out << table.row_labels[r] << ",";
    for (std::size_t c = 0; c < table.rows[r].size(); ++c) {
      out << format_double(table.rows[r][c])
          << (c + 1 < table.rows[r].size() ? "," : "");
    }
    out << "\n";
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

MetricTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  MetricTable table;
  table.name = path.stem().string();
  std::string line;
  bool header_seen = false;
  bool labeled = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_csv_line(line);
    if (!header_seen) {
      header_seen = true;
      labeled = !fields.empty() && fields[0] == "label";
      table.columns.assign(fields.begin() + (labeled ? 1 : 0), fields.end());
      continue;
    }
    std::vector<double> row;
    std::size_t start = 0;
    if (labeled) {
      table.row_labels.push_back(fields[0]);
      start = 1;
    }
    for (std::size_t c = start; c < fields.size(); ++c) {
      char* end = nullptr;
      row.push_back(std::strtod(fields[c].c_str(), &end));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace fpf
