#pragma once

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "metrolab/errors.hpp"
#include "metrolab/lab/table.hpp"

namespace metrolab::lab {

inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_real(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return csv_escape(std::get<std::string>(c));
}

inline std::string to_csv(const ResultTable& t) {
  std::ostringstream os;
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_escape(t.columns[i].name);
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_cell(row[i]);
    os << '\n';
  }
  return os.str();
}

inline nlohmann::json to_json(const ResultTable& t) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : t.columns) {
    cols.push_back({{"name", c.name},
                    {"type", c.type == ColumnType::integer ? "integer" : c.type == ColumnType::real ? "real" : "text"}});
  }
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& c : row) {
      // 12 significant digits, same rendering as the CSV.
      if (const auto* d = std::get_if<double>(&c)) r.push_back(std::stod(format_real(*d)));
      else if (const auto* i = std::get_if<std::int64_t>(&c)) r.push_back(*i);
      else r.push_back(std::get<std::string>(c));
    }
    rows.push_back(std::move(r));
  }
  return {{"metadata", t.metadata}, {"columns", cols}, {"rows", rows}};
}

// Parses a CSV written by to_csv; numeric-looking cells become doubles.
inline ResultTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      rec.push_back(field);
      field.clear();
    } else if (c == '\n') {
      rec.push_back(field);
      field.clear();
      records.push_back(rec);
      rec.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (!field.empty() || !rec.empty()) {
    rec.push_back(field);
    records.push_back(rec);
  }
  if (records.empty()) throw ConfigError("parse_csv: empty input");
  ResultTable t;
  std::vector<bool> numeric(records[0].size(), true);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != records[0].size()) throw ConfigError("parse_csv: ragged row " + std::to_string(r));
    for (std::size_t i = 0; i < records[r].size(); ++i) {
      char* end = nullptr;
      std::strtod(records[r][i].c_str(), &end);
      if (records[r][i].empty() || *end != '\0') numeric[i] = false;
    }
  }
  for (std::size_t i = 0; i < records[0].size(); ++i)
    t.columns.push_back({records[0][i], numeric[i] ? ColumnType::real : ColumnType::text});
  for (std::size_t r = 1; r < records.size(); ++r) {
    std::vector<Cell> row;
    for (std::size_t i = 0; i < records[r].size(); ++i) {
      if (numeric[i]) row.emplace_back(std::strtod(records[r][i].c_str(), nullptr));
      else row.emplace_back(records[r][i]);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot open '" + p.string() + "' for writing");
  f << content;
  if (!f) throw Error("write failed for '" + p.string() + "'");
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

struct EmittedFiles {
  std::filesystem::path csv;
  std::filesystem::path manifest;
};

// Writes <scenario>_<timestamp>.csv and the matching .json manifest into dir.
inline EmittedFiles emit(const ResultTable& t, const std::filesystem::path& dir, const std::string& scenario,
                         const std::string& stamp = utc_timestamp()) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
  std::string base = scenario + "_" + stamp;
  for (int k = 1; std::filesystem::exists(dir / (base + ".csv")); ++k) base = scenario + "_" + stamp + "_" + std::to_string(k);
  EmittedFiles out{dir / (base + ".csv"), dir / (base + ".json")};
  write_file(out.csv, to_csv(t));
  write_file(out.manifest, to_json(t).dump(2) + "\n");
  return out;
}

}  // namespace metrolab::lab
