#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "metrolab/errors.hpp"

namespace metrolab::lab {

enum class ColumnType { integer, real, text };

struct Column {
  std::string name;
  ColumnType type;
};

using Cell = std::variant<std::int64_t, double, std::string>;

struct ResultTable {
  std::vector<Column> columns;
  std::vector<std::vector<Cell>> rows;
  nlohmann::json metadata = nlohmann::json::object();
  // Pairs (value column, bound column) for the violation filter.
  std::vector<std::pair<std::string, std::string>> bound_checks;

  ResultTable() = default;
  explicit ResultTable(std::vector<Column> cols) : columns(std::move(cols)) {}

  std::size_t column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i].name == name) return i;
    throw ContractViolation("ResultTable: no column '" + name + "'");
  }

  void add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) {
      throw ContractViolation("ResultTable: row has " + std::to_string(row.size()) + " cells, expected " +
                              std::to_string(columns.size()));
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      const Column& c = columns[i];
      const bool ok = (c.type == ColumnType::integer && std::holds_alternative<std::int64_t>(row[i])) ||
                      (c.type == ColumnType::real && std::holds_alternative<double>(row[i])) ||
                      (c.type == ColumnType::text && std::holds_alternative<std::string>(row[i]));
      if (!ok) throw ContractViolation("ResultTable: cell type mismatch in column '" + c.name + "'");
      if (c.type == ColumnType::real && !std::isfinite(std::get<double>(row[i]))) {
        throw AccuracyError("ResultTable: non-finite value in column '" + c.name + "'");
      }
    }
    rows.push_back(std::move(row));
  }

  double real(std::size_t row, const std::string& col) const {
    const Cell& c = rows.at(row).at(column_index(col));
    if (const auto* d = std::get_if<double>(&c)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
    throw ContractViolation("ResultTable: column '" + col + "' is text");
  }

  std::string text(std::size_t row, const std::string& col) const {
    return std::get<std::string>(rows.at(row).at(column_index(col)));
  }

  // Largest value - bound over all registered checks.
  double worst_violation() const {
    double worst = -INFINITY;
    for (const auto& [v, b] : bound_checks)
      for (std::size_t r = 0; r < rows.size(); ++r) worst = std::max(worst, real(r, v) - real(r, b));
    return worst;
  }
};

inline Column int_col(std::string n) { return {std::move(n), ColumnType::integer}; }
inline Column real_col(std::string n) { return {std::move(n), ColumnType::real}; }
inline Column text_col(std::string n) { return {std::move(n), ColumnType::text}; }

}  // namespace metrolab::lab
