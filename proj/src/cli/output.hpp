#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace unravel::cli {

/// Empty cells are written as "" in CSV and null in JSON.
using Cell = std::variant<std::monostate, double, std::int64_t, std::string>;
using Row = std::vector<Cell>;

struct Table {
  std::string command;
  nlohmann::ordered_json config;
  nlohmann::ordered_json units;
  std::vector<std::string> columns;
  std::vector<Row> rows;
  nlohmann::ordered_json report = nlohmann::ordered_json::object();
  std::vector<std::string> warnings;
};

/// RFC 4180 quoting and a header row; records end in '\n'.
void write_csv(std::ostream& os, const Table& t);
/// {command, config, units, columns, rows, report, warnings}.
void write_json(std::ostream& os, const Table& t);
/// Everything except the rows, for the CSV sidecar.
nlohmann::ordered_json metadata(const Table& t);

std::string format_double(double v);

}  // namespace unravel::cli
