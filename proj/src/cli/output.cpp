#include "output.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace unravel::cli {

namespace {

std::string quote_csv(const std::string& s) {
  if (s.find_first_of("\",\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  q += '"';
  return q;
}

std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  return "";
}

nlohmann::ordered_json cell_json(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) {
    if (!std::isfinite(*d)) return nullptr;
    return *d;
  }
  if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  return nullptr;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    os << (i ? "," : "") << quote_csv(t.columns[i]);
  }
  os << '\n';
  for (const Row& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << quote_csv(cell_text(r[i]));
    os << '\n';
  }
}

nlohmann::ordered_json metadata(const Table& t) {
  nlohmann::ordered_json j;
  j["command"] = t.command;
  j["config"] = t.config;
  j["units"] = t.units;
  j["columns"] = t.columns;
  j["report"] = t.report;
  j["warnings"] = t.warnings;
  return j;
}

void write_json(std::ostream& os, const Table& t) {
  nlohmann::ordered_json j = metadata(t);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const Row& r : t.rows) {
    nlohmann::ordered_json jr = nlohmann::ordered_json::array();
    for (const Cell& c : r) jr.push_back(cell_json(c));
    rows.push_back(std::move(jr));
  }
  nlohmann::ordered_json out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    out[it.key()] = it.value();
    if (it.key() == "columns") out["rows"] = rows;
  }
  os << out.dump(2) << '\n';
}

}  // namespace unravel::cli
