#pragma once

// Named-column result tables with a metadata block, serialized as CSV or
// JSON. Doubles are always written with 17 significant digits.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace pacauction::cli {

using Cell = std::variant<std::monostate, bool, std::int64_t, double, std::string>;

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  // Insertion-ordered so output is byte-stable.
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();

  explicit ResultTable(std::vector<std::string> cols = {}) : columns(std::move(cols)) {}

  // Appends a row; cells for missing trailing columns stay empty.
  void add_row(std::vector<Cell> cells) {
    cells.resize(columns.size());
    rows.push_back(std::move(cells));
  }

  std::size_t column_index(const std::string& name) const {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (columns[j] == name) return j;
    }
    throw std::out_of_range("no column named " + name);
  }
};

namespace detail {

inline std::string csv_cell(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string out = "\"";
      for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
      }
      return out + "\"";
    }
  };
  return std::visit(Visitor{}, c);
}

inline std::string json_cell(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return "null"; }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const {
      return std::isfinite(v) ? format_double(v) : "null";
    }
    std::string operator()(const std::string& s) const { return nlohmann::json(s).dump(); }
  };
  return std::visit(Visitor{}, c);
}

}  // namespace detail

// Metadata goes first as "# key=value" comment lines (values as compact JSON).
inline void write_csv(std::ostream& os, const ResultTable& t) {
  for (const auto& [key, value] : t.metadata.items()) {
    os << "# " << key << '=' << value.dump() << '\n';
  }
  for (std::size_t j = 0; j < t.columns.size(); ++j) os << (j ? "," : "") << t.columns[j];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << detail::csv_cell(row[j]);
    os << '\n';
  }
}

inline void write_json(std::ostream& os, const ResultTable& t) {
  os << "{\n  \"metadata\": " << t.metadata.dump() << ",\n  \"columns\": [";
  for (std::size_t j = 0; j < t.columns.size(); ++j) {
    os << (j ? ", " : "") << nlohmann::json(t.columns[j]).dump();
  }
  os << "],\n  \"rows\": [";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    os << (r ? ",\n    [" : "\n    [");
    for (std::size_t j = 0; j < t.rows[r].size(); ++j) {
      os << (j ? ", " : "") << detail::json_cell(t.rows[r][j]);
    }
    os << ']';
  }
  os << (t.rows.empty() ? "]\n}\n" : "\n  ]\n}\n");
}

inline std::string render(const ResultTable& t, const std::string& format) {
  std::ostringstream os;
  if (format == "json") {
    write_json(os, t);
  } else {
    write_csv(os, t);
  }
  return os.str();
}

// 64-bit FNV-1a, used for the config fingerprint in metadata.
inline std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace pacauction::cli
