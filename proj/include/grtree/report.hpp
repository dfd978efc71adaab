#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace grtree {

using Cell = std::variant<std::int64_t, double, std::string>;

// Tabular experiment output. Serialized as CSV preceded by one JSON metadata
// line ("# {...}"). meta carries the generating config plus an optional
// "plot" object ({"x": col, "y": col, "series": [cols], "ci": [lo_col, hi_col]})
// that drives the long-format rendering.
struct Table {
  std::string name;
  std::string meta_json = "{}";
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> cells);
  std::size_t column_index(const std::string& name) const;  // throws if absent
};

std::string format_cell(const Cell& c);

void write_table_csv(const Table& t, std::ostream& out);
Table read_table_csv(std::istream& in, const std::string& name);

// Rearranges a table into plot-ready (x, y, series, ci_lo, ci_hi) rows using
// its meta "plot" hints; series labels are the joined values of the series
// columns.
Table long_format(const Table& t);

// FNV-1a 64-bit content hash, hex string; stable across runs and platforms.
std::string content_hash(const std::string& bytes);
std::string file_hash(const std::string& path);

struct Manifest {
  std::string command;
  std::string config_json = "{}";
  std::vector<std::pair<std::string, std::string>> outputs;  // (file name, content hash)
  double wall_time_s = 0.0;
  std::string status = "ok";
};

std::string manifest_json(const Manifest& m);

}  // namespace grtree
