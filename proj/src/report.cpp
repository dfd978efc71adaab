#include "grtree/report.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "grtree/errors.hpp"
#include "json.hpp"

namespace grtree {

void Table::add_row(std::vector<Cell> cells) {
  if (cells.size() != columns.size())
    throw InternalError("row width " + std::to_string(cells.size()) +
                        " != column count " + std::to_string(columns.size()) +
                        " in table " + name);
  rows.push_back(std::move(cells));
}

std::size_t Table::column_index(const std::string& col) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == col) return i;
  throw ConfigError("table " + name + " has no column '" + col + "'");
}

std::string format_cell(const Cell& c) {
  if (std::holds_alternative<std::int64_t>(c))
    return std::to_string(std::get<std::int64_t>(c));
  if (std::holds_alternative<double>(c)) {
    double v = std::get<double>(c);
    // Shortest round-trip representation keeps files diff-able and hashes
    // deterministic.
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw InternalError("double formatting failed");
    return std::string(buf, ptr);
  }
  return std::get<std::string>(c);
}

namespace {

bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\n") != std::string::npos;
}

std::string csv_escape(const std::string& s) {
  if (!needs_quoting(s)) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

Cell parse_cell(const std::string& s) {
  if (s.empty()) return s;
  // Integer first: no decimal point, exponent, inf or nan marker.
  if (s.find_first_of(".eEnN") == std::string::npos || s == "-") {
    std::int64_t iv = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), iv);
    if (ec == std::errc() && p == s.data() + s.size()) return iv;
  }
  double dv = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), dv);
  if (ec == std::errc() && p == s.data() + s.size()) return dv;
  return s;
}

}  // namespace

void write_table_csv(const Table& t, std::ostream& out) {
  // Validate meta early so a malformed table never produces a half-written file.
  auto meta = nlohmann::json::parse(t.meta_json);
  out << "# " << meta.dump() << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(t.columns[i]);
  }
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << csv_escape(format_cell(row[i]));
    }
    out << '\n';
  }
}

Table read_table_csv(std::istream& in, const std::string& name) {
  Table t;
  t.name = name;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty table file: " + name);
  if (line.rfind("# ", 0) == 0) {
    t.meta_json = nlohmann::json::parse(line.substr(2)).dump();
    if (!std::getline(in, line)) throw ConfigError("table missing header row: " + name);
  }
  t.columns = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != t.columns.size())
      throw ConfigError("ragged row in table " + name);
    std::vector<Cell> row;
    row.reserve(fields.size());
    for (auto& f : fields) row.push_back(parse_cell(f));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table long_format(const Table& t) {
  auto meta = nlohmann::json::parse(t.meta_json);
  if (!meta.contains("plot"))
    throw ConfigError("table " + t.name + " has no plot metadata");
  const auto& plot = meta.at("plot");
  std::size_t xi = t.column_index(plot.at("x").get<std::string>());

  std::vector<std::pair<std::string, std::size_t>> ys;
  for (const auto& y : plot.at("y"))
    ys.emplace_back(y.get<std::string>(), t.column_index(y.get<std::string>()));

  std::vector<std::size_t> series_cols;
  if (plot.contains("series"))
    for (const auto& s : plot.at("series"))
      series_cols.push_back(t.column_index(s.get<std::string>()));

  std::size_t ci_lo = SIZE_MAX, ci_hi = SIZE_MAX;
  if (plot.contains("ci")) {
    ci_lo = t.column_index(plot.at("ci").at(0).get<std::string>());
    ci_hi = t.column_index(plot.at("ci").at(1).get<std::string>());
  }

  Table out;
  out.name = t.name + "-long";
  nlohmann::json out_meta{{"source", t.name}};
  out.meta_json = out_meta.dump();
  out.columns = {"x", "y", "series", "ci_lo", "ci_hi"};
  for (const auto& row : t.rows) {
    std::string tag;
    for (std::size_t c : series_cols) {
      if (!tag.empty()) tag += '/';
      tag += format_cell(row[c]);
    }
    for (const auto& [yname, yi] : ys) {
      std::string label = tag.empty() ? yname : (ys.size() > 1 ? tag + '/' + yname : tag);
      Cell lo = ci_lo != SIZE_MAX ? row[ci_lo] : Cell{std::string{}};
      Cell hi = ci_hi != SIZE_MAX ? row[ci_hi] : Cell{std::string{}};
      out.add_row({row[xi], row[yi], label, lo, hi});
    }
  }
  return out;
}

std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InternalError("cannot reopen output for hashing: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return content_hash(ss.str());
}

std::string manifest_json(const Manifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  j["config"] = nlohmann::json::parse(m.config_json);
  j["outputs"] = nlohmann::json::object();
  for (const auto& [file, hash] : m.outputs) j["outputs"][file] = hash;
  j["wall_time_s"] = m.wall_time_s;
  j["status"] = m.status;
  return j.dump(2) + "\n";
}

}  // namespace grtree
