#pragma once

// Plain-text data files: CSV tables preceded by "# key=value" metadata lines,
// and pretty-printed JSON.

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lgle/errors.hpp"

namespace lgle {

// Shortest form with 17 significant digits; "inf"/"-inf" for infinities.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') throw DomainError("cannot parse number '" + s + "'");
  return v;
}

struct CsvTable {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return c;
    throw DomainError("CSV: missing column '" + name + "'");
  }

  const std::string* find_meta(const std::string& key) const {
    for (const auto& [k, v] : meta)
      if (k == key) return &v;
    return nullptr;
  }
};

inline void write_csv(const std::string& path, const CsvTable& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ResourceError("cannot open '" + path + "' for writing");
  for (const auto& [k, v] : t.meta) out << "# " << k << '=' << v << '\n';
  for (std::size_t c = 0; c < t.header.size(); ++c) out << (c ? "," : "") << t.header[c];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
  if (!out) throw ResourceError("write to '" + path + "' failed");
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open '" + path + "' for reading");
  CsvTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw DomainError("CSV: malformed metadata line '" + line + "'");
      t.meta.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) throw DomainError("CSV: row width does not match header");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c));
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw DomainError("CSV: no header row in '" + path + "'");
  return t;
}

inline void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ResourceError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw ResourceError("write to '" + path + "' failed");
}

}  // namespace lgle
