// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "srif/errors.hpp"

namespace srif::io {

/// Shortest decimal form that round-trips a double (17 significant digits).
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

/// Flat numeric table with key/value metadata. The on-disk forms are a CSV
/// with '#'-prefixed metadata lines and a JSON mirror carrying the same
/// content; both are deterministic byte-for-byte for identical inputs.
struct Table {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_meta(const std::string& key, const std::string& value) {
    meta.emplace_back(key, value);
  }
  void add_meta(const std::string& key, double value) {
    meta.emplace_back(key, format_double(value));
  }
  void add_row(std::vector<double> row) {
    if (row.size() != columns.size())
      throw DimensionError("Table: row width != column count");
    rows.push_back(std::move(row));
  }
};

inline void write_csv(const Table& table, std::ostream& os) {
  for (const auto& [key, value] : table.meta)
    os << "# " << key << " = " << value << "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    os << (i ? "," : "") << table.columns[i];
  os << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << format_double(row[i]);
    os << "\n";
  }
}

inline void write_json(const Table& table, std::ostream& os) {
  nlohmann::ordered_json doc;
  doc["meta"] = nlohmann::ordered_json::object();
  for (const auto& [key, value] : table.meta) doc["meta"][key] = value;
  doc["columns"] = table.columns;
  doc["rows"] = table.rows;
  os << doc.dump(2) << "\n";
}

inline std::string to_csv(const Table& table) {
  std::ostringstream os;
  write_csv(table, os);
  return os.str();
}

/// Parses the CSV form written by write_csv.
inline Table read_csv(std::istream& is) {
  Table table;
  std::string line;
  bool header_done = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find(" = ");
      if (eq != std::string::npos)
        table.add_meta(line.substr(2, eq - 2), line.substr(eq + 3));
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!header_done) {
      table.columns = cells;
      header_done = true;
      continue;
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(std::stod(c));
    table.add_row(std::move(row));
  }
  return table;
}

inline Table read_json(std::istream& is) {
  const auto doc = nlohmann::json::parse(is);
  Table table;
  for (const auto& [key, value] : doc.at("meta").items())
    table.add_meta(key, value.get<std::string>());
  table.columns = doc.at("columns").get<std::vector<std::string>>();
  for (const auto& row : doc.at("rows"))
    table.add_row(row.get<std::vector<double>>());
  return table;
}

/// 16-bit portable graymap, rescaled to the matrix min/max.
inline void write_pgm(const Eigen::MatrixXd& image, std::ostream& os) {
  const double lo = image.minCoeff();
  const double hi = image.maxCoeff();
  const double span = hi > lo ? hi - lo : 1.0;
  os << "P2\n" << image.cols() << " " << image.rows() << "\n65535\n";
  for (Eigen::Index i = 0; i < image.rows(); ++i) {
    for (Eigen::Index j = 0; j < image.cols(); ++j) {
      const int v =
          static_cast<int>(65535.0 * (image(i, j) - lo) / span + 0.5);
      os << v << (j + 1 < image.cols() ? " " : "");
    }
    os << "\n";
  }
}

/// CSV matrix dump (no metadata; plain rows).
inline void write_matrix_csv(const Eigen::MatrixXd& m, std::ostream& os) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      os << (j ? "," : "") << format_double(m(i, j));
    os << "\n";
  }
}

}  // namespace srif::io
