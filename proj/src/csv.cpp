#include "scc/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace scc {

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

void CsvTable::add_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_number(v));
  add_row(cells);
}

void CsvTable::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != header_.size())
    throw std::invalid_argument("row width does not match header");
  rows_.push_back(cells);
}

void CsvTable::write(std::ostream& os) const {
  for (std::size_t i = 0; i < header_.size(); ++i)
    os << header_[i] << (i + 1 < header_.size() ? "," : "\n");
  for (const auto& row : rows_)
    for (std::size_t i = 0; i < row.size(); ++i)
      os << row[i] << (i + 1 < row.size() ? "," : "\n");
}

void CsvTable::write_file(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write(os);
}

std::vector<std::vector<double>> read_numeric_csv(std::istream& is, std::size_t min_columns) {
  std::vector<std::vector<double>> columns;
  std::string line;
  bool maybe_header = true;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> values;
    std::istringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (used == 0) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (maybe_header) {
        maybe_header = false;
        continue;  // header line
      }
      throw std::runtime_error("non-numeric CSV line: " + line);
    }
    maybe_header = false;
    if (values.size() < min_columns)
      throw std::runtime_error("CSV line has too few columns: " + line);
    if (columns.empty()) columns.resize(values.size());
    if (values.size() != columns.size())
      throw std::runtime_error("ragged CSV row: " + line);
    for (std::size_t i = 0; i < values.size(); ++i) columns[i].push_back(values[i]);
  }
  return columns;
}

}  // namespace scc
