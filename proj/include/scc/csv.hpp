#ifndef SCC_CSV_HPP
#define SCC_CSV_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace scc {

// Deterministic CSV table writer: %.10g number formatting, LF endings,
// byte-identical output for identical inputs.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(const std::vector<double>& values);
  void add_row(const std::vector<std::string>& cells);
  void write(std::ostream& os) const;
  void write_file(const std::string& path) const;

  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string format_number(double value);

// Reads a numeric CSV with an optional header line; returns columns.
std::vector<std::vector<double>> read_numeric_csv(std::istream& is, std::size_t min_columns);

}  // namespace scc

#endif
