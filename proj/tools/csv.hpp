#pragma once

#include <string>
#include <vector>

namespace repdyn {

// Minimal CSV assembly/parsing for the experiment outputs. Cells never
// contain commas or quotes (numbers and short tags only), so no quoting
// rules are needed. Floats go through format_double (17 significant digits).
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns);
  void add_row(const std::vector<std::string>& cells);
  const std::string& str() const { return out_; }

 private:
  std::size_t n_columns_;
  std::string out_;
};

std::string csv_cell(double x);
std::string csv_cell(long x);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // throws on unknown name
};

CsvTable parse_csv(const std::string& text);

// strtod with "nan" support; throws on malformed cells.
double csv_double(const std::string& cell);

}  // namespace repdyn
