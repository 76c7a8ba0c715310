#include "csv.hpp"

#include <cerrno>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "repdyn/matrix_io.hpp"

namespace repdyn {

CsvWriter::CsvWriter(std::vector<std::string> columns)
    : n_columns_(columns.size()) {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out_ += ',';
    out_ += columns[i];
  }
  out_ += '\n';
}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != n_columns_)
    throw std::invalid_argument("csv row has " + std::to_string(cells.size()) +
                                " cells, expected " +
                                std::to_string(n_columns_));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ += ',';
    out_ += cells[i];
  }
  out_ += '\n';
}

std::string csv_cell(double x) { return format_double(x); }

std::string csv_cell(long x) { return std::to_string(x); }

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  throw std::invalid_argument("csv: no column named '" + name + "'");
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        cells.push_back(line.substr(start));
        break;
      }
      cells.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (header) {
      table.columns = std::move(cells);
      header = false;
    } else {
      if (cells.size() != table.columns.size())
        throw std::invalid_argument("csv: ragged row '" + line + "'");
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

double csv_double(const std::string& cell) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0')
    throw std::invalid_argument("csv: malformed number '" + cell + "'");
  return v;
}

}  // namespace repdyn
