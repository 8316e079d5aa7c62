#include "expdes/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace expdes {
namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument(path + ": " + what);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // data rows, trimmed cells
  std::vector<int> line_numbers;               // 1-based file lines of the rows
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open file");
  CsvTable t;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv(line);
    for (auto& c : cells) c = trim(c);
    if (t.header.empty()) {
      t.header = std::move(cells);
    } else {
      t.rows.push_back(std::move(cells));
      t.line_numbers.push_back(line_no);
    }
  }
  if (t.header.empty()) fail(path, "missing header row");
  return t;
}

void require_header(const CsvTable& t, const std::string& path,
                    const std::vector<std::string>& expected) {
  if (t.header.size() < expected.size())
    fail(path, "header row 1: expected columns starting with '" + expected[0] + "'");
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (t.header[i] != expected[i])
      fail(path, "header row 1 column " + std::to_string(i + 1) + ": expected '" + expected[i] +
                     "', found '" + t.header[i] + "'");
  }
  if (t.header.size() != expected.size())
    fail(path, "header row 1: unexpected extra column '" + t.header[expected.size()] + "'");
}

double parse_number(const CsvTable& t, const std::string& path, std::size_t row, std::size_t col) {
  const std::string& cell = t.rows[row][col];
  const std::string where =
      "row " + std::to_string(t.line_numbers[row]) + " column " + std::to_string(col + 1);
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &pos);
  } catch (const std::exception&) {
    fail(path, where + ": non-numeric cell '" + cell + "'");
  }
  if (pos != cell.size() || !std::isfinite(v))
    fail(path, where + ": non-numeric cell '" + cell + "'");
  return v;
}

long long parse_int(const CsvTable& t, const std::string& path, std::size_t row, std::size_t col) {
  const std::string& cell = t.rows[row][col];
  const std::string where =
      "row " + std::to_string(t.line_numbers[row]) + " column " + std::to_string(col + 1);
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(cell, &pos);
  } catch (const std::exception&) {
    fail(path, where + ": non-integer cell '" + cell + "'");
  }
  if (pos != cell.size()) fail(path, where + ": non-integer cell '" + cell + "'");
  return v;
}

void require_width(const CsvTable& t, const std::string& path, std::size_t row) {
  if (t.rows[row].size() != t.header.size())
    fail(path, "row " + std::to_string(t.line_numbers[row]) + ": expected " +
                   std::to_string(t.header.size()) + " cells, found " +
                   std::to_string(t.rows[row].size()));
}

// Sorted unique unit ids mapped to their data row, with duplicates rejected.
std::map<long long, std::size_t> unit_index(const CsvTable& t, const std::string& path) {
  std::map<long long, std::size_t> by_unit;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    require_width(t, path, r);
    const long long unit = parse_int(t, path, r, 0);
    if (!by_unit.emplace(unit, r).second)
      fail(path, "row " + std::to_string(t.line_numbers[r]) + ": duplicate unit " +
                     std::to_string(unit));
  }
  if (by_unit.empty()) fail(path, "no data rows");
  return by_unit;
}

}  // namespace

CovariateMatrix parse_covariates(const std::string& path) {
  const CsvTable t = read_csv(path);
  if (t.header.empty() || t.header[0] != "unit" || t.header.size() < 2)
    fail(path, "header row 1: expected 'unit,x1,...,xd'");
  std::vector<std::string> expected{"unit"};
  for (std::size_t i = 1; i < t.header.size(); ++i) expected.push_back("x" + std::to_string(i));
  require_header(t, path, expected);
  const auto by_unit = unit_index(t, path);
  const int d = static_cast<int>(t.header.size()) - 1;
  Mat x(by_unit.size(), d);
  int out_row = 0;
  for (const auto& [unit, r] : by_unit) {
    for (int c = 0; c < d; ++c) x(out_row, c) = parse_number(t, path, r, c + 1);
    ++out_row;
  }
  std::vector<std::string> labels(expected.begin() + 1, expected.end());
  return CovariateMatrix(std::move(x), std::move(labels));
}

PanelData parse_panel(const std::string& path, int t0) {
  const CsvTable t = read_csv(path);
  require_header(t, path, {"unit", "period", "outcome"});
  std::map<long long, std::map<long long, double>> grid;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    require_width(t, path, r);
    const long long unit = parse_int(t, path, r, 0);
    const long long period = parse_int(t, path, r, 1);
    const double y = parse_number(t, path, r, 2);
    if (!grid[unit].emplace(period, y).second)
      fail(path, "row " + std::to_string(t.line_numbers[r]) + ": duplicate cell (unit " +
                     std::to_string(unit) + ", period " + std::to_string(period) + ")");
  }
  if (grid.empty()) fail(path, "no data rows");
  // Periods must form the same 1..T set for every unit.
  const auto& first_periods = grid.begin()->second;
  const int periods = static_cast<int>(first_periods.size());
  for (const auto& [unit, row] : grid) {
    for (long long p = 1; p <= periods; ++p) {
      if (!row.count(p))
        fail(path, "incomplete grid: missing (unit " + std::to_string(unit) + ", period " +
                       std::to_string(p) + ")");
    }
    if (static_cast<int>(row.size()) != periods)
      fail(path, "incomplete grid: unit " + std::to_string(unit) + " has " +
                     std::to_string(row.size()) + " periods, expected " + std::to_string(periods));
  }
  if (t0 >= periods) fail(path, "T0 must be < T");
  Mat y(grid.size(), periods);
  int out_row = 0;
  for (const auto& [unit, row] : grid) {
    int c = 0;
    for (const auto& [period, v] : row) y(out_row, c++) = v;
    ++out_row;
  }
  return PanelData(std::move(y), t0);
}

ScienceTable parse_science_table(const std::string& path) {
  const CsvTable t = read_csv(path);
  require_header(t, path, {"unit", "y1", "y0"});
  const auto by_unit = unit_index(t, path);
  Vec y1(by_unit.size()), y0(by_unit.size());
  int out_row = 0;
  for (const auto& [unit, r] : by_unit) {
    y1[out_row] = parse_number(t, path, r, 1);
    y0[out_row] = parse_number(t, path, r, 2);
    ++out_row;
  }
  return ScienceTable(std::move(y1), std::move(y0));
}

std::pair<Vec, AssignmentVector> parse_observed(const std::string& path) {
  const CsvTable t = read_csv(path);
  require_header(t, path, {"unit", "y", "w"});
  const auto by_unit = unit_index(t, path);
  Vec y(by_unit.size());
  std::vector<std::uint8_t> w(by_unit.size());
  int out_row = 0;
  for (const auto& [unit, r] : by_unit) {
    y[out_row] = parse_number(t, path, r, 1);
    const long long wi = parse_int(t, path, r, 2);
    if (wi != 0 && wi != 1)
      fail(path, "row " + std::to_string(t.line_numbers[r]) + " column 3: w must be 0 or 1");
    w[out_row] = static_cast<std::uint8_t>(wi);
    ++out_row;
  }
  return {std::move(y), AssignmentVector(std::move(w))};
}

}  // namespace expdes
