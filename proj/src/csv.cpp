#include "agginc/csv.hpp"

#include "agginc/error.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace agginc {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& cell, std::size_t line_no) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  if (!cell.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (cell.empty() || ec != std::errc() || ptr != end) {
    throw InputError("line " + std::to_string(line_no) + ": '" + cell + "' is not a number");
  }
  return value;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    table.header = split_line(trim(line));
    break;
  }
  if (table.header.empty()) throw InputError("CSV input is empty (no header row)");

  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto cells = split_line(t);
    if (cells.size() != table.header.size()) {
      throw InputError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(table.header.size()) + " columns, found " +
                       std::to_string(cells.size()));
    }
    std::vector<double> values;
    values.reserve(cells.size());
    for (const auto& c : cells) values.push_back(parse_number(c, line_no));
    table.rows.push_back(std::move(values));
  }
  return table;
}

SampleMatrix read_sample_csv(std::istream& in) {
  const CsvTable table = read_csv(in);
  if (table.rows.empty()) throw InputError("CSV contains no samples");
  SampleMatrix m(static_cast<Eigen::Index>(table.rows.size()),
                 static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = table.rows[i][j];
    }
  }
  return m;
}

SampleMatrix read_sample_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open data file '" + path + "'");
  try {
    return read_sample_csv(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw IoError("failed to format number");
  return std::string(buf, ptr);
}

void write_sample_csv(const SampleMatrix& samples, std::ostream& out,
                      const std::vector<std::string>& header) {
  const auto cols = samples.cols();
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (j > 0) out << ',';
    if (static_cast<std::size_t>(j) < header.size()) {
      out << header[static_cast<std::size_t>(j)];
    } else {
      out << 'x' << j;
    }
  }
  out << '\n';
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (j > 0) out << ',';
      out << format_double(samples(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing CSV output");
}

}  // namespace agginc
