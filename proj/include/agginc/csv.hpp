#pragma once

#include "agginc/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace agginc {

/// Numeric CSV: comma separated, one header row, decimal point.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Throws InputError on ragged rows or non-numeric cells.
CsvTable read_csv(std::istream& in);

SampleMatrix read_sample_csv(std::istream& in);
SampleMatrix read_sample_csv_file(const std::string& path);

/// Header defaults to x0, x1, ...; values are written round-trip exact.
void write_sample_csv(const SampleMatrix& samples, std::ostream& out,
                      const std::vector<std::string>& header = {});

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

}  // namespace agginc
