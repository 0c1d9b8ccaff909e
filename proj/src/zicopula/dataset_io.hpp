#pragma once

#include "zicopula/stat_core.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace zicopula {

struct Dataset
{
  std::vector<std::string> header;
  Matrix values;
  std::size_t clipped = 0; //!< negatives replaced by 0 while reading
};

//! Comma-separated, header row required, '.' decimal. Negative values are a
//! DataError unless clip_negatives is set.
Dataset parse_csv(std::istream& in, bool clip_negatives, const std::string& source = "input");
Dataset read_csv(const std::string& path, bool clip_negatives);

//! Shortest round-trip decimal (fixed) representation.
std::string format_double(double x);

//! Header x1..xD, one row per line.
void write_matrix_csv(std::ostream& out, const Matrix& values);
void write_matrix_csv(const std::string& path, const Matrix& values);

//! Writes `contents` to path atomically enough for CLI use (truncate + write).
void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

//! Splits one CSV line (no quoting beyond stripping surrounding quotes).
std::vector<std::string> split_csv_line(const std::string& line);

} // namespace zicopula
