#include "zicopula/dataset_io.hpp"

#include "zicopula/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace zicopula {

namespace {

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  std::string t = s.substr(b, e - b + 1);
  if (t.size() >= 2 && t.front() == '"' && t.back() == '"')
    t = t.substr(1, t.size() - 2);
  return t;
}

bool parse_number(const std::string& field, double& out)
{
  if (field.empty())
    return false;
  const char* first = field.data();
  const char* last = first + field.size();
  if (*first == '+')
    ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

} // namespace

std::vector<std::string> split_csv_line(const std::string& line)
{
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ','))
    out.push_back(trim(field));
  if (!line.empty() && line.back() == ',')
    out.emplace_back();
  return out;
}

Dataset parse_csv(std::istream& in, bool clip_negatives, const std::string& source)
{
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty())
      break;
  }
  if (line_no == 0 || trim(line).empty())
    throw DataError(source + ": empty file (a header row is required)");
  ds.header = split_csv_line(line);
  double probe = 0.0;
  if (std::all_of(ds.header.begin(), ds.header.end(), [&](const std::string& h) { return parse_number(h, probe); }))
    throw DataError(source + ": line " + std::to_string(line_no) + ": header row is missing");
  const std::size_t d = ds.header.size();

  std::vector<double> flat;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty())
      continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != d)
      throw DataError(source + ": line " + std::to_string(line_no) + ": expected " + std::to_string(d) +
                      " fields, found " + std::to_string(fields.size()));
    for (std::size_t j = 0; j < d; ++j) {
      double v = 0.0;
      if (!parse_number(fields[j], v))
        throw DataError(source + ": line " + std::to_string(line_no) + ": field " + std::to_string(j + 1) +
                        " is not a finite number: '" + fields[j] + "'");
      if (v < 0.0) {
        if (!clip_negatives)
          throw DataError(source + ": line " + std::to_string(line_no) + ": negative value " + fields[j] +
                          " (use --clip-negatives to replace negatives by 0)");
        v = 0.0;
        ++ds.clipped;
      }
      flat.push_back(v == 0.0 ? 0.0 : v);
    }
    ++rows;
  }
  ds.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
    flat.data(), static_cast<Index>(rows), static_cast<Index>(d));
  return ds;
}

Dataset read_csv(const std::string& path, bool clip_negatives)
{
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open '" + path + "'");
  return parse_csv(in, clip_negatives, path);
}

std::string format_double(double x)
{
  if (std::isnan(x))
    return "nan";
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  std::array<char, 400> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::fixed);
  if (ec != std::errc())
    throw NumericError("format_double: conversion failed");
  return std::string(buf.data(), ptr);
}

void write_matrix_csv(std::ostream& out, const Matrix& values)
{
  for (Index j = 0; j < values.cols(); ++j)
    out << (j ? "," : "") << 'x' << j + 1;
  out << '\n';
  for (Index r = 0; r < values.rows(); ++r) {
    for (Index j = 0; j < values.cols(); ++j)
      out << (j ? "," : "") << format_double(values(r, j));
    out << '\n';
  }
}

void write_matrix_csv(const std::string& path, const Matrix& values)
{
  std::ostringstream os;
  write_matrix_csv(os, values);
  write_text_file(path, os.str());
}

void write_text_file(const std::string& path, const std::string& contents)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw DataError("cannot write '" + path + "'");
  out << contents;
  if (!out)
    throw DataError("write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

} // namespace zicopula
