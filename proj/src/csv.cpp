#include "phonon/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace phonon {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, std::vector<std::string> header)
    : path_(path), out_(path), columns_(header.size()) {
  if (!out_) throw IoError("cannot open " + path + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(std::initializer_list<double> values) {
  row(std::span<const double>(values.begin(), values.size()));
}

void CsvWriter::row(std::span<const double> values) {
  if (values.size() != columns_) throw IoError("csv row width mismatch in " + path_);
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
  out_ << '\n';
  if (!out_) throw IoError("write failed for " + path_);
}

std::size_t CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw IoError("csv has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty csv " + path);
  table.header = split(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw IoError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(table.header.size()) +
                    " columns");
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      if (c == "nan") {
        row.push_back(std::nan(""));
        continue;
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || ptr != c.data() + c.size()) {
        throw IoError(path + ":" + std::to_string(lineno) + ": not a number: '" + c + "'");
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace phonon
