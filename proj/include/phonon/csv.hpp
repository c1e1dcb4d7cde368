#pragma once

#include <fstream>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace phonon {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numeric CSV writer. Values are printed with 17 significant digits so that
/// a write/read cycle reproduces every double exactly.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::vector<std::string> header);

  void row(std::initializer_list<double> values);
  void row(std::span<const double> values);

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t columns_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

std::string format_double(double v);

}  // namespace phonon
