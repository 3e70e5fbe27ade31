#pragma once

#include <initializer_list>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

namespace hawkesruin::io {

// Shortest representation that parses back to the same double.
std::string format_double(double x);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::initializer_list<std::string_view> header);
  CsvWriter(std::ostream& out, std::span<const std::string> header);

  void row(std::initializer_list<double> values);
  void row(std::span<const double> values);

 private:
  std::ostream& out_;
  std::size_t columns_;
};

}  // namespace hawkesruin::io
