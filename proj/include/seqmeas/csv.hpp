#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace seqmeas {

/// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double value);

using CsvCell = std::variant<double, std::int64_t, std::uint64_t, std::string>;

/// UTF-8 CSV with a header row, '.' decimal separator, round-trip doubles.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(std::span<const std::string> names);
  void row(std::span<const CsvCell> cells);
  void row(std::span<const double> values);

 private:
  std::ostream& out_;
};

}  // namespace seqmeas
