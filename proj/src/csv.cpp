#include "seqmeas/csv.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace seqmeas {

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  if (res.ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, res.ptr);
}

void CsvWriter::header(std::span<const std::string> names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out_ << ',';
    out_ << names[i];
  }
  out_ << '\n';
}

void CsvWriter::row(std::span<const CsvCell> cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    const CsvCell& c = cells[i];
    if (std::holds_alternative<double>(c)) {
      out_ << format_double(std::get<double>(c));
    } else if (std::holds_alternative<std::int64_t>(c)) {
      out_ << std::get<std::int64_t>(c);
    } else if (std::holds_alternative<std::uint64_t>(c)) {
      out_ << std::get<std::uint64_t>(c);
    } else {
      out_ << std::get<std::string>(c);
    }
  }
  out_ << '\n';
}

void CsvWriter::row(std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out_ << ',';
    out_ << format_double(values[i]);
  }
  out_ << '\n';
}

}  // namespace seqmeas
