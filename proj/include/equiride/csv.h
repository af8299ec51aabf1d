#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace equiride {

// Splits one delimiter-separated line. Double-quoted fields may contain the
// delimiter; a doubled quote inside a quoted field is a literal quote.
std::vector<std::string> split_csv_line(std::string_view line, char delim = ',');

std::string csv_escape(std::string_view field, char delim = ',');

std::string join_csv(std::vector<std::string> const& fields, char delim = ',');

// Streams rows from a delimited text source. Strips a trailing '\r' and a
// leading UTF-8 byte order mark; blank lines are skipped.
class CsvReader {
public:
  explicit CsvReader(std::istream& in, char delim = ',') : in_{in}, delim_{delim} {}

  bool next(std::vector<std::string>& fields);

  // 1-based line number of the row last returned by next().
  std::size_t line() const { return line_; }

private:
  std::istream& in_;
  char delim_;
  std::size_t line_{0};
  std::string buf_;
};

// Fixed-point decimal formatting ("%.Nf").
std::string format_fixed(double value, int decimals);

// Shortest text that parses back to exactly `value`.
std::string format_shortest(double value);

std::string_view trim(std::string_view s);

}  // namespace equiride
