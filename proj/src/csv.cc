#include "equiride/csv.h"

#include <charconv>
#include <cstdio>

namespace equiride {

std::vector<std::string> split_csv_line(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char const c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.push_back(std::move(field));
  return out;
}

std::string csv_escape(std::string_view field, char delim) {
  if (field.find_first_of(std::string{delim} + "\"\n\r") == std::string_view::npos) {
    return std::string{field};
  }
  std::string out{"\""};
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join_csv(std::vector<std::string> const& fields, char delim) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i != 0) out.push_back(delim);
    out += csv_escape(fields[i], delim);
  }
  return out;
}

bool CsvReader::next(std::vector<std::string>& fields) {
  while (std::getline(in_, buf_)) {
    ++line_;
    if (!buf_.empty() && buf_.back() == '\r') buf_.pop_back();
    if (line_ == 1 && buf_.starts_with("\xEF\xBB\xBF")) buf_.erase(0, 3);
    if (trim(buf_).empty()) continue;
    fields = split_csv_line(buf_, delim_);
    return true;
  }
  return false;
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

std::string format_shortest(double value) {
  char buf[64];
  auto const res = std::to_chars(buf, buf + sizeof(buf), value);
  return {buf, res.ptr};
}

std::string_view trim(std::string_view s) {
  auto const first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  auto const last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace equiride
