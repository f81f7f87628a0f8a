#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace evqc::csv {

/// Split one CSV line into fields. Handles double-quoted fields with ""
/// escapes; does not support embedded newlines.
std::vector<std::string> split_line(std::string_view line);

/// Line reader that strips a UTF-8 BOM on the first line and trailing '\r'.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  bool next(std::vector<std::string>& fields);
  std::size_t line_number() const { return line_; }

 private:
  std::istream& in_;
  std::string buffer_;
  std::size_t line_ = 0;
};

/// Shortest round-trip decimal representation; '.' separator regardless of locale.
std::string format_double(double v);

}  // namespace evqc::csv
