#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace txflow::csv {

/// Splits one CSV line. Handles double-quoted fields with "" escapes; does not
/// support embedded newlines.
std::vector<std::string> split_line(std::string_view line);

/// Splits on a single delimiter without any quoting rules; empty pieces kept.
std::vector<std::string_view> split(std::string_view text, char delim);

std::string_view trim(std::string_view text);

/// Quotes a field only if it contains a comma, quote or leading/trailing space.
std::string quote(std::string_view field);

/// Writes fields joined by commas followed by '\n'.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// 12 significant digits, "%.12g". Negative zero prints as 0.
std::string format_double(double value);

/// Rounds to the value whose 12-significant-digit text is format_double(value).
double round12(double value);

}  // namespace txflow::csv
