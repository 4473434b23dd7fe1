#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gt {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

/// Parses a decimal produced by format_double (or any strtod-compatible text).
double parse_double(std::string_view s);

/// Splits one CSV line, honouring double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(std::string_view line);

/// Quotes a field if it contains a comma, quote or newline.
std::string csv_field(std::string_view s);

} // namespace gt
