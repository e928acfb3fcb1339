#pragma once

#include <string>
#include <string_view>

namespace belief {

// Locale-independent number text for CSV output ('.' separator, up to 10
// significant digits, no trailing zeros).
std::string format_number(double v);

// Quotes a CSV field when it contains a separator, quote, or newline.
std::string csv_field(std::string_view s);

}  // namespace belief
