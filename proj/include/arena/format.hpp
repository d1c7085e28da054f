#pragma once

#include <string>
#include <string_view>

namespace arena {

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

/// Strict parse of the whole string; throws std::invalid_argument otherwise.
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

}  // namespace arena
