// Text helpers used by every CSV/INI writer and reader.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rvr {

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);

/// Comma-joined shortest representations.
std::string format_list(std::span<const double> values);

/// Strict parse: the whole field must be consumed. Throws std::invalid_argument.
double parse_double(std::string_view text);
std::int64_t parse_int64(std::string_view text);

std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

}  // namespace rvr
