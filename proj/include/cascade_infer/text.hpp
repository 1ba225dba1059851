#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cascade_infer {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

// The parsers accept the whole string or throw ParseError(0, ...).
double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);
std::uint64_t parse_uint(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char sep);

}  // namespace cascade_infer
