#include "cascade_infer/text.hpp"

#include <charconv>
#include <system_error>

#include "cascade_infer/errors.hpp"

namespace cascade_infer {

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw ParameterError("cannot format double");
  return std::string(buf, ptr);
}

namespace {

template <class T>
T parse_number(std::string_view text, const char* kind) {
  text = trim(text);
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  // from_chars rejects a leading '+', which hand-written files may contain.
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc{} || ptr != last) {
    throw ParseError(0, std::string("invalid ") + kind + " '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

double parse_double(std::string_view text) { return parse_number<double>(text, "number"); }
std::int64_t parse_int(std::string_view text) { return parse_number<std::int64_t>(text, "integer"); }

std::uint64_t parse_uint(std::string_view text) {
  if (!trim(text).empty() && trim(text).front() == '-') {
    throw ParseError(0, "invalid unsigned integer '" + std::string(trim(text)) + "'");
  }
  return parse_number<std::uint64_t>(text, "unsigned integer");
}

std::string_view trim(std::string_view text) {
  constexpr std::string_view ws = " \t\r\n";
  const auto begin = text.find_first_not_of(ws);
  if (begin == std::string_view::npos) return {};
  const auto end = text.find_last_not_of(ws);
  return text.substr(begin, end - begin + 1);
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace cascade_infer
