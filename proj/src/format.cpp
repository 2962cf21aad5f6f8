#include "floatscope/format.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace floatscope {

std::string_view format_name(Format f) {
  return f == Format::Binary32 ? "binary32" : "binary64";
}

std::optional<Format> parse_format(std::string_view name) {
  if (name == "binary32")
    return Format::Binary32;
  if (name == "binary64")
    return Format::Binary64;
  return std::nullopt;
}

double round_to_format(double x, Format f) {
  if (f == Format::Binary64)
    return x;
  return static_cast<double>(static_cast<float>(x));
}

double round_to_format(const DD &x, Format f) {
  if (f == Format::Binary64)
    return x.hi + x.lo;
  return static_cast<double>(dd_to_float(x));
}

bool representable(double x, Format f) {
  return round_to_format(x, f) == x || std::isnan(x);
}

std::string hex_float(double x) {
  if (std::isnan(x))
    return "nan";
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

double parse_double(std::string_view text) {
  std::string s(text);
  if (s.empty())
    throw std::invalid_argument("empty number");
  char *end = nullptr;
  errno = 0;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size())
    throw std::invalid_argument("malformed number '" + s + "'");
  return v;
}

} // namespace floatscope
