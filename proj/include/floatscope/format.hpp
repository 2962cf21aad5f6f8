#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "floatscope/dd.hpp"

namespace floatscope {

enum class Format { Binary32, Binary64 };

std::string_view format_name(Format f);
std::optional<Format> parse_format(std::string_view name);

// Significand bits including the implicit bit.
constexpr int precision_bits(Format f) { return f == Format::Binary32 ? 24 : 53; }

// Unit roundoff 2^-p.
constexpr double unit_roundoff(Format f) {
  return f == Format::Binary32 ? 0x1p-24 : 0x1p-53;
}

// Round a binary64 value (or the exact value hi + lo) to the target format.
// Binary32 results are returned widened to double.
double round_to_format(double x, Format f);
double round_to_format(const DD &x, Format f);

bool representable(double x, Format f);

// "%a" rendering; binary32 values are rendered as their binary64 widening.
std::string hex_float(double x);

// Parses decimal or C hex-float text. Throws std::invalid_argument.
double parse_double(std::string_view text);

} // namespace floatscope
