#pragma once

#include <cmath>

#include "floatscope/expr.hpp"

namespace floatscope {

// sign * 2^logmag, or zero. A NaN logmag marks an undefined value.
struct LNS {
  bool negative = false;
  double logmag = 0.0;
  bool is_zero = false;

  static LNS zero(bool negative = false) { return {negative, 0.0, true}; }
  static LNS undefined() { return {false, std::nan(""), false}; }
  bool is_undefined() const { return !is_zero && std::isnan(logmag); }
};

// log2(1 + 2^d) and log2(1 - 2^d) for d <= 0.
double phi_plus(double d);
double phi_minus(double d);

LNS lns_neg(const LNS &a);
LNS lns_mul(const LNS &a, const LNS &b);
LNS lns_div(const LNS &a, const LNS &b);
LNS lns_pow(const LNS &a, double y);
LNS lns_sqrt(const LNS &a);
LNS lns_cbrt(const LNS &a);
LNS lns_add(const LNS &a, const LNS &b);
LNS lns_sub(const LNS &a, const LNS &b);
LNS lns_exp(const LNS &a);
LNS lns_log(const LNS &a);

// Signed value as a double (overflows to infinity, underflows to zero).
double lns_value(const LNS &a);

enum class VerdictKind {
  InRangeUnknown,      // magnitude unknown but representable
  OutOfRangePreserved, // f(x) ~ x, still out of range
  InRangeValue,        // representable with a known value
  DomainError,
};

struct RangeVerdict {
  VerdictKind kind = VerdictKind::InRangeUnknown;
  LNS value;           // OutOfRangePreserved
  double in_range = 0; // InRangeValue
  bool benign = false; // native flushing already gives the rounded result
};

// Trigonometric and inverse trigonometric functions of out-of-range values.
// A positive logmag is an overflowed input, a negative one underflowed.
RangeVerdict lns_unsupported(Op op, const LNS &a);

} // namespace floatscope
