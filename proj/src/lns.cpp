#include "floatscope/lns.hpp"

#include <limits>

#include "floatscope/dd.hpp"

namespace floatscope {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 2^d for d <= 0 as a dd, split as 2^n * 2^f so the exponential never
// underflows internally. Only the primary is meaningful when the result
// is subnormal.
DD exp2_dd(double d, int *scale) {
  double n = std::floor(d);
  double f = d - n;
  *scale = static_cast<int>(n);
  return dd_exp(dd_mul(ddconst::kLn2, f));
}

double to_base2(const DD &natural) {
  DD r = dd_mul(natural, ddconst::kLog2e);
  return r.hi + r.lo;
}

} // namespace

double phi_plus(double d) {
  if (std::isnan(d))
    return d;
  if (d == -kInf)
    return 0.0;
  if (d > 0.0)
    return d + phi_plus(-d);
  int n = 0;
  DD u = exp2_dd(d, &n);
  if (d < -60.0) {
    // log2(1 + u) = u log2(e) (1 - u/2 + ...), the correction is below 2^-61.
    DD r = dd_mul(u, ddconst::kLog2e);
    return std::ldexp(r.hi + r.lo, n);
  }
  return to_base2(dd_log1p(dd_ldexp(u, n)));
}

double phi_minus(double d) {
  if (std::isnan(d) || d > 0.0)
    return std::numeric_limits<double>::quiet_NaN();
  if (d == 0.0)
    return -kInf;
  if (d == -kInf)
    return 0.0;
  if (d >= -1.0) {
    // 1 - 2^d without cancellation.
    DD w = dd_neg(dd_expm1(dd_mul(ddconst::kLn2, d)));
    return to_base2(dd_log(w));
  }
  int n = 0;
  DD u = exp2_dd(d, &n);
  if (d < -60.0) {
    DD r = dd_mul(u, ddconst::kLog2e);
    return -std::ldexp(r.hi + r.lo, n);
  }
  return to_base2(dd_log1p(dd_neg(dd_ldexp(u, n))));
}

double lns_value(const LNS &a) {
  if (a.is_zero)
    return a.negative ? -0.0 : 0.0;
  double v = std::exp2(a.logmag);
  return a.negative ? -v : v;
}

LNS lns_neg(const LNS &a) {
  LNS r = a;
  r.negative = !a.negative;
  return r;
}

LNS lns_mul(const LNS &a, const LNS &b) {
  if (a.is_undefined() || b.is_undefined())
    return LNS::undefined();
  bool neg = a.negative != b.negative;
  if (a.is_zero || b.is_zero)
    return LNS::zero(neg);
  return {neg, a.logmag + b.logmag, false};
}

LNS lns_div(const LNS &a, const LNS &b) {
  if (a.is_undefined() || b.is_undefined())
    return LNS::undefined();
  bool neg = a.negative != b.negative;
  if (b.is_zero)
    return a.is_zero ? LNS::undefined() : LNS{neg, kInf, false};
  if (a.is_zero)
    return LNS::zero(neg);
  return {neg, a.logmag - b.logmag, false};
}

LNS lns_pow(const LNS &a, double y) {
  if (a.is_undefined() || std::isnan(y))
    return LNS::undefined();
  if (y == 0.0)
    return {false, 0.0, false};
  bool negative = false;
  if (a.negative && !a.is_zero) {
    // Negative bases need an integer exponent; the sign follows its parity.
    if (std::isfinite(y) && y != std::nearbyint(y))
      return LNS::undefined();
    negative = std::isfinite(y) && std::fmod(y, 2.0) != 0.0;
  }
  if (a.is_zero)
    return y > 0.0 ? LNS::zero() : LNS{false, kInf, false};
  if (a.logmag == 0.0)
    return {negative, 0.0, false};
  return {negative, a.logmag * y, false};
}

LNS lns_sqrt(const LNS &a) {
  if (a.is_undefined() || (a.negative && !a.is_zero))
    return LNS::undefined();
  if (a.is_zero)
    return a;
  return {false, a.logmag / 2.0, false};
}

LNS lns_cbrt(const LNS &a) {
  if (a.is_undefined() || a.is_zero)
    return a;
  return {a.negative, a.logmag / 3.0, false};
}

LNS lns_add(const LNS &a, const LNS &b) {
  if (a.is_undefined() || b.is_undefined())
    return LNS::undefined();
  if (a.is_zero && b.is_zero)
    return LNS::zero(a.negative && b.negative);
  if (a.is_zero)
    return b;
  if (b.is_zero)
    return a;
  const LNS &big = a.logmag >= b.logmag ? a : b;
  const LNS &small = a.logmag >= b.logmag ? b : a;
  if (big.logmag == kInf) {
    if (small.logmag == kInf && small.negative != big.negative)
      return LNS::undefined();
    return big;
  }
  if (big.logmag == -kInf)
    return big;
  double d = small.logmag - big.logmag;
  if (big.negative == small.negative)
    return {big.negative, big.logmag + phi_plus(d), false};
  if (d == 0.0)
    return LNS::zero();
  return {big.negative, big.logmag + phi_minus(d), false};
}

LNS lns_sub(const LNS &a, const LNS &b) { return lns_add(a, lns_neg(b)); }

LNS lns_exp(const LNS &a) {
  if (a.is_undefined())
    return a;
  if (a.is_zero)
    return {false, 0.0, false};
  double v = lns_value(a);
  return {false, v * ddconst::kLog2e.hi, false};
}

LNS lns_log(const LNS &a) {
  if (a.is_undefined())
    return a;
  if (a.is_zero)
    return {true, kInf, false};
  if (a.negative)
    return LNS::undefined();
  if (a.logmag == 0.0)
    return LNS::zero();
  if (std::isinf(a.logmag))
    return {a.logmag < 0.0, kInf, false};
  DD v = dd_mul(ddconst::kLn2, a.logmag);
  return {v.hi < 0.0, std::log2(std::fabs(v.hi)), false};
}

RangeVerdict lns_unsupported(Op op, const LNS &a) {
  RangeVerdict v;
  if (a.is_undefined()) {
    v.kind = VerdictKind::DomainError;
    return v;
  }
  if (a.is_zero) {
    v.kind = VerdictKind::InRangeValue;
    v.in_range = op == Op::Cos ? 1.0 : op == Op::Acos ? ddconst::kPio2.hi : 0.0;
    return v;
  }
  if (a.logmag > 0.0) {
    if (op == Op::Acos || op == Op::Asin) {
      v.kind = VerdictKind::DomainError;
      return v;
    }
    v.kind = VerdictKind::InRangeUnknown;
    return v;
  }
  switch (op) {
  case Op::Cos:
    v.kind = VerdictKind::InRangeValue;
    v.in_range = 1.0;
    v.benign = true;
    break;
  case Op::Acos:
    v.kind = VerdictKind::InRangeValue;
    v.in_range = ddconst::kPio2.hi;
    break;
  default:
    v.kind = VerdictKind::OutOfRangePreserved;
    v.value = a;
    break;
  }
  return v;
}

} // namespace floatscope
