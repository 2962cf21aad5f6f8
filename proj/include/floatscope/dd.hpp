#pragma once

#include <cmath>
#include <cstdint>

namespace floatscope {

// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2 after normalization.
struct DD {
  double hi = 0.0;
  double lo = 0.0;

  constexpr DD() = default;
  constexpr DD(double h) : hi(h) {}
  constexpr DD(double h, double l) : hi(h), lo(l) {}

  constexpr double value() const { return hi + lo; }
  bool is_zero() const { return hi == 0.0; }
  bool is_finite() const { return std::isfinite(hi) && std::isfinite(lo); }
  bool is_nan() const { return std::isnan(hi) || std::isnan(lo); }
};

inline bool operator==(const DD &a, const DD &b) {
  return a.hi == b.hi && a.lo == b.lo;
}

// Error-free transformations.

inline DD two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  double e = (a - (s - bb)) + (b - bb);
  return {s, e};
}

// Requires |a| >= |b| or a == 0.
inline DD fast_two_sum(double a, double b) {
  double s = a + b;
  double e = b - (s - a);
  return {s, e};
}

inline DD two_prod_fma(double a, double b) {
  double p = a * b;
  double e = std::fma(a, b, -p);
  return {p, e};
}

// Veltkamp split with prescaling so that the splitter product cannot
// overflow for large operands.
inline DD veltkamp_split(double a) {
  constexpr double kSplitter = 134217729.0; // 2^27 + 1
  constexpr double kBig = 0x1p996;
  if (std::fabs(a) > kBig) {
    double s = a * 0x1p-28;
    double t = kSplitter * s;
    double h = t - (t - s);
    double l = s - h;
    return {h * 0x1p28, l * 0x1p28};
  }
  double t = kSplitter * a;
  double h = t - (t - a);
  return {h, a - h};
}

inline DD two_prod_dekker(double a, double b) {
  double p = a * b;
  DD as = veltkamp_split(a);
  DD bs = veltkamp_split(b);
  double e = ((as.hi * bs.hi - p) + as.hi * bs.lo + as.lo * bs.hi) +
             as.lo * bs.lo;
  return {p, e};
}

inline DD two_prod(double a, double b) {
#if defined(FP_FAST_FMA)
  return two_prod_fma(a, b);
#else
  return two_prod_dekker(a, b);
#endif
}

// Basic arithmetic.

inline DD dd_neg(const DD &a) { return {-a.hi, -a.lo}; }

inline DD dd_abs(const DD &a) { return a.hi < 0.0 ? dd_neg(a) : a; }

inline DD dd_add(const DD &a, double b) {
  DD s = two_sum(a.hi, b);
  return fast_two_sum(s.hi, s.lo + a.lo);
}

inline DD dd_add(const DD &a, const DD &b) {
  DD s = two_sum(a.hi, b.hi);
  DD t = two_sum(a.lo, b.lo);
  double c = s.lo + t.hi;
  DD v = fast_two_sum(s.hi, c);
  double w = t.lo + v.lo;
  return fast_two_sum(v.hi, w);
}

inline DD dd_sub(const DD &a, const DD &b) { return dd_add(a, dd_neg(b)); }
inline DD dd_sub(const DD &a, double b) { return dd_add(a, -b); }

inline DD dd_mul(const DD &a, double b) {
  DD c = two_prod(a.hi, b);
  double l = a.lo * b + c.lo;
  return fast_two_sum(c.hi, l);
}

inline DD dd_mul(const DD &a, const DD &b) {
  DD c = two_prod(a.hi, b.hi);
#if defined(FP_FAST_FMA)
  double t = a.lo * b.lo;
  t = std::fma(a.hi, b.lo, t);
  double l = std::fma(a.lo, b.hi, t) + c.lo;
#else
  double l = (a.hi * b.lo + a.lo * b.hi) + c.lo;
#endif
  return fast_two_sum(c.hi, l);
}

inline DD dd_sqr(const DD &a) { return dd_mul(a, a); }

inline DD dd_div(const DD &a, double b) {
  double th = a.hi / b;
  DD p = two_prod(th, b);
  double ph = a.hi - p.hi;
  double dl = a.lo - p.lo;
  double d = ph + dl;
  double tl = d / b;
  return fast_two_sum(th, tl);
}

inline DD dd_div(const DD &a, const DD &b) {
  double th = a.hi / b.hi;
  DD r = dd_mul(b, th);
  DD d = dd_sub(a, r);
  double tl = d.hi / b.hi;
  return fast_two_sum(th, tl);
}

inline DD dd_ldexp(const DD &a, int e) {
  return {std::ldexp(a.hi, e), std::ldexp(a.lo, e)};
}

inline bool dd_less(const DD &a, const DD &b) {
  return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo);
}

// Elementary functions. NaN in gives NaN out; domain violations give NaN.

DD dd_sqrt(const DD &x);
DD dd_cbrt(const DD &x);
DD dd_exp(const DD &x);
DD dd_expm1(const DD &x);
DD dd_log(const DD &x);
DD dd_log1p(const DD &x);
DD dd_pow(const DD &x, const DD &y); // x > 0 only
DD dd_sin(const DD &x);
DD dd_cos(const DD &x);
DD dd_tan(const DD &x);
DD dd_asin(const DD &x);
DD dd_acos(const DD &x);

struct RangeReduced {
  DD reduced;
  int quadrant = 0;
};

// x = reduced + (pi/2) * (quadrant + 4m).
RangeReduced reduce_mod_pio2(const DD &x);

// Scalar reduction: y + (pi/2) * k with |y| <= pi/4 (approximately) and
// k taken mod 4. Uses Cody-Waite below kCodyWaiteCutoff.
constexpr double kCodyWaiteCutoff = 0x1p20;
RangeReduced rem_pio2(double x);

// Round the represented value to binary32 (round to nearest even).
float dd_to_float(const DD &x);

namespace ddconst {
inline constexpr DD kPi{0x1.921fb54442d18p+1, 0x1.1a62633145c07p-53};
inline constexpr DD kPio2{0x1.921fb54442d18p+0, 0x1.1a62633145c07p-54};
inline constexpr double kPio2Third = -0x1.f1976b7ed8fbcp-110;
inline constexpr DD kPio4{0x1.921fb54442d18p-1, 0x1.1a62633145c07p-55};
inline constexpr DD kE{0x1.5bf0a8b145769p+1, 0x1.4d57ee2b1013ap-53};
inline constexpr DD kLn2{0x1.62e42fefa39efp-1, 0x1.abc9e3b39803fp-56};
inline constexpr double kLn2Third = 0x1.7b57a079a1934p-111;
inline constexpr DD kLog2e{0x1.71547652b82fep+0, 0x1.777d0ffda0d24p-56};
} // namespace ddconst

} // namespace floatscope
