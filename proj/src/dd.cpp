#include "floatscope/dd.hpp"

#include <algorithm>
#include <array>
#include <cfloat>
#include <cstdint>
#include <limits>

namespace floatscope {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// 1/n! for n = 3..31.
constexpr DD kInvFact[] = {
    {0x1.5555555555555p-3, 0x1.5555555555555p-57},
    {0x1.5555555555555p-5, 0x1.5555555555555p-59},
    {0x1.1111111111111p-7, 0x1.1111111111111p-63},
    {0x1.6c16c16c16c17p-10, -0x1.f49f49f49f49fp-65},
    {0x1.a01a01a01a01ap-13, 0x1.a01a01a01a01ap-73},
    {0x1.a01a01a01a01ap-16, 0x1.a01a01a01a01ap-76},
    {0x1.71de3a556c734p-19, -0x1.c154f8ddc6c00p-73},
    {0x1.27e4fb7789f5cp-22, 0x1.cbbc05b4fa99ap-76},
    {0x1.ae64567f544e4p-26, -0x1.c062e06d1f209p-80},
    {0x1.1eed8eff8d898p-29, -0x1.2aec959e14c06p-83},
    {0x1.6124613a86d09p-33, 0x1.f28e0cc748ebep-87},
    {0x1.93974a8c07c9dp-37, 0x1.05d6f8a2efd1fp-92},
    {0x1.ae7f3e733b81fp-41, 0x1.1d8656b0ee8cbp-97},
    {0x1.ae7f3e733b81fp-45, 0x1.1d8656b0ee8cbp-101},
    {0x1.952c77030ad4ap-49, 0x1.ac981465ddc6cp-103},
    {0x1.6827863b97d97p-53, 0x1.eec01221a8b0bp-107},
    {0x1.2f49b46814157p-57, 0x1.2650f61dbdcb4p-112},
    {0x1.e542ba4020225p-62, 0x1.ea72b4afe3c2fp-120},
    {0x1.71b8ef6dcf572p-66, -0x1.d043ae40c4647p-120},
    {0x1.0ce396db7f853p-70, -0x1.aebcdbd20331cp-124},
    {0x1.761b41316381ap-75, -0x1.3423c7d91404fp-130},
    {0x1.f2cf01972f578p-80, -0x1.9ada5fcc1ab14p-135},
    {0x1.3f3ccdd165fa9p-84, -0x1.58ddadf344487p-139},
    {0x1.88e85fc6a4e5ap-89, -0x1.71c37ebd16540p-143},
    {0x1.d1ab1c2dccea3p-94, 0x1.054d0c78aea14p-149},
    {0x1.0a18a2635085dp-98, 0x1.b9e2e28e1aa54p-153},
    {0x1.259f98b4358adp-103, 0x1.eaf8c39dd9bc5p-157},
    {0x1.3932c5047d60ep-108, 0x1.832b7b530a627p-162},
    {0x1.434d2e783f5bcp-113, 0x1.0b87b91be9affp-167},
};

const DD &inv_fact(int n) { return kInvFact[n - 3]; }

// 1/n for odd n = 3..17.
constexpr DD kInvOdd[] = {
    {0x1.5555555555555p-2, 0x1.5555555555555p-56},
    {0x1.999999999999ap-3, -0x1.999999999999ap-57},
    {0x1.2492492492492p-3, 0x1.2492492492492p-57},
    {0x1.c71c71c71c71cp-4, 0x1.c71c71c71c71cp-58},
    {0x1.745d1745d1746p-4, -0x1.745d1745d1746p-59},
    {0x1.3b13b13b13b14p-4, -0x1.3b13b13b13b14p-58},
    {0x1.1111111111111p-4, 0x1.1111111111111p-60},
    {0x1.e1e1e1e1e1e1ep-5, 0x1.e1e1e1e1e1e1ep-61},
};

const DD &inv_odd(int n) { return kInvOdd[(n - 3) / 2]; }

// pi/2 in 33-bit pieces; k * piece is exact for |k| < 2^20.
constexpr double kPio2Chunks[] = {
    0x1.921fb54400000p+0,  0x1.0b4611a600000p-34, 0x1.3198a2e000000p-69,
    0x1.b839a25200000p-104, 0x1.2704453300000p-142, 0x1.cc74020bbea64p-175,
};

// ln 2 in 42-bit pieces; k * piece is exact for |k| < 2^11.
constexpr double kLn2Chunks[] = {
    0x1.62e42fefa3800p-1,
    0x1.ef35793c76000p-45,
    0x1.cc01f97b57800p-87,
    0x1.03cd0c99ca62ep-130,
};

// Bits of 2/pi, most significant first.
constexpr uint32_t kTwoOverPi[] = {
    0xA2F9836E, 0x4E441529, 0xFC2757D1, 0xF534DDC0, 0xDB629599, 0x3C439041,
    0xFE5163AB, 0xDEBBC561, 0xB7246E3A, 0x424DD2E0, 0x06492EEA, 0x09D1921C,
    0xFE1DEB1C, 0xB129A73E, 0xE88235F5, 0x2EBB4484, 0xE99C7026, 0xB45F7E41,
    0x3991D639, 0x835339F4, 0x9C845F8B, 0xBDF9283B, 0x1FF897FF, 0xDE05980F,
    0xEF2F118B, 0x5A0A6D1F, 0x6D367ECF, 0x27CB09B7, 0x4F463F66, 0x9E5FEA2D,
    0x7527BAC7, 0xEBE5F17B, 0x3D0739F7, 0x8A5292EA, 0x6BFB5FB1, 0x1F8D5D08,
    0x56033046, 0xFC7B6BAB, 0xF0CFBC20, 0x9AF4361D, 0xA9E39161, 0x5EE61B08,
    0x6599855F, 0x14A06840, 0x8DFFD880, 0x4D732731, 0x06061556, 0xCA73A8C9,
    0x60E27BC0, 0x8C6B47C4, 0x19C367CD, 0xDCE8092A, 0x8359C476, 0x8B961CA6,
    0xDDAF44D1, 0x5719053E, 0xA5FF0705, 0x3F7E33E8, 0x32C2DE4F, 0x98327DBB,
};

constexpr double kTwoOverPiD = 0x1.45f306dc9c883p-1;
constexpr double kPio4D = 0x1.921fb54442d18p-1;
constexpr double kExpOverflow = 709.79;
constexpr double kExpUnderflow = -745.2;

// Exact sum of a handful of doubles (nonoverlapping, increasing magnitude).
class Expansion {
public:
  void add(double b) {
    double q = b;
    int m = 0;
    for (int i = 0; i < n_; ++i) {
      DD t = two_sum(q, c_[i]);
      q = t.hi;
      if (t.lo != 0.0)
        c_[m++] = t.lo;
    }
    if (q != 0.0)
      c_[m++] = q;
    n_ = m;
  }
  void add(const DD &d) {
    add(d.hi);
    add(d.lo);
  }
  DD to_dd() const {
    DD acc;
    for (int i = 0; i < n_; ++i)
      acc = dd_add(acc, c_[i]);
    return acc;
  }

private:
  std::array<double, 16> c_{};
  int n_ = 0;
};

DD nan_dd() { return {kNaN, kNaN}; }

// sum_{n=1}^{10} s^n / n!
DD expm1_series(const DD &s) {
  DD p = inv_fact(10);
  for (int n = 9; n >= 3; --n)
    p = dd_add(dd_mul(p, s), inv_fact(n));
  p = dd_add(dd_mul(p, s), 0.5);
  p = dd_add(dd_mul(p, s), 1.0);
  return dd_mul(p, s);
}

// expm1 for |x| < 1 via halving and e <- e(2 + e).
DD expm1_reduced(const DD &x) {
  if (std::fabs(x.hi) < 0x1p-20)
    return expm1_series(x);
  constexpr int kHalvings = 9;
  DD m = expm1_series(dd_ldexp(x, -kHalvings));
  for (int i = 0; i < kHalvings; ++i)
    m = dd_mul(m, dd_add(m, 2.0));
  return m;
}

// log(1 + d) = 2 atanh(d / (2 + d)) for |d| < 2^-6.
DD log1p_series(const DD &d) {
  DD s = dd_div(d, dd_add(d, 2.0));
  DD s2 = dd_sqr(s);
  DD q = inv_odd(17);
  for (int n = 15; n >= 3; n -= 2)
    q = dd_add(dd_mul(q, s2), inv_odd(n));
  q = dd_add(dd_mul(q, s2), 1.0);
  return dd_ldexp(dd_mul(s, q), 1);
}

DD scale2(const DD &x, int k) {
  if (k > 1000 || k < -1000) {
    int h = k / 2;
    return dd_ldexp(dd_ldexp(x, h), k - h);
  }
  return dd_ldexp(x, k);
}

DD sin_core(const DD &t) {
  DD z = dd_neg(dd_sqr(t));
  DD p = inv_fact(27);
  for (int n = 25; n >= 3; n -= 2)
    p = dd_add(dd_mul(p, z), inv_fact(n));
  p = dd_add(dd_mul(p, z), 1.0);
  return dd_mul(t, p);
}

DD cos_core(const DD &t) {
  DD z = dd_neg(dd_sqr(t));
  DD p = inv_fact(28);
  for (int n = 26; n >= 4; n -= 2)
    p = dd_add(dd_mul(p, z), inv_fact(n));
  p = dd_add(dd_mul(p, z), 0.5);
  return dd_add(dd_mul(p, z), 1.0);
}

uint32_t two_over_pi_bits32(int i) {
  int idx = (i - 1) / 32;
  int sh = (i - 1) % 32;
  uint32_t w = kTwoOverPi[idx] << sh;
  if (sh != 0)
    w |= kTwoOverPi[idx + 1] >> (32 - sh);
  return w;
}

constexpr int kWindowLimbs = 10;
constexpr int kProductLimbs = kWindowLimbs + 2;

int bit_at(const uint32_t *limbs, int b) {
  if (b < 0)
    return 0;
  return (limbs[b / 32] >> (b % 32)) & 1u;
}

uint64_t extract_bits(const uint32_t *limbs, int low, int count) {
  uint64_t v = 0;
  for (int b = low + count - 1; b >= low; --b)
    v = (v << 1) | static_cast<uint64_t>(bit_at(limbs, b));
  return v;
}

RangeReduced payne_hanek(double x) {
  double ax = std::fabs(x);
  int E = std::ilogb(ax) - 52;
  auto M = static_cast<uint64_t>(std::ldexp(ax, -E));

  // Bits of 2/pi before i0 only contribute multiples of 4.
  int i0 = std::max(1, E - 1);
  constexpr int kWindow = 32 * kWindowLimbs;
  std::array<uint32_t, kWindowLimbs> window{};
  for (int j = 0; j < kWindowLimbs; ++j)
    window[kWindowLimbs - 1 - j] = two_over_pi_bits32(i0 + 32 * j);

  std::array<uint32_t, kProductLimbs> P{};
  unsigned __int128 carry = 0;
  for (int j = 0; j < kWindowLimbs; ++j) {
    carry += static_cast<unsigned __int128>(M) * window[j];
    P[j] = static_cast<uint32_t>(carry);
    carry >>= 32;
  }
  P[kWindowLimbs] = static_cast<uint32_t>(carry);
  P[kWindowLimbs + 1] = static_cast<uint32_t>(carry >> 32);

  // x * 2/pi = P * 2^-F
  int F = i0 + kWindow - 1 - E;
  int n = bit_at(P.data(), F) + 2 * bit_at(P.data(), F + 1);

  std::array<uint32_t, kProductLimbs> frac{};
  for (int j = 0; j < kProductLimbs; ++j) {
    int base = 32 * j;
    if (base + 32 <= F)
      frac[j] = P[j];
    else if (base < F)
      frac[j] = P[j] & ((1u << (F - base)) - 1u);
  }
  bool negative = bit_at(P.data(), F - 1) != 0;
  if (negative) {
    ++n;
    uint64_t c = 1;
    for (int j = 0; j < kProductLimbs; ++j) {
      c += static_cast<uint32_t>(~frac[j]);
      frac[j] = static_cast<uint32_t>(c);
      c >>= 32;
    }
    for (int j = 0; j < kProductLimbs; ++j) {
      int base = 32 * j;
      if (base >= F)
        frac[j] = 0;
      else if (base + 32 > F)
        frac[j] &= (1u << (F - base)) - 1u;
    }
  }

  int h = -1;
  for (int j = kProductLimbs - 1; j >= 0 && h < 0; --j)
    if (frac[j] != 0)
      h = 32 * j + 31 - __builtin_clz(frac[j]);

  DD y;
  if (h >= 0) {
    double parts[3];
    for (int c = 0; c < 3; ++c) {
      int low = h - 52 - 53 * c;
      parts[c] = std::ldexp(static_cast<double>(extract_bits(frac.data(), low, 53)),
                            low - F);
    }
    DD f = fast_two_sum(parts[0], parts[1]);
    f = dd_add(f, parts[2]);
    y = dd_add(dd_mul(f, ddconst::kPio2), f.hi * ddconst::kPio2Third);
    if (negative)
      y = dd_neg(y);
  }
  if (x < 0) {
    y = dd_neg(y);
    n = -n;
  }
  return {y, ((n % 4) + 4) % 4};
}

} // namespace

RangeReduced rem_pio2(double x) {
  if (!std::isfinite(x))
    return {nan_dd(), 0};
  double ax = std::fabs(x);
  if (ax <= kPio4D)
    return {DD(x), 0};
  if (ax < kCodyWaiteCutoff) {
    double k = std::nearbyint(x * kTwoOverPiD);
    Expansion e;
    e.add(x);
    for (int i = 0; i < 5; ++i)
      e.add(-k * kPio2Chunks[i]);
    DD p = two_prod(k, kPio2Chunks[5]);
    e.add(-p.hi);
    e.add(-p.lo);
    auto q = static_cast<int64_t>(k);
    return {e.to_dd(), static_cast<int>(((q % 4) + 4) % 4)};
  }
  return payne_hanek(x);
}

RangeReduced reduce_mod_pio2(const DD &x) {
  if (!x.is_finite())
    return {nan_dd(), 0};
  if (std::fabs(x.hi) <= kPio4D)
    return {x, 0};
  RangeReduced a = rem_pio2(x.hi);
  RangeReduced b = rem_pio2(x.lo);
  DD r = dd_add(a.reduced, b.reduced);
  int q = a.quadrant + b.quadrant;
  if (r.hi > kPio4D) {
    r = dd_add(dd_sub(r, ddconst::kPio2), -ddconst::kPio2Third);
    q += 1;
  } else if (r.hi < -kPio4D) {
    r = dd_add(dd_add(r, ddconst::kPio2), ddconst::kPio2Third);
    q += 3;
  }
  return {r, q % 4};
}

DD dd_sin(const DD &x) {
  if (!x.is_finite())
    return nan_dd();
  if (x.hi == 0.0)
    return x;
  RangeReduced r = reduce_mod_pio2(x);
  switch (r.quadrant) {
  case 0:
    return sin_core(r.reduced);
  case 1:
    return cos_core(r.reduced);
  case 2:
    return dd_neg(sin_core(r.reduced));
  default:
    return dd_neg(cos_core(r.reduced));
  }
}

DD dd_cos(const DD &x) {
  if (!x.is_finite())
    return nan_dd();
  RangeReduced r = reduce_mod_pio2(x);
  switch (r.quadrant) {
  case 0:
    return cos_core(r.reduced);
  case 1:
    return dd_neg(sin_core(r.reduced));
  case 2:
    return dd_neg(cos_core(r.reduced));
  default:
    return sin_core(r.reduced);
  }
}

DD dd_tan(const DD &x) {
  if (!x.is_finite())
    return nan_dd();
  if (x.hi == 0.0)
    return x;
  RangeReduced r = reduce_mod_pio2(x);
  DD s = sin_core(r.reduced);
  DD c = cos_core(r.reduced);
  if (r.quadrant % 2 == 0)
    return dd_div(s, c);
  return dd_neg(dd_div(c, s));
}

DD dd_exp(const DD &x) {
  if (std::isnan(x.hi))
    return nan_dd();
  if (x.hi > kExpOverflow)
    return {kInf, 0.0};
  if (x.hi < kExpUnderflow)
    return {0.0, 0.0};
  if (x.hi == 0.0)
    return {1.0, 0.0};
  double k = std::nearbyint(x.hi * ddconst::kLog2e.hi);
  Expansion e;
  e.add(x);
  for (int i = 0; i < 3; ++i)
    e.add(-k * kLn2Chunks[i]);
  DD p = two_prod(k, kLn2Chunks[3]);
  e.add(-p.hi);
  e.add(-p.lo);
  DD m = expm1_reduced(e.to_dd());
  return scale2(dd_add(m, 1.0), static_cast<int>(k));
}

DD dd_expm1(const DD &x) {
  if (std::isnan(x.hi))
    return nan_dd();
  if (std::fabs(x.hi) < 0.5)
    return expm1_reduced(x);
  if (x.hi < -40.0)
    return dd_sub(dd_exp(x), 1.0);
  DD e = dd_exp(x);
  if (!e.is_finite())
    return e;
  return dd_sub(e, 1.0);
}

DD dd_log(const DD &x) {
  if (std::isnan(x.hi) || x.hi < 0.0)
    return nan_dd();
  if (x.hi == 0.0)
    return {-kInf, 0.0};
  if (std::isinf(x.hi))
    return {kInf, 0.0};
  if (x.hi == 1.0 && x.lo == 0.0)
    return {0.0, 0.0};

  int k = std::ilogb(x.hi);
  DD m = dd_ldexp(x, -k);
  if (m.hi > 0x1.6a09e667f3bcdp+0) {
    m = dd_ldexp(m, -1);
    ++k;
  }

  DD lm;
  DD d = dd_sub(m, 1.0);
  if (std::fabs(d.hi) < 0x1p-6) {
    lm = log1p_series(d);
  } else {
    double y0 = std::log(m.hi);
    DD t = dd_exp(DD(-y0));
    DD v = dd_sub(dd_mul(m, t), 1.0);
    lm = dd_add(DD(y0), v);
  }
  if (k == 0)
    return lm;

  Expansion e;
  double kd = k;
  for (int i = 0; i < 3; ++i)
    e.add(kd * kLn2Chunks[i]);
  e.add(two_prod(kd, kLn2Chunks[3]));
  e.add(lm);
  return e.to_dd();
}

DD dd_log1p(const DD &u) {
  if (u.is_nan() || u.hi < -1.0)
    return nan_dd();
  if (std::fabs(u.hi) < 0x1p-6)
    return u.hi == 0.0 ? u : log1p_series(u);
  return dd_log(dd_add(u, 1.0));
}

DD dd_sqrt(const DD &x) {
  if (std::isnan(x.hi) || x.hi < 0.0)
    return nan_dd();
  if (x.hi == 0.0)
    return {x.hi, 0.0};
  if (std::isinf(x.hi))
    return {kInf, 0.0};
  int e = std::ilogb(x.hi);
  int sc = 0;
  DD a = x;
  if (e > 900 || e < -900) {
    sc = e & ~1;
    a = dd_ldexp(x, -sc);
  }
  double y = std::sqrt(a.hi);
  DD d = dd_sub(a, two_prod(y, y));
  DD r = fast_two_sum(y, d.hi / (2.0 * y));
  return sc != 0 ? dd_ldexp(r, sc / 2) : r;
}

DD dd_cbrt(const DD &x) {
  if (std::isnan(x.hi))
    return nan_dd();
  if (x.hi == 0.0 || std::isinf(x.hi))
    return {x.hi, 0.0};
  bool neg = x.hi < 0.0;
  DD a = dd_abs(x);
  int e = std::ilogb(a.hi);
  int sc = 0;
  if (e > 600 || e < -600) {
    sc = 3 * (e / 3);
    a = dd_ldexp(a, -sc);
  }
  double y = std::cbrt(a.hi);
  DD y3 = dd_mul(two_prod(y, y), y);
  DD d = dd_sub(a, y3);
  DD r = fast_two_sum(y, d.hi / (3.0 * y * y));
  if (sc != 0)
    r = dd_ldexp(r, sc / 3);
  return neg ? dd_neg(r) : r;
}

DD dd_pow(const DD &x, const DD &y) {
  if (x.is_nan() || y.is_nan() || x.hi < 0.0)
    return nan_dd();
  if (y.hi == 0.0 || (x.hi == 1.0 && x.lo == 0.0))
    return {1.0, 0.0};
  if (x.hi == 0.0)
    return y.hi > 0.0 ? DD(0.0) : DD(kInf);
  if (std::isinf(x.hi))
    return y.hi > 0.0 ? DD(kInf) : DD(0.0);
  if (y.lo == 0.0 && y.hi == std::nearbyint(y.hi) && std::fabs(y.hi) <= 64.0 &&
      std::fabs(std::log2(x.hi)) * std::fabs(y.hi) < 960.0) {
    auto n = static_cast<int>(std::fabs(y.hi));
    DD r(1.0);
    DD b = x;
    while (n != 0) {
      if (n & 1)
        r = dd_mul(r, b);
      n >>= 1;
      if (n != 0)
        b = dd_sqr(b);
    }
    return y.hi < 0.0 ? dd_div(DD(1.0), r) : r;
  }
  DD t = dd_mul(y, dd_log(x));
  if (t.is_nan())
    return nan_dd();
  return dd_exp(t);
}

DD dd_asin(const DD &x) {
  if (x.is_nan() || std::fabs(x.hi) > 1.0 ||
      (std::fabs(x.hi) == 1.0 && x.lo * x.hi > 0.0))
    return nan_dd();
  if (x.hi == 0.0)
    return x;
  bool neg = x.hi < 0.0;
  DD a = dd_abs(x);
  DD r;
  if (a.hi <= 0.5) {
    double y0 = std::asin(a.hi);
    DD s = sin_core(DD(y0));
    DD c = cos_core(DD(y0));
    r = dd_add(DD(y0), dd_div(dd_sub(a, s), c));
  } else {
    DD z = dd_ldexp(dd_sub(DD(1.0), a), -1);
    DD t = dd_asin(dd_sqrt(z));
    r = dd_sub(ddconst::kPio2, dd_ldexp(t, 1));
  }
  return neg ? dd_neg(r) : r;
}

DD dd_acos(const DD &x) {
  if (x.is_nan() || std::fabs(x.hi) > 1.0 ||
      (std::fabs(x.hi) == 1.0 && x.lo * x.hi > 0.0))
    return nan_dd();
  if (x.hi == 1.0 && x.lo == 0.0)
    return {0.0, 0.0};
  if (std::fabs(x.hi) <= 0.5)
    return dd_sub(ddconst::kPio2, dd_asin(x));
  if (x.hi > 0.0) {
    DD z = dd_ldexp(dd_sub(DD(1.0), x), -1);
    return dd_ldexp(dd_asin(dd_sqrt(z)), 1);
  }
  DD z = dd_ldexp(dd_add(x, 1.0), -1);
  return dd_sub(ddconst::kPi, dd_ldexp(dd_asin(dd_sqrt(z)), 1));
}

float dd_to_float(const DD &x) {
  auto f = static_cast<float>(x.hi);
  if (x.lo == 0.0 || !std::isfinite(x.hi))
    return f;
  if (std::isinf(f)) {
    // hi sits exactly on the overflow midpoint and lo pulls it back.
    constexpr double kMid = 0x1.ffffffp127;
    if (std::fabs(x.hi) == kMid && (x.lo < 0.0) == (x.hi > 0.0))
      return x.hi > 0.0 ? FLT_MAX : -FLT_MAX;
    return f;
  }
  double d = x.hi - static_cast<double>(f);
  if (d == 0.0)
    return f;
  float g = std::nextafter(f, d > 0.0 ? std::numeric_limits<float>::infinity()
                                      : -std::numeric_limits<float>::infinity());
  double mid = 0.5 * (static_cast<double>(f) + static_cast<double>(g));
  if (x.hi == mid && (x.lo > 0.0) == (d > 0.0))
    return g;
  return f;
}

} // namespace floatscope
