#include <doctest.h>

#include <cmath>

#include "floatscope/lns.hpp"
#include "oracle.hpp"

using namespace floatscope;

namespace {

// log2(1 +- 2^d) at 1300 bits: 2^d stays representable next to 1 down to
// d = -1080 only with that much precision.
double phi_ref(double d, bool plus, oracle::Mp &out) {
  oracle::Mp t(1300);
  mpfr_set_d(t, d, MPFR_RNDN);
  mpfr_exp2(t, t, MPFR_RNDN);
  if (plus)
    mpfr_add_ui(t, t, 1, MPFR_RNDN);
  else
    mpfr_ui_sub(t, 1, t, MPFR_RNDN);
  mpfr_log2(out, t, MPFR_RNDN);
  return out.d();
}

const double kLog2_1e600 = 600.0 * std::log2(10.0); // 1993.16

} // namespace

TEST_CASE("phi examples") {
  CHECK(phi_plus(0.0) == 1.0);
  CHECK(phi_minus(-1.0) == -1.0);
  CHECK(std::isinf(phi_minus(0.0)));
  CHECK(phi_minus(0.0) < 0.0);
  oracle::Mp ref(1300);
  phi_ref(-1075.0, true, ref);
  CHECK(oracle::ulps_from(phi_plus(-1075.0), ref) <= 2.0);
}

TEST_CASE("phi within 2 ulps of MPFR") {
  oracle::Rng rng(5);
  oracle::Mp ref(1300);
  for (int i = 0; i < 2000; ++i) {
    double d = -std::exp2(rng.uniform(-20.0, std::log2(1080.0)));
    phi_ref(d, true, ref);
    REQUIRE(oracle::ulps_from(phi_plus(d), ref) <= 2.0);
    phi_ref(d, false, ref);
    REQUIRE(oracle::ulps_from(phi_minus(d), ref) <= 2.0);
  }
}

TEST_CASE("scale operations") {
  LNS a{false, kLog2_1e600, false};
  LNS sq = lns_mul(a, a);
  CHECK(sq.logmag == doctest::Approx(2 * kLog2_1e600));
  LNS r = lns_sqrt(a);
  CHECK(r.logmag == doctest::Approx(996.58).epsilon(1e-5));
  LNS one{false, 0.0, false};
  LNS same = lns_mul(a, one);
  CHECK(same.logmag == a.logmag);
  CHECK(same.negative == a.negative);
  CHECK(lns_div(a, a).logmag == 0.0);
  CHECK(lns_cbrt(LNS{true, 3.0, false}).logmag == 1.0);
  CHECK(lns_cbrt(LNS{true, 3.0, false}).negative);
  CHECK(lns_pow(LNS{false, 2.0, false}, 3.0).logmag == 6.0);
  CHECK(lns_pow(LNS{true, 2.0, false}, 0.5).is_undefined());
  CHECK(lns_pow(LNS{true, 2.0, false}, 3.0).negative);
  CHECK_FALSE(lns_pow(LNS{true, 2.0, false}, 2.0).negative);
  LNS inf = lns_div(one, LNS::zero());
  CHECK(std::isinf(inf.logmag));
}

TEST_CASE("addition in log space") {
  LNS a{false, kLog2_1e600, false};
  LNS one{false, 0.0, false};
  LNS s = lns_add(a, one);
  CHECK(s.logmag == a.logmag);
  CHECK(lns_add(a, LNS::zero()).logmag == a.logmag);
  LNS p{false, 10.0, false}, m{true, 10.0, false};
  CHECK(lns_add(p, m).is_zero);
  CHECK(lns_sub(p, p).is_zero);
  // 2^10 - 2^9 = 2^9
  CHECK(lns_sub(p, LNS{false, 9.0, false}).logmag == doctest::Approx(9.0));
  CHECK(lns_add(LNS{true, 9.0, false}, p).negative == false);
}

TEST_CASE("exp and log in log space") {
  LNS big{false, kLog2_1e600, false};
  LNS l = lns_log(big);
  CHECK(lns_value(l) == doctest::Approx(600.0 * std::log(10.0)));
  CHECK(l.logmag == doctest::Approx(10.43).epsilon(1e-3));

  LNS e = lns_exp(LNS{false, std::log2(1e100), false});
  // The represented value 2^(1e100 log2 e) is far beyond any format.
  CHECK(e.logmag == doctest::Approx(1e100 * M_LOG2E));
  LNS e0 = lns_exp(LNS::zero());
  CHECK(e0.logmag == 0.0);
  CHECK_FALSE(e0.is_zero);
  CHECK(lns_log(LNS{true, 3.0, false}).is_undefined());
}

TEST_CASE("functions of out-of-range values") {
  RangeVerdict v = lns_unsupported(Op::Sin, LNS{false, 2000.0, false});
  CHECK(v.kind == VerdictKind::InRangeUnknown);
  v = lns_unsupported(Op::Sin, LNS{false, -2000.0, false});
  CHECK(v.kind == VerdictKind::OutOfRangePreserved);
  CHECK(v.value.logmag == -2000.0);
  v = lns_unsupported(Op::Cos, LNS{false, -2000.0, false});
  CHECK(v.kind == VerdictKind::InRangeValue);
  CHECK(v.in_range == 1.0);
  CHECK(v.benign);
  v = lns_unsupported(Op::Acos, LNS{false, -2000.0, false});
  CHECK(v.kind == VerdictKind::InRangeValue);
  CHECK(v.in_range == doctest::Approx(M_PI / 2));
  v = lns_unsupported(Op::Asin, LNS{true, -2000.0, false});
  CHECK(v.kind == VerdictKind::OutOfRangePreserved);
  CHECK(v.value.negative);
}
