#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "floatscope/shadow.hpp"
#include "oracle.hpp"

using namespace floatscope;

namespace {

const double kLog2_1e600 = 600.0 * std::log2(10.0);

DSLValue input(double x, Format f = Format::Binary64) { return make_shadow(x, f, false); }

ShadowResult apply1(Op op, const DSLValue &a, int k = 0, Format f = Format::Binary64) {
  DSLValue in[1] = {a};
  return shadow_apply(op, in, k, f);
}

ShadowResult apply2(Op op, const DSLValue &a, const DSLValue &b, int k = 0,
                    Format f = Format::Binary64) {
  DSLValue in[2] = {a, b};
  return shadow_apply(op, in, k, f);
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

} // namespace

TEST_CASE("make_shadow") {
  DSLValue one = make_shadow(1.0, Format::Binary64, true);
  CHECK(one.exact);
  CHECK(one.dd == DD(1.0));
  CHECK(one.logmag == 0.0);
  CHECK(one.range == RangeState::InRange);
  CHECK(one.provenance == -1);

  DSLValue pi = make_constant_shadow(NamedConstant::Pi, Format::Binary64);
  CHECK_FALSE(pi.exact);
  CHECK(pi.dd.lo == ddconst::kPi.lo);
  CHECK(pi.logmag == doctest::Approx(std::log2(M_PI)));

  DSLValue h = make_shadow(100.0, Format::Binary32, false);
  CHECK(h.dd == DD(100.0));
}

TEST_CASE("dd and lns conversions") {
  LNS a = dd_to_lns(DD(1e300));
  CHECK(a.logmag == doctest::Approx(996.578).epsilon(1e-6));
  CHECK(dd_to_lns(DD(1.0)).logmag == 0.0);
  LNS m = dd_to_lns(DD(-2.0));
  CHECK(m.negative);
  CHECK(m.logmag == 1.0);
  CHECK(dd_to_lns(DD(0.0)).is_zero);

  CHECK(lns_to_dd(LNS{false, 0.0, false}) == DD(1.0));
  DD back = lns_to_dd(a);
  CHECK(back.lo == 0.0);
  CHECK(back.hi == doctest::Approx(1e300));
  CHECK(lns_to_dd(LNS::zero()) == DD(0.0));
}

TEST_CASE("range classification follows the target format") {
  CHECK(classify(LNS{false, 1000.0, false}, Format::Binary64) == RangeState::InRange);
  CHECK(classify(LNS{false, 1024.5, false}, Format::Binary64) == RangeState::Overflowed);
  CHECK(classify(LNS{false, 200.0, false}, Format::Binary32) == RangeState::Overflowed);
  CHECK(classify(LNS{false, -1074.0, false}, Format::Binary64) == RangeState::InRange);
  CHECK(classify(LNS{false, -1076.0, false}, Format::Binary64) == RangeState::Underflowed);
  CHECK(classify(LNS{false, -149.0, false}, Format::Binary32) == RangeState::InRange);
  CHECK(classify(LNS{false, -151.0, false}, Format::Binary32) == RangeState::Underflowed);
  CHECK(classify(LNS::zero(), Format::Binary64) == RangeState::InRange);
}

TEST_CASE("overflow departs and sqrt re-enters") {
  DSLValue x = input(1e300);
  ShadowResult sq = apply2(Op::Mul, x, x, 2);
  CHECK(sq.value.range == RangeState::Overflowed);
  CHECK(sq.value.logmag == doctest::Approx(kLog2_1e600).epsilon(1e-9));
  CHECK(sq.value.provenance == 2);
  for (const RangeEvent &ev : sq.events)
    CHECK(ev.kind == RangeEventKind::Departure);

  ShadowResult plus = apply2(Op::Add, make_shadow(1.0, Format::Binary64, true), sq.value, 1);
  CHECK(plus.value.range == RangeState::Overflowed);
  CHECK(plus.value.provenance == 2);

  ShadowResult r = apply1(Op::Sqrt, plus.value, 0);
  CHECK(r.value.range == RangeState::InRange);
  CHECK(r.value.logmag == doctest::Approx(996.578).epsilon(1e-6));
  REQUIRE(r.events.size() == 1);
  CHECK(r.events[0].kind == RangeEventKind::Reentry);
  REQUIRE(r.events[0].sources.size() == 1);
  CHECK(r.events[0].sources[0].provenance == 2);
  CHECK(r.events[0].sources[0].state == RangeState::Overflowed);
}

TEST_CASE("trivial and error cases") {
  ShadowResult s = apply1(Op::Sin, input(0.0));
  CHECK(s.value.dd == DD(0.0));
  CHECK(s.value.range == RangeState::InRange);
  CHECK_FALSE(s.value.exact);

  ShadowResult bad = apply1(Op::Sqrt, input(-1.0));
  CHECK(bad.value.undefined);
  REQUIRE_FALSE(bad.events.empty());
  CHECK(bad.events[0].kind == RangeEventKind::DomainError);

  ShadowResult big = apply1(Op::Sin, apply2(Op::Mul, input(1e300), input(1e300), 1).value);
  CHECK(big.value.unknown);
  REQUIRE(big.events.size() == 1);
  CHECK(big.events[0].kind == RangeEventKind::Reentry);

  ShadowResult c = apply1(Op::Cos, apply2(Op::Mul, input(1e-300), input(1e-300), 1).value);
  CHECK(c.value.dd == DD(1.0));
  REQUIRE(c.events.size() == 1);
  CHECK(c.events[0].benign);
}

TEST_CASE("active component and consistency invariants over the bundled suite") {
  std::ifstream in(FLOATSCOPE_SUITE);
  std::stringstream ss;
  ss << in.rdbuf();
  auto suite = parse_suite(ss.str());
  for (const Benchmark &b : suite) {
    CAPTURE(b.name);
    for (const InputVector &iv : sample_inputs(b, 64, 9)) {
      std::vector<DSLValue> v = oracle::shadow_all(b.body, b.format, iv);
      std::vector<DSLValue> again = oracle::shadow_all(b.body, b.format, iv);
      for (std::size_t i = 0; i < v.size(); ++i) {
        const DSLValue &d = v[i];
        REQUIRE(same_bits(d.dd.hi, again[i].dd.hi));
        REQUIRE(same_bits(d.dd.lo, again[i].dd.lo));
        REQUIRE(same_bits(d.logmag, again[i].logmag));
        if (!d.usable())
          continue;
        if (d.range == RangeState::InRange) {
          CHECK(d.provenance == -1);
          if (!d.is_zero && d.dd.is_finite()) {
            // Normalized dd: the residual is at most half an ulp of the primary.
            CHECK(std::fabs(d.dd.lo) <= std::ldexp(std::fabs(d.dd.hi), -52));
            double l = std::log2(std::fabs(d.dd.hi));
            CHECK(std::fabs(d.logmag - l) <= std::ldexp(std::max(1.0, std::fabs(l)), -50));
          }
        } else {
          // exp of a huge value may push ê itself to infinity.
          CHECK_FALSE(std::isnan(d.logmag));
          CHECK(d.provenance >= 0);
        }
      }
    }
  }
}
