#include "oracle.hpp"

#include <cmath>
#include <cstring>

namespace oracle {

void set_dd(mpfr_ptr out, const DD &x) {
  Mp wide(2200);
  mpfr_set_d(wide, x.hi, MPFR_RNDN);
  mpfr_add_d(wide, wide, x.lo, MPFR_RNDN);
  mpfr_set(out, wide.get(), MPFR_RNDN);
}

bool apply(Op op, mpfr_ptr out, const DD &x, const DD &y) {
  mpfr_prec_t p = mpfr_get_prec(out);
  // Exact operands: a dd spans at most ~2100 bits.
  Mp a(2200), b(2200);
  set_dd(a, x);
  set_dd(b, y);
  mpfr_clear_flags();
  switch (op) {
  case Op::Neg: mpfr_neg(out, a, MPFR_RNDN); break;
  case Op::Add: mpfr_add(out, a, b, MPFR_RNDN); break;
  case Op::Sub: mpfr_sub(out, a, b, MPFR_RNDN); break;
  case Op::Mul: mpfr_mul(out, a, b, MPFR_RNDN); break;
  case Op::Div: mpfr_div(out, a, b, MPFR_RNDN); break;
  case Op::Sqrt: mpfr_sqrt(out, a, MPFR_RNDN); break;
  case Op::Cbrt: mpfr_cbrt(out, a, MPFR_RNDN); break;
  case Op::Log: mpfr_log(out, a, MPFR_RNDN); break;
  case Op::Exp: mpfr_exp(out, a, MPFR_RNDN); break;
  case Op::Pow: mpfr_pow(out, a, b, MPFR_RNDN); break;
  case Op::Sin: mpfr_sin(out, a, MPFR_RNDN); break;
  case Op::Cos: mpfr_cos(out, a, MPFR_RNDN); break;
  case Op::Tan: mpfr_tan(out, a, MPFR_RNDN); break;
  case Op::Acos: mpfr_acos(out, a, MPFR_RNDN); break;
  case Op::Asin: mpfr_asin(out, a, MPFR_RNDN); break;
  }
  (void)p;
  return !mpfr_nan_p(out) && !mpfr_erangeflag_p();
}

double rel_error(const DD &got, mpfr_srcptr ref) {
  Mp g(2200), diff(mpfr_get_prec(ref) + 64);
  set_dd(g, got);
  mpfr_sub(diff, g, ref, MPFR_RNDN);
  if (!mpfr_zero_p(ref))
    mpfr_div(diff, diff, ref, MPFR_RNDN);
  mpfr_abs(diff, diff, MPFR_RNDN);
  return mpfr_get_d(diff, MPFR_RNDU);
}

double rel_error(double got, mpfr_srcptr ref) { return rel_error(DD(got), ref); }

double ulps_from(double got, mpfr_srcptr ref) {
  double r = mpfr_get_d(ref, MPFR_RNDN);
  int e = 0;
  std::frexp(r == 0.0 ? 0x1p-1022 : r, &e);
  double ulp = std::ldexp(1.0, std::max(e - 53, -1074));
  Mp diff(2200);
  mpfr_set_d(diff, got, MPFR_RNDN);
  mpfr_sub(diff, diff, ref, MPFR_RNDN);
  mpfr_abs(diff, diff, MPFR_RNDN);
  mpfr_div_d(diff, diff, ulp, MPFR_RNDN);
  return mpfr_get_d(diff, MPFR_RNDU);
}

std::vector<floatscope::DSLValue> shadow_all(const floatscope::Expr &e, floatscope::Format f,
                                             const floatscope::InputVector &in) {
  using namespace floatscope;
  std::vector<DSLValue> v(e.nodes().size());
  for (std::size_t i = 0; i < e.nodes().size(); ++i) {
    const Node &n = e.node(static_cast<int>(i));
    switch (n.kind) {
    case NodeKind::Variable:
      v[i] = make_shadow(round_to_format(in[n.variable], f), f, true);
      break;
    case NodeKind::Literal: {
      const Literal &l = e.literals()[n.literal];
      v[i] = make_shadow(l.value(f), f, l.exact(f));
      break;
    }
    case NodeKind::Constant:
      v[i] = make_constant_shadow(n.constant, f);
      break;
    default: {
      DSLValue args[2] = {v[n.children[0]], n.children[1] >= 0 ? v[n.children[1]] : DSLValue{}};
      int k = n.kind == NodeKind::Binary ? 2 : 1;
      v[i] = shadow_apply(n.op, std::span<const DSLValue>(args, k), n.op_index, f).value;
    }
    }
  }
  return v;
}

double Rng::logscale(double lo_exp, double hi_exp, bool is_signed) {
  double m = std::exp2(uniform(lo_exp, hi_exp));
  return is_signed && coin() ? -m : m;
}

DD Rng::dd(double lo_exp, double hi_exp, bool is_signed) {
  double hi = logscale(lo_exp, hi_exp, is_signed);
  int e = 0;
  std::frexp(hi, &e);
  double lo = std::ldexp(uniform(-0.5, 0.5), e - 53);
  return floatscope::fast_two_sum(hi, lo);
}

double Rng::any_finite() {
  for (;;) {
    uint64_t bits = gen();
    double x;
    std::memcpy(&x, &bits, sizeof x);
    if (std::isfinite(x))
      return x;
  }
}

} // namespace oracle
