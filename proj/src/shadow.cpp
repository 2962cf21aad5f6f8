#include "floatscope/shadow.hpp"

#include <limits>

namespace floatscope {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log2 of the binary32 overflow threshold 2^128 (1 - 2^-25).
const double kFloatOverflowLog = 128.0 + std::log2(1.0 - 0x1p-25);

DSLValue from_dd(const DD &r) {
  DSLValue v;
  v.dd = r;
  v.negative = std::signbit(r.hi);
  v.is_zero = r.hi == 0.0;
  v.logmag = v.is_zero ? 0.0 : dd_to_lns(r).logmag;
  return v;
}

DSLValue undefined_value() {
  DSLValue v;
  v.dd = {std::nan(""), std::nan("")};
  v.logmag = std::nan("");
  v.undefined = true;
  return v;
}

DSLValue unknown_value() {
  DSLValue v;
  v.dd = {std::nan(""), std::nan("")};
  v.logmag = std::nan("");
  v.unknown = true;
  return v;
}

DSLValue out_of_range(const LNS &l, RangeState s, int provenance) {
  DSLValue v;
  v.dd = {std::nan(""), std::nan("")};
  v.negative = l.negative;
  v.logmag = l.logmag;
  v.range = s;
  v.provenance = provenance;
  return v;
}

bool is_integer(double y) { return std::isfinite(y) && y == std::nearbyint(y); }

bool is_odd_integer(double y) {
  return is_integer(y) && std::fabs(y) < 0x1p53 && std::fmod(y, 2.0) != 0.0;
}

double dd_value(const DSLValue &v) { return v.dd.hi + v.dd.lo; }

// Diagnostic for a definite domain violation on in-range operands.
std::string domain_violation(Op op, std::span<const DSLValue> in) {
  const DD &x = in[0].dd;
  switch (op) {
  case Op::Sqrt:
    if (x.hi < 0.0)
      return "sqrt of a negative value";
    break;
  case Op::Log:
    if (x.hi <= 0.0)
      return x.hi == 0.0 ? "log of zero" : "log of a negative value";
    break;
  case Op::Acos:
  case Op::Asin:
    if (std::fabs(x.hi) > 1.0 || (std::fabs(x.hi) == 1.0 && x.lo * x.hi > 0.0))
      return std::string(op_name(op)) + " argument outside [-1, 1]";
    break;
  case Op::Pow:
    if (x.hi < 0.0 && !is_integer(dd_value(in[1])))
      return "pow of a negative base with a non-integer exponent";
    break;
  case Op::Div:
    if (x.hi == 0.0 && in[1].dd.hi == 0.0)
      return "division of zero by zero";
    break;
  default:
    break;
  }
  return {};
}

DD apply_dd(Op op, std::span<const DSLValue> in) {
  return dd_apply(op, in[0].dd, arity(op) == 2 ? in[1].dd : DD());
}

// True when the exact result of op is nonzero, so a zero dd result means
// the carrier underflowed.
bool nonzero_result(Op op, std::span<const DSLValue> in) {
  switch (op) {
  case Op::Mul:
    return !in[0].is_zero && !in[1].is_zero;
  case Op::Div:
    return !in[0].is_zero;
  case Op::Exp:
    return true;
  case Op::Pow:
    return !in[0].is_zero;
  default:
    return false;
  }
}

LNS apply_lns(Op op, std::span<const DSLValue> in) {
  LNS a = in[0].range == RangeState::InRange ? dd_to_lns(in[0]) : in[0].lns();
  LNS b;
  if (arity(op) == 2)
    b = in[1].range == RangeState::InRange ? dd_to_lns(in[1]) : in[1].lns();
  switch (op) {
  case Op::Neg:
    return lns_neg(a);
  case Op::Add:
    return lns_add(a, b);
  case Op::Sub:
    return lns_sub(a, b);
  case Op::Mul:
    return lns_mul(a, b);
  case Op::Div:
    return lns_div(a, b);
  case Op::Sqrt:
    return lns_sqrt(a);
  case Op::Cbrt:
    return lns_cbrt(a);
  case Op::Log:
    return lns_log(a);
  case Op::Exp:
    if (in[0].range == RangeState::InRange) {
      DD t = dd_mul(in[0].dd, ddconst::kLog2e);
      return {false, t.hi + t.lo, false};
    }
    return lns_exp(a);
  case Op::Pow: {
    double y = in[1].range == RangeState::InRange ? dd_value(in[1]) : lns_value(b);
    if (in[0].range == RangeState::InRange && in[1].range == RangeState::InRange &&
        !a.is_zero && y != 0.0) {
      LNS r = lns_pow(a, y);
      if (!r.is_undefined() && a.logmag != 0.0) {
        DD t = dd_mul(DD(a.logmag), in[1].dd);
        r.logmag = t.hi + t.lo;
      }
      return r;
    }
    return lns_pow(a, y);
  }
  default:
    return LNS::undefined();
  }
}

std::vector<RangeSource> out_of_range_sources(std::span<const DSLValue> in) {
  std::vector<RangeSource> s;
  for (std::size_t i = 0; i < in.size(); ++i)
    if (in[i].range != RangeState::InRange)
      s.push_back({static_cast<int>(i), in[i].provenance, in[i].range, in[i].logmag});
  return s;
}

bool is_trig(Op op) {
  return op == Op::Sin || op == Op::Cos || op == Op::Tan || op == Op::Acos ||
         op == Op::Asin;
}

ShadowResult domain_error(int op_index, std::string diag) {
  ShadowResult r;
  r.value = undefined_value();
  RangeEvent ev;
  ev.kind = RangeEventKind::DomainError;
  ev.op_index = op_index;
  ev.diagnostic = std::move(diag);
  r.events.push_back(std::move(ev));
  return r;
}

} // namespace

std::string_view range_state_name(RangeState s) {
  switch (s) {
  case RangeState::InRange:
    return "in-range";
  case RangeState::Overflowed:
    return "overflowed";
  case RangeState::Underflowed:
    return "underflowed";
  }
  return "?";
}

LNS dd_to_lns(const DD &x) {
  if (x.hi == 0.0)
    return LNS::zero(std::signbit(x.hi));
  DD l = dd_log(dd_abs(x));
  DD l2 = dd_mul(l, ddconst::kLog2e);
  return {x.hi < 0.0, l2.hi + l2.lo, false};
}

LNS dd_to_lns(const DSLValue &v) {
  if (v.range != RangeState::InRange || v.undefined)
    return v.lns();
  return dd_to_lns(v.dd);
}

DD lns_to_dd(const LNS &a) {
  if (a.is_zero)
    return {a.negative ? -0.0 : 0.0, 0.0};
  return {lns_value(a), 0.0};
}

RangeState classify(const LNS &a, Format f) {
  if (a.is_zero || a.is_undefined())
    return RangeState::InRange;
  if (f == Format::Binary64) {
    if (a.logmag >= 1024.0)
      return RangeState::Overflowed;
    if (a.logmag <= -1075.0)
      return RangeState::Underflowed;
    return RangeState::InRange;
  }
  if (a.logmag >= kFloatOverflowLog)
    return RangeState::Overflowed;
  if (a.logmag <= -150.0)
    return RangeState::Underflowed;
  return RangeState::InRange;
}

RangeState classify(const DD &x, Format f) {
  double r = round_to_format(x, f);
  if (std::isinf(r))
    return RangeState::Overflowed;
  if (r == 0.0 && x.hi != 0.0)
    return RangeState::Underflowed;
  return RangeState::InRange;
}

DSLValue make_shadow(double value, Format f, bool exact, double residual) {
  DSLValue v = from_dd(fast_two_sum(round_to_format(value, f), residual));
  v.exact = exact;
  return v;
}

DSLValue make_constant_shadow(NamedConstant c, Format f) {
  ConstantValue k = resolve_constant(c);
  DD full(k.value, k.residual);
  double v = round_to_format(k.value, f);
  DD r = dd_sub(full, v);
  return make_shadow(v, f, false, r.hi);
}

ShadowResult shadow_apply(Op op, std::span<const DSLValue> in, int op_index,
                          Format f) {
  ShadowResult res;
  for (const DSLValue &v : in) {
    if (v.undefined) {
      res.value = undefined_value();
      return res;
    }
  }

  for (const DSLValue &v : in) {
    if (v.unknown) {
      res.value = unknown_value();
      return res;
    }
  }

  bool all_in = true;
  for (const DSLValue &v : in)
    all_in = all_in && v.range == RangeState::InRange;

  if (all_in) {
    if (std::string diag = domain_violation(op, in); !diag.empty())
      return domain_error(op_index, std::move(diag));

    DD r = apply_dd(op, in);
    if (r.is_finite() && !(r.hi == 0.0 && nonzero_result(op, in))) {
      RangeState s = classify(r, f);
      if (s == RangeState::InRange) {
        res.value = from_dd(r);
        return res;
      }
      res.value = out_of_range(dd_to_lns(r), s, op_index);
      res.events.push_back({RangeEventKind::Departure, op_index, {}, false, {}});
      return res;
    }

    // The binary64 carrier overflowed or underflowed: redo the operation in
    // log space.
    LNS l = apply_lns(op, in);
    if (l.is_undefined())
      return domain_error(op_index, std::string(op_name(op)) + " is undefined here");
    RangeState s = classify(l, f);
    if (s == RangeState::InRange) {
      res.value = from_dd(lns_to_dd(l));
      return res;
    }
    res.value = out_of_range(l, s, op_index);
    res.events.push_back({RangeEventKind::Departure, op_index, {}, false, {}});
    return res;
  }

  std::vector<RangeSource> sources = out_of_range_sources(in);
  int inherited = sources.front().provenance;

  if (is_trig(op)) {
    RangeVerdict verdict = lns_unsupported(op, in[0].lns());
    switch (verdict.kind) {
    case VerdictKind::DomainError:
      return domain_error(op_index,
                          std::string(op_name(op)) + " argument outside [-1, 1]");
    case VerdictKind::OutOfRangePreserved:
      res.value = out_of_range(verdict.value, in[0].range, inherited);
      return res;
    case VerdictKind::InRangeUnknown:
      res.value = unknown_value();
      break;
    case VerdictKind::InRangeValue:
      res.value = from_dd(DD(verdict.in_range));
      break;
    }
    res.events.push_back(
        {RangeEventKind::Reentry, op_index, std::move(sources), verdict.benign, {}});
    return res;
  }

  LNS l = apply_lns(op, in);
  if (l.is_undefined())
    return domain_error(op_index, std::string(op_name(op)) + " is undefined here");
  RangeState s = classify(l, f);
  if (s != RangeState::InRange) {
    res.value = out_of_range(l, s, inherited);
    return res;
  }

  DD d = lns_to_dd(l);
  if ((op == Op::Add || op == Op::Sub) && sources.size() == 1 &&
      sources[0].state == RangeState::Underflowed) {
    // The underflowed addend is absorbed; the in-range operand is a better
    // value than the log-space one.
    int other = 1 - sources[0].arg;
    d = in[other].dd;
    if (op == Op::Sub && other == 1)
      d = dd_neg(d);
  }
  res.value = from_dd(d);
  bool benign = op == Op::Exp && in[0].range == RangeState::Underflowed;
  res.events.push_back(
      {RangeEventKind::Reentry, op_index, std::move(sources), benign, {}});
  return res;
}

DD dd_apply(Op op, const DD &x, const DD &y) {
  DD r = x;
  switch (op) {
  case Op::Neg:
    r = dd_neg(x);
    break;
  case Op::Add:
    r = dd_add(x, y);
    break;
  case Op::Sub:
    r = dd_sub(x, y);
    break;
  case Op::Mul:
    r = dd_mul(x, y);
    break;
  case Op::Div:
    if (y.hi == 0.0)
      r = x.hi == 0.0 || std::isnan(x.hi)
              ? DD(std::nan(""), 0.0)
              : DD(std::signbit(x.hi) != std::signbit(y.hi) ? -kInf : kInf, 0.0);
    else
      r = dd_div(x, y);
    break;
  case Op::Sqrt:
    r = dd_sqrt(x);
    break;
  case Op::Cbrt:
    r = dd_cbrt(x);
    break;
  case Op::Log:
    r = dd_log(x);
    break;
  case Op::Exp:
    r = dd_exp(x);
    break;
  case Op::Pow: {
    double yv = y.hi + y.lo;
    if (x.hi < 0.0) {
      if (!is_integer(yv))
        return {std::nan(""), 0.0};
      r = dd_pow(dd_neg(x), y);
      if (is_odd_integer(yv))
        r = dd_neg(r);
    } else {
      r = dd_pow(x, y);
    }
    break;
  }
  case Op::Sin:
    r = dd_sin(x);
    break;
  case Op::Cos:
    r = dd_cos(x);
    break;
  case Op::Tan:
    r = dd_tan(x);
    break;
  case Op::Acos:
    r = dd_acos(x);
    break;
  case Op::Asin:
    r = dd_asin(x);
    break;
  }
  if (std::isinf(r.hi))
    r.lo = 0.0;
  return r;
}

double native_apply(Op op, double a, double b, Format f) {
  if (f == Format::Binary32) {
    auto x = static_cast<float>(a);
    auto y = static_cast<float>(b);
    float r = 0.0f;
    switch (op) {
    case Op::Neg: r = -x; break;
    case Op::Add: r = x + y; break;
    case Op::Sub: r = x - y; break;
    case Op::Mul: r = x * y; break;
    case Op::Div: r = x / y; break;
    case Op::Sqrt: r = std::sqrt(x); break;
    case Op::Cbrt: r = std::cbrt(x); break;
    case Op::Log: r = std::log(x); break;
    case Op::Exp: r = std::exp(x); break;
    case Op::Pow: r = std::pow(x, y); break;
    case Op::Sin: r = std::sin(x); break;
    case Op::Cos: r = std::cos(x); break;
    case Op::Tan: r = std::tan(x); break;
    case Op::Acos: r = std::acos(x); break;
    case Op::Asin: r = std::asin(x); break;
    }
    return static_cast<double>(r);
  }
  switch (op) {
  case Op::Neg: return -a;
  case Op::Add: return a + b;
  case Op::Sub: return a - b;
  case Op::Mul: return a * b;
  case Op::Div: return a / b;
  case Op::Sqrt: return std::sqrt(a);
  case Op::Cbrt: return std::cbrt(a);
  case Op::Log: return std::log(a);
  case Op::Exp: return std::exp(a);
  case Op::Pow: return std::pow(a, b);
  case Op::Sin: return std::sin(a);
  case Op::Cos: return std::cos(a);
  case Op::Tan: return std::tan(a);
  case Op::Acos: return std::acos(a);
  case Op::Asin: return std::asin(a);
  }
  return a;
}

std::vector<double> evaluate_native(const Expr &e, const InputVector &inputs,
                                    Format f) {
  std::vector<double> v(e.nodes().size());
  for (std::size_t i = 0; i < e.nodes().size(); ++i) {
    const Node &n = e.node(static_cast<int>(i));
    switch (n.kind) {
    case NodeKind::Variable:
      v[i] = round_to_format(inputs[n.variable], f);
      break;
    case NodeKind::Literal:
      v[i] = e.literals()[n.literal].value(f);
      break;
    case NodeKind::Constant:
      v[i] = round_to_format(resolve_constant(n.constant).value, f);
      break;
    default:
      v[i] = native_apply(n.op, v[n.children[0]],
                          n.kind == NodeKind::Binary ? v[n.children[1]] : 0.0, f);
      break;
    }
  }
  return v;
}

} // namespace floatscope
