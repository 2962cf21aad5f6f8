#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "floatscope/dd.hpp"
#include "floatscope/expr.hpp"
#include "floatscope/shadow.hpp"

namespace floatscope {

enum class ErrorKind : uint8_t {
  Cancellation,
  Sensitivity,
  OverflowRescue,
  UnderflowRescue,
  // Only produced by the dd-oracle mode.
  OracleMismatch,
  NativeOverflow,
  NativeUnderflow,
};

std::string_view error_kind_name(ErrorKind k);

struct SplitSpec {
  ErrorKind kind;
  std::string_view formula;
  std::string_view bad_inputs;
};

struct ArgumentSpec {
  std::string_view full;
  std::vector<SplitSpec> splits;
};

struct ConditionSpec {
  Op op;
  // Empty for operations without a condition entry (neg, *, /).
  std::vector<ArgumentSpec> args;
  // Constant condition that never flags (sqrt 1/2, cbrt 1/3); 0 otherwise.
  double constant = 0.0;
};

const ConditionSpec &condition_spec(Op op);

struct SplitValue {
  ErrorKind kind = ErrorKind::Cancellation;
  double value = 0.0;
};

struct ArgumentCondition {
  bool present = false;
  double full = 0.0;
  int nsplits = 0;
  std::array<SplitValue, 2> splits{};
};

struct ConditionValues {
  std::array<ArgumentCondition, 2> args{};
};

// Arithmetic needed by the condition formulas, specialized per real type.
template <class R> struct RealOps;

template <> struct RealOps<DD> {
  static DD add(const DD &a, const DD &b) { return dd_add(a, b); }
  static DD sub(const DD &a, const DD &b) { return dd_sub(a, b); }
  static DD mul(const DD &a, const DD &b) { return dd_mul(a, b); }
  static DD one_minus_sq(const DD &x) {
    return dd_mul(dd_sub(DD(1.0), x), dd_add(x, 1.0));
  }
  static DD tan(const DD &x) { return dd_tan(x); }
  static DD log(const DD &x) { return dd_log(x); }
  static DD sqrt(const DD &x) { return dd_sqrt(x); }
  static DD acos(const DD &x) { return dd_acos(x); }
  static DD asin(const DD &x) { return dd_asin(x); }
  static double to_double(const DD &x) { return x.hi + x.lo; }
};

namespace detail {

inline double quotient(double num, double den) {
  num = std::fabs(num);
  den = std::fabs(den);
  if (std::isnan(num) || std::isnan(den))
    return std::nan("");
  if (den == 0.0)
    return num == 0.0 ? 0.0 : INFINITY;
  return num / den;
}

inline ArgumentCondition one_split(ErrorKind k, double v) {
  ArgumentCondition a;
  a.present = true;
  a.full = v;
  a.nsplits = 1;
  a.splits[0] = {k, v};
  return a;
}

} // namespace detail

// Condition numbers of op at the given argument values. Intermediate
// quantities prone to cancellation (x +- y, tan x, log x, 1 - x^2) are
// computed in R; the final products and quotients in binary64.
template <class R>
ConditionValues condition_values_of(Op op, const R *x) {
  using O = RealOps<R>;
  using detail::one_split;
  using detail::quotient;
  ConditionValues cv;
  switch (op) {
  case Op::Add:
  case Op::Sub: {
    double s = O::to_double(op == Op::Add ? O::add(x[0], x[1]) : O::sub(x[0], x[1]));
    cv.args[0] = one_split(ErrorKind::Cancellation, quotient(O::to_double(x[0]), s));
    cv.args[1] = one_split(ErrorKind::Cancellation, quotient(O::to_double(x[1]), s));
    break;
  }
  case Op::Log: {
    double l = O::to_double(O::log(x[0]));
    cv.args[0] = one_split(ErrorKind::Cancellation, quotient(1.0, l));
    break;
  }
  case Op::Exp:
    cv.args[0] = one_split(ErrorKind::Sensitivity, std::fabs(O::to_double(x[0])));
    break;
  case Op::Pow: {
    double y = std::fabs(O::to_double(x[1]));
    double base = O::to_double(x[0]);
    double l = std::nan("");
    if (base > 0.0)
      l = O::to_double(O::log(x[0]));
    else if (base < 0.0)
      l = std::log(std::fabs(base));
    cv.args[0] = one_split(ErrorKind::Sensitivity, y);
    cv.args[1] = one_split(ErrorKind::Sensitivity, y * std::fabs(l));
    if (y == 0.0)
      cv.args[1] = one_split(ErrorKind::Sensitivity, 0.0);
    break;
  }
  case Op::Sin:
  case Op::Cos:
  case Op::Tan: {
    double xv = std::fabs(O::to_double(x[0]));
    ArgumentCondition a;
    a.present = true;
    a.nsplits = 2;
    if (xv == 0.0) {
      // Limits at zero: sin and tan have full condition 1, cos has 0.
      double full = op == Op::Cos ? 0.0 : 1.0;
      double other = op == Op::Cos ? 0.0 : INFINITY;
      a.full = full;
      a.splits[0] = {ErrorKind::Sensitivity, 0.0};
      a.splits[1] = {ErrorKind::Cancellation, other};
      cv.args[0] = a;
      break;
    }
    double t = std::fabs(O::to_double(O::tan(x[0])));
    double c = 0.0;
    if (op == Op::Sin)
      c = quotient(1.0, t);
    else if (op == Op::Cos)
      c = t;
    else
      c = t + quotient(1.0, t);
    a.splits[0] = {ErrorKind::Sensitivity, xv};
    a.splits[1] = {ErrorKind::Cancellation, c};
    a.full = op == Op::Sin ? quotient(xv, t) : xv * c;
    cv.args[0] = a;
    break;
  }
  case Op::Acos:
  case Op::Asin: {
    double xv = O::to_double(x[0]);
    if (xv == 0.0) {
      cv.args[0] = one_split(ErrorKind::Cancellation, op == Op::Asin ? 1.0 : 0.0);
      break;
    }
    double w = O::to_double(O::sqrt(O::one_minus_sq(x[0])));
    double f = O::to_double(op == Op::Acos ? O::acos(x[0]) : O::asin(x[0]));
    cv.args[0] = one_split(ErrorKind::Cancellation, quotient(xv, w * f));
    break;
  }
  case Op::Sqrt:
  case Op::Cbrt:
  case Op::Neg:
  case Op::Mul:
  case Op::Div:
    break;
  }
  return cv;
}

// Uses the dd components of the shadows; all inputs must be in range.
ConditionValues condition_values(Op op, std::span<const DSLValue> inputs);

struct Explanation {
  ErrorKind kind = ErrorKind::Cancellation;
  int op_index = -1;
  int argument = -1;              // condition kinds
  double value = 0.0;             // condition value, or ULP distance
  std::vector<int> sources;       // rescue kinds: op indices
};

struct DetectOptions {
  bool suppress_exact = true;
  bool suppress_magnitude = true;
  bool suppress_benign = true;
};

// Per-argument gate on the full condition, then one explanation per split
// above the threshold, or the dominant split if none is.
std::vector<Explanation> check_condition(int op_index, const ConditionValues &cv,
                                         std::span<const bool> exact_args,
                                         double threshold,
                                         const DetectOptions &opts = {});

std::vector<Explanation> check_condition(int op_index, Op op,
                                         std::span<const DSLValue> inputs,
                                         double threshold,
                                         const DetectOptions &opts = {});

struct SuppressedRescue {
  Explanation explanation;
  std::string reason;
};

struct RescueResult {
  std::vector<Explanation> explanations;
  std::vector<SuppressedRescue> suppressed;
};

// ê of the smallest-magnitude operand must be below the largest minus this
// margin for an add/sub rescue to be ignored.
constexpr int suppression_margin(Format f) { return precision_bits(f) + 2; }

RescueResult check_rescue(int op_index, Op op, std::span<const DSLValue> inputs,
                          const DSLValue &output, std::span<const RangeEvent> events,
                          Format f, const DetectOptions &opts = {});

enum class ErrorModel {
  Bound,    // c = unit roundoff per operation
  Observed, // c = |residual / primary| of each operation's shadow
};

struct AccumulatedError {
  bool applicable = true;
  std::vector<double> E; // per node
  std::vector<double> c; // per node
};

AccumulatedError propagate_error_bound(const Expr &e, std::span<const DSLValue> shadows,
                                       Format f, ErrorModel model = ErrorModel::Bound);

} // namespace floatscope
