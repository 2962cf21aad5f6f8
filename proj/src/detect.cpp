#include "floatscope/detect.hpp"

#include <algorithm>
#include <stdexcept>

namespace floatscope {

namespace {

using EK = ErrorKind;

std::vector<ConditionSpec> build_specs() {
  std::vector<ConditionSpec> t(kOpKinds);
  for (int i = 0; i < kOpKinds; ++i)
    t[i].op = static_cast<Op>(i);
  auto at = [&](Op op) -> ConditionSpec & { return t[static_cast<int>(op)]; };

  at(Op::Add).args = {
      {"|x / (x + y)|", {{EK::Cancellation, "|x / (x + y)|", "x ~ -y"}}},
      {"|y / (x + y)|", {{EK::Cancellation, "|y / (x + y)|", "x ~ -y"}}}};
  at(Op::Sub).args = {
      {"|x / (x - y)|", {{EK::Cancellation, "|x / (x - y)|", "x ~ y"}}},
      {"|y / (x - y)|", {{EK::Cancellation, "|y / (x - y)|", "x ~ y"}}}};
  at(Op::Sqrt).constant = 0.5;
  at(Op::Cbrt).constant = 1.0 / 3.0;
  at(Op::Log).args = {
      {"|1 / log x|", {{EK::Cancellation, "|1 / log x|", "x ~ 1"}}}};
  at(Op::Exp).args = {{"|x|", {{EK::Sensitivity, "|x|", "|x| >> 1"}}}};
  at(Op::Pow).args = {
      {"|y|", {{EK::Sensitivity, "|y|", "|y| >> 1"}}},
      {"|y log x|", {{EK::Sensitivity, "|y log x|", "|y log x| >> 1"}}}};
  at(Op::Sin).args = {{"|x / tan x|",
                       {{EK::Sensitivity, "|x|", "|x| >> 1"},
                        {EK::Cancellation, "|1 / tan x|", "x ~ k pi"}}}};
  at(Op::Cos).args = {{"|x tan x|",
                       {{EK::Sensitivity, "|x|", "|x| >> 1"},
                        {EK::Cancellation, "|tan x|", "x ~ k pi + pi/2"}}}};
  at(Op::Tan).args = {{"|x (tan x + 1 / tan x)|",
                       {{EK::Sensitivity, "|x|", "|x| >> 1"},
                        {EK::Cancellation, "|tan x + 1 / tan x|", "x ~ k pi / 2"}}}};
  at(Op::Acos).args = {{"|x / (sqrt(1 - x^2) acos x)|",
                        {{EK::Cancellation, "|x / (sqrt(1 - x^2) acos x)|", "|x| ~ 1"}}}};
  at(Op::Asin).args = {{"|x / (sqrt(1 - x^2) asin x)|",
                        {{EK::Cancellation, "|x / (sqrt(1 - x^2) asin x)|", "|x| ~ 1"}}}};
  return t;
}

bool above(double v, double threshold) { return !std::isnan(v) && v > threshold; }

bool is_add_sub(Op op) { return op == Op::Add || op == Op::Sub; }

// Per-argument full condition used by the error recurrence; unlike the
// detection table this includes the unit factors of neg, * and /.
double bound_gamma(Op op, const ConditionValues &cv, int arg) {
  switch (op) {
  case Op::Neg:
  case Op::Mul:
  case Op::Div:
    return 1.0;
  case Op::Sqrt:
    return 0.5;
  case Op::Cbrt:
    return 1.0 / 3.0;
  default:
    return cv.args[arg].present ? cv.args[arg].full : 0.0;
  }
}

} // namespace

std::string_view error_kind_name(ErrorKind k) {
  switch (k) {
  case ErrorKind::Cancellation:
    return "cancellation";
  case ErrorKind::Sensitivity:
    return "sensitivity";
  case ErrorKind::OverflowRescue:
    return "overflow-rescue";
  case ErrorKind::UnderflowRescue:
    return "underflow-rescue";
  case ErrorKind::OracleMismatch:
    return "oracle-mismatch";
  case ErrorKind::NativeOverflow:
    return "native-overflow";
  case ErrorKind::NativeUnderflow:
    return "native-underflow";
  }
  return "?";
}

const ConditionSpec &condition_spec(Op op) {
  static const std::vector<ConditionSpec> table = build_specs();
  return table.at(static_cast<std::size_t>(op));
}

ConditionValues condition_values(Op op, std::span<const DSLValue> inputs) {
  DD x[2];
  for (std::size_t i = 0; i < inputs.size() && i < 2; ++i)
    x[i] = inputs[i].dd;
  return condition_values_of<DD>(op, x);
}

std::vector<Explanation> check_condition(int op_index, const ConditionValues &cv,
                                         std::span<const bool> exact_args,
                                         double threshold, const DetectOptions &opts) {
  if (!(threshold > 0.0))
    throw std::invalid_argument("threshold must be positive");
  std::vector<Explanation> out;
  for (int a = 0; a < 2; ++a) {
    const ArgumentCondition &ac = cv.args[a];
    if (!ac.present)
      continue;
    if (opts.suppress_exact && a < static_cast<int>(exact_args.size()) && exact_args[a])
      continue;
    if (!above(ac.full, threshold))
      continue;
    bool any = false;
    for (int s = 0; s < ac.nsplits; ++s) {
      if (above(ac.splits[s].value, threshold)) {
        out.push_back({ac.splits[s].kind, op_index, a, ac.splits[s].value, {}});
        any = true;
      }
    }
    if (!any) {
      int dom = 0;
      for (int s = 1; s < ac.nsplits; ++s)
        if (ac.splits[s].value > ac.splits[dom].value)
          dom = s;
      out.push_back({ac.splits[dom].kind, op_index, a, ac.full, {}});
    }
  }
  return out;
}

std::vector<Explanation> check_condition(int op_index, Op op,
                                         std::span<const DSLValue> inputs,
                                         double threshold, const DetectOptions &opts) {
  bool exact[2] = {false, false};
  for (std::size_t i = 0; i < inputs.size() && i < 2; ++i) {
    if (inputs[i].range != RangeState::InRange || !inputs[i].usable())
      return {};
    exact[i] = inputs[i].exact;
  }
  return check_condition(op_index, condition_values(op, inputs),
                         std::span<const bool>(exact, inputs.size()), threshold, opts);
}

RescueResult check_rescue(int op_index, Op op, std::span<const DSLValue> inputs,
                          const DSLValue &output, std::span<const RangeEvent> events,
                          Format f, const DetectOptions &opts) {
  (void)output;
  RescueResult res;
  for (const RangeEvent &ev : events) {
    if (ev.kind != RangeEventKind::Reentry || ev.op_index != op_index)
      continue;
    for (const RangeSource &src : ev.sources) {
      Explanation e;
      e.kind = src.state == RangeState::Overflowed ? ErrorKind::OverflowRescue
                                                   : ErrorKind::UnderflowRescue;
      e.op_index = op_index;
      e.argument = src.arg;
      e.value = src.logmag;
      e.sources.push_back(src.provenance);

      if (opts.suppress_benign && ev.benign) {
        res.suppressed.push_back({std::move(e), "correctly rounded"});
        continue;
      }
      if (opts.suppress_magnitude && is_add_sub(op) && inputs.size() == 2) {
        const DSLValue &other = inputs[1 - src.arg];
        if (other.range == RangeState::InRange && other.usable() && !other.is_zero &&
            src.logmag < other.logmag - suppression_margin(f)) {
          res.suppressed.push_back({std::move(e), "magnitude"});
          continue;
        }
      }
      res.explanations.push_back(std::move(e));
    }
  }
  return res;
}

AccumulatedError propagate_error_bound(const Expr &e, std::span<const DSLValue> shadows,
                                       Format f, ErrorModel model) {
  AccumulatedError acc;
  std::size_t n = e.nodes().size();
  acc.E.assign(n, 0.0);
  acc.c.assign(n, 0.0);
  for (const DSLValue &v : shadows) {
    if (v.range != RangeState::InRange || !v.usable()) {
      acc.applicable = false;
      return acc;
    }
  }
  const double u = unit_roundoff(f);
  auto observed_c = [&](const DSLValue &v) {
    if (v.is_zero)
      return 0.0;
    double r = round_to_format(v.dd, f);
    DD diff = dd_sub(v.dd, r);
    return std::fabs(diff.hi / v.dd.hi);
  };

  for (std::size_t i = 0; i < n; ++i) {
    const Node &node = e.node(static_cast<int>(i));
    const DSLValue &v = shadows[i];
    if (!node.is_op()) {
      double c = v.exact ? 0.0 : (model == ErrorModel::Bound ? u : observed_c(v));
      acc.c[i] = c;
      acc.E[i] = c;
      continue;
    }
    int k = node.kind == NodeKind::Binary ? 2 : 1;
    DSLValue in[2];
    for (int a = 0; a < k; ++a)
      in[a] = shadows[node.children[a]];
    ConditionValues cv = condition_values(node.op, std::span<const DSLValue>(in, k));
    double E = 0.0;
    for (int a = 0; a < k; ++a) {
      double Ej = acc.E[node.children[a]];
      if (Ej == 0.0)
        continue;
      E += bound_gamma(node.op, cv, a) * Ej;
    }
    double c = 0.0;
    if (node.op != Op::Neg)
      c = model == ErrorModel::Bound ? u : observed_c(v);
    acc.c[i] = c;
    acc.E[i] = std::isnan(E) ? INFINITY : E + c;
  }
  return acc;
}

} // namespace floatscope
