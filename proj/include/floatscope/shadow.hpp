#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "floatscope/dd.hpp"
#include "floatscope/expr.hpp"
#include "floatscope/format.hpp"
#include "floatscope/lns.hpp"

namespace floatscope {

enum class RangeState : uint8_t { InRange, Overflowed, Underflowed };

std::string_view range_state_name(RangeState s);

// Shadow value: a dd while in range, sign and log2 magnitude always.
struct DSLValue {
  DD dd;
  bool negative = false;
  double logmag = 0.0;
  bool is_zero = false;
  bool exact = false;
  RangeState range = RangeState::InRange;
  int provenance = -1;
  // In range, but the magnitude is not known (trig of an overflowed value).
  bool unknown = false;
  // Produced by a domain error upstream.
  bool undefined = false;

  LNS lns() const { return {negative, logmag, is_zero}; }
  bool usable() const { return !unknown && !undefined; }
};

struct NativeValue {
  double value = 0.0; // binary32 values are stored widened
  Format format = Format::Binary64;
};

DSLValue make_shadow(double value, Format f, bool exact, double residual = 0.0);
DSLValue make_constant_shadow(NamedConstant c, Format f);

LNS dd_to_lns(const DD &x);
LNS dd_to_lns(const DSLValue &v);
DD lns_to_dd(const LNS &a);

RangeState classify(const LNS &a, Format f);
RangeState classify(const DD &x, Format f);

enum class RangeEventKind { Departure, Reentry, DomainError };

struct RangeSource {
  int arg = 0;
  int provenance = -1;
  RangeState state = RangeState::InRange;
  double logmag = 0.0;
};

struct RangeEvent {
  RangeEventKind kind = RangeEventKind::Departure;
  int op_index = -1;
  std::vector<RangeSource> sources;
  // Reentry whose native result is already correctly rounded
  // (cos or exp of an underflowed value).
  bool benign = false;
  std::string diagnostic;
};

struct ShadowResult {
  DSLValue value;
  std::vector<RangeEvent> events;
};

ShadowResult shadow_apply(Op op, std::span<const DSLValue> inputs, int op_index,
                          Format f);

// Native evaluation in the target format; one value per node, root last.
std::vector<double> evaluate_native(const Expr &e, const InputVector &inputs,
                                    Format f);

double native_apply(Op op, double a, double b, Format f);

// The operation on dd values alone, with no range tracking. Domain
// violations give NaN; an infinite primary comes back as (inf, 0).
DD dd_apply(Op op, const DD &x, const DD &y = {});

} // namespace floatscope
