#include "floatscope/refeval.hpp"

#include <atomic>
#include <cmath>
#include <cstring>

namespace floatscope {

BigFloat::BigFloat(mpfr_prec_t prec) {
  mpfr_init2(v_, prec);
  mpfr_set_zero(v_, 1);
  live_ = true;
}

BigFloat::BigFloat(double v, mpfr_prec_t prec) : BigFloat(prec) {
  mpfr_set_d(v_, v, MPFR_RNDN);
}

BigFloat::BigFloat(const BigFloat &o) {
  mpfr_init2(v_, o.precision());
  mpfr_set(v_, o.v_, MPFR_RNDN);
  live_ = true;
}

BigFloat::BigFloat(BigFloat &&o) noexcept {
  // Steal the limbs; leave o in a valid empty state.
  std::memcpy(v_, o.v_, sizeof(mpfr_t));
  live_ = o.live_;
  o.live_ = false;
}

BigFloat &BigFloat::operator=(const BigFloat &o) {
  if (this != &o) {
    if (!live_) {
      mpfr_init2(v_, o.precision());
      live_ = true;
    }
    mpfr_set_prec(v_, o.precision());
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  return *this;
}

BigFloat &BigFloat::operator=(BigFloat &&o) noexcept {
  if (this != &o) {
    if (live_)
      mpfr_clear(v_);
    std::memcpy(v_, o.v_, sizeof(mpfr_t));
    live_ = o.live_;
    o.live_ = false;
  }
  return *this;
}

BigFloat::~BigFloat() {
  if (live_)
    mpfr_clear(v_);
}

double BigFloat::round_to(Format f) const {
  if (f == Format::Binary32)
    return static_cast<double>(mpfr_get_flt(v_, MPFR_RNDN));
  return mpfr_get_d(v_, MPFR_RNDN);
}

void use_wide_exponent_range() {
  mpfr_set_emin(mpfr_get_emin_min());
  mpfr_set_emax(mpfr_get_emax_max());
}

std::vector<int> precision_ladder(int min_precision, int max_precision) {
  std::vector<int> l;
  for (int p = min_precision; p < max_precision; p *= 2)
    l.push_back(p);
  l.push_back(max_precision);
  return l;
}

namespace {

enum class St { Ok, Domain, Unsure };

using Fn = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t);

bool finite(const Interval &x) {
  return mpfr_number_p(x.lo.get()) && mpfr_number_p(x.hi.get());
}

bool has_nan(const Interval &x) { return mpfr_nan_p(x.lo.get()) || mpfr_nan_p(x.hi.get()); }

class Evaluator {
public:
  explicit Evaluator(mpfr_prec_t p) : p_(p), pi_{BigFloat(p), BigFloat(p)} {
    mpfr_const_pi(pi_.lo.get(), MPFR_RNDD);
    mpfr_const_pi(pi_.hi.get(), MPFR_RNDU);
  }

  Interval make() const { return {BigFloat(p_), BigFloat(p_)}; }

  void point(Interval &r, double v) const {
    mpfr_set_d(r.lo.get(), v, MPFR_RNDN);
    mpfr_set_d(r.hi.get(), v, MPFR_RNDN);
  }

  void literal(Interval &r, const Literal &lit) const {
    if (mpfr_set_str(r.lo.get(), lit.text.c_str(), 0, MPFR_RNDD) != 0 ||
        mpfr_set_str(r.hi.get(), lit.text.c_str(), 0, MPFR_RNDU) != 0)
      point(r, lit.value64);
  }

  void constant(Interval &r, NamedConstant c) const {
    if (c == NamedConstant::Pi) {
      mpfr_set(r.lo.get(), pi_.lo.get(), MPFR_RNDN);
      mpfr_set(r.hi.get(), pi_.hi.get(), MPFR_RNDN);
      return;
    }
    BigFloat one(1.0, p_);
    mpfr_exp(r.lo.get(), one.get(), MPFR_RNDD);
    mpfr_exp(r.hi.get(), one.get(), MPFR_RNDU);
  }

  St apply(Op op, const Interval &x, const Interval *y, Interval &r) const {
    const Interval *a[2] = {&x, y ? y : &x};
    St s = dispatch(op, a, r);
    if (s == St::Ok && has_nan(r))
      return St::Unsure;
    return s;
  }

private:
  St dispatch(Op op, const Interval *const *args, Interval &r) const {
    const Interval &x = *args[0];
    const Interval &y1 = *args[1];
    switch (op) {
    case Op::Neg:
      mpfr_neg(r.lo.get(), x.hi.get(), MPFR_RNDD);
      mpfr_neg(r.hi.get(), x.lo.get(), MPFR_RNDU);
      return St::Ok;
    case Op::Add:
      mpfr_add(r.lo.get(), x.lo.get(), y1.lo.get(), MPFR_RNDD);
      mpfr_add(r.hi.get(), x.hi.get(), y1.hi.get(), MPFR_RNDU);
      return St::Ok;
    case Op::Sub:
      mpfr_sub(r.lo.get(), x.lo.get(), y1.hi.get(), MPFR_RNDD);
      mpfr_sub(r.hi.get(), x.hi.get(), y1.lo.get(), MPFR_RNDU);
      return St::Ok;
    case Op::Mul:
      corners(mpfr_mul, x, y1, r);
      return St::Ok;
    case Op::Div: {
      const Interval &y = y1;
      if (mpfr_zero_p(y.lo.get()) && mpfr_zero_p(y.hi.get()))
        return St::Domain;
      if (mpfr_sgn(y.lo.get()) <= 0 && mpfr_sgn(y.hi.get()) >= 0)
        return St::Unsure;
      corners(mpfr_div, x, y, r);
      return St::Ok;
    }
    case Op::Sqrt:
      if (mpfr_sgn(x.hi.get()) < 0)
        return St::Domain;
      if (mpfr_sgn(x.lo.get()) < 0)
        return St::Unsure;
      return increasing(mpfr_sqrt, x, r);
    case Op::Cbrt:
      return increasing(mpfr_cbrt, x, r);
    case Op::Log:
      if (mpfr_sgn(x.hi.get()) <= 0)
        return St::Domain;
      if (mpfr_sgn(x.lo.get()) <= 0)
        return St::Unsure;
      return increasing(mpfr_log, x, r);
    case Op::Exp:
      return increasing(mpfr_exp, x, r);
    case Op::Pow:
      return pow(x, y1, r);
    case Op::Sin:
    case Op::Cos:
      return sincos(op, x, r);
    case Op::Tan:
      if (!finite(x) || may_hit(x, 1, 1))
        return St::Unsure;
      return increasing(mpfr_tan, x, r);
    case Op::Acos:
    case Op::Asin: {
      if (mpfr_cmp_si(x.hi.get(), -1) < 0 || mpfr_cmp_si(x.lo.get(), 1) > 0)
        return St::Domain;
      if (mpfr_cmp_si(x.lo.get(), -1) < 0 || mpfr_cmp_si(x.hi.get(), 1) > 0)
        return St::Unsure;
      if (op == Op::Asin)
        return increasing(mpfr_asin, x, r);
      mpfr_acos(r.lo.get(), x.hi.get(), MPFR_RNDD);
      mpfr_acos(r.hi.get(), x.lo.get(), MPFR_RNDU);
      return St::Ok;
    }
    }
    return St::Unsure;
  }

  St increasing(Fn fn, const Interval &x, Interval &r) const {
    fn(r.lo.get(), x.lo.get(), MPFR_RNDD);
    fn(r.hi.get(), x.hi.get(), MPFR_RNDU);
    return St::Ok;
  }

  // Hull of fn over the four endpoint combinations; valid when fn is
  // monotone in each argument over the box.
  template <class F>
  void corners(F fn, const Interval &x, const Interval &y, Interval &r) const {
    BigFloat t(p_);
    mpfr_srcptr xs[2] = {x.lo.get(), x.hi.get()};
    mpfr_srcptr ys[2] = {y.lo.get(), y.hi.get()};
    bool first = true;
    for (mpfr_srcptr a : xs) {
      for (mpfr_srcptr b : ys) {
        fn(t.get(), a, b, MPFR_RNDD);
        if (first || mpfr_less_p(t.get(), r.lo.get()))
          mpfr_set(r.lo.get(), t.get(), MPFR_RNDN);
        fn(t.get(), a, b, MPFR_RNDU);
        if (first || mpfr_greater_p(t.get(), r.hi.get()))
          mpfr_set(r.hi.get(), t.get(), MPFR_RNDN);
        first = false;
      }
    }
  }

  St pow(const Interval &x, const Interval &y, Interval &r) const {
    int xlo = mpfr_sgn(x.lo.get());
    int xhi = mpfr_sgn(x.hi.get());
    bool y_point = mpfr_equal_p(y.lo.get(), y.hi.get());
    bool y_int = y_point && mpfr_integer_p(y.lo.get());

    if (xlo > 0) {
      corners(mpfr_pow, x, y, r);
      return St::Ok;
    }
    if (xlo == 0 && xhi == 0) {
      if (mpfr_sgn(y.lo.get()) > 0) {
        mpfr_set_zero(r.lo.get(), 1);
        mpfr_set_zero(r.hi.get(), 1);
        return St::Ok;
      }
      if (y_point && mpfr_zero_p(y.lo.get())) {
        point(r, 1.0);
        return St::Ok;
      }
      return mpfr_sgn(y.hi.get()) < 0 ? St::Domain : St::Unsure;
    }
    if (xlo == 0) {
      if (mpfr_sgn(y.lo.get()) > 0) {
        corners(mpfr_pow, x, y, r);
        return St::Ok;
      }
      return St::Unsure;
    }
    if (xhi < 0) {
      if (!y_point)
        return St::Unsure;
      if (!y_int)
        return St::Domain;
      corners(mpfr_pow, x, y, r);
      return St::Ok;
    }
    // x straddles zero.
    if (!y_int || mpfr_sgn(y.lo.get()) <= 0)
      return St::Unsure;
    corners(mpfr_pow, x, y, r);
    BigFloat half(p_);
    mpfr_div_2ui(half.get(), y.lo.get(), 1, MPFR_RNDN);
    if (mpfr_integer_p(half.get()))
      mpfr_set_zero(r.lo.get(), 1);
    return St::Ok;
  }

  // Whether (x - shift * pi/2) / (period * pi) may contain an integer.
  bool may_hit(const Interval &x, int shift, int period) const {
    BigFloat clo(p_), chi(p_), dlo(p_), dhi(p_), plo(p_), phi(p_), qlo(p_), qhi(p_);
    // c = shift * pi / 2
    if (shift >= 0) {
      mpfr_mul_si(clo.get(), pi_.lo.get(), shift, MPFR_RNDD);
      mpfr_mul_si(chi.get(), pi_.hi.get(), shift, MPFR_RNDU);
    } else {
      mpfr_mul_si(clo.get(), pi_.hi.get(), shift, MPFR_RNDD);
      mpfr_mul_si(chi.get(), pi_.lo.get(), shift, MPFR_RNDU);
    }
    mpfr_div_2ui(clo.get(), clo.get(), 1, MPFR_RNDD);
    mpfr_div_2ui(chi.get(), chi.get(), 1, MPFR_RNDU);
    mpfr_sub(dlo.get(), x.lo.get(), chi.get(), MPFR_RNDD);
    mpfr_sub(dhi.get(), x.hi.get(), clo.get(), MPFR_RNDU);
    mpfr_mul_si(plo.get(), pi_.lo.get(), period, MPFR_RNDD);
    mpfr_mul_si(phi.get(), pi_.hi.get(), period, MPFR_RNDU);
    mpfr_div(qlo.get(), dlo.get(), mpfr_sgn(dlo.get()) >= 0 ? phi.get() : plo.get(),
             MPFR_RNDD);
    mpfr_div(qhi.get(), dhi.get(), mpfr_sgn(dhi.get()) >= 0 ? plo.get() : phi.get(),
             MPFR_RNDU);
    mpfr_ceil(qlo.get(), qlo.get());
    mpfr_floor(qhi.get(), qhi.get());
    return mpfr_lessequal_p(qlo.get(), qhi.get());
  }

  St sincos(Op op, const Interval &x, Interval &r) const {
    if (!finite(x)) {
      point(r, -1.0);
      mpfr_set_si(r.hi.get(), 1, MPFR_RNDN);
      return St::Ok;
    }
    Fn fn = op == Op::Sin ? mpfr_sin : mpfr_cos;
    BigFloat t(p_);
    fn(r.lo.get(), x.lo.get(), MPFR_RNDD);
    fn(t.get(), x.hi.get(), MPFR_RNDD);
    if (mpfr_less_p(t.get(), r.lo.get()))
      mpfr_set(r.lo.get(), t.get(), MPFR_RNDN);
    fn(r.hi.get(), x.lo.get(), MPFR_RNDU);
    fn(t.get(), x.hi.get(), MPFR_RNDU);
    if (mpfr_greater_p(t.get(), r.hi.get()))
      mpfr_set(r.hi.get(), t.get(), MPFR_RNDN);
    // Maxima of sin at pi/2 + 2k pi, minima at -pi/2 + 2k pi; cos shifted.
    int max_shift = op == Op::Sin ? 1 : 0;
    int min_shift = op == Op::Sin ? -1 : 2;
    if (may_hit(x, max_shift, 2))
      mpfr_set_si(r.hi.get(), 1, MPFR_RNDN);
    if (may_hit(x, min_shift, 2))
      mpfr_set_si(r.lo.get(), -1, MPFR_RNDN);
    return St::Ok;
  }

  mpfr_prec_t p_;
  Interval pi_;
};

bool same_rounding(const Interval &x, Format f, double *out) {
  double a = x.lo.round_to(f);
  double b = x.hi.round_to(f);
  if (std::isnan(a) || std::isnan(b) || a != b)
    return false;
  *out = a;
  return true;
}

} // namespace

BigFloat RefEvaluation::midpoint(int node) const {
  const Interval &x = nodes.at(node);
  BigFloat m(x.lo.precision() + 1);
  mpfr_add(m.get(), x.lo.get(), x.hi.get(), MPFR_RNDN);
  mpfr_div_2ui(m.get(), m.get(), 1, MPFR_RNDN);
  if (mpfr_nan_p(m.get()))
    mpfr_set(m.get(), mpfr_inf_p(x.lo.get()) ? x.lo.get() : x.hi.get(), MPFR_RNDN);
  return m;
}

namespace {
std::atomic<uint64_t> g_reference_evaluations{0};
} // namespace

uint64_t reference_evaluation_count() { return g_reference_evaluations.load(); }

RefEvaluation evaluate_reference(const Expr &e, const InputVector &inputs, Format f,
                                 const RefOptions &opts) {
  g_reference_evaluations.fetch_add(1, std::memory_order_relaxed);
  use_wide_exponent_range();
  RefEvaluation res;
  const std::size_t n = e.nodes().size();
  for (int p : precision_ladder(opts.min_precision, opts.max_precision)) {
    mpfr_clear_flags();
    Evaluator ev(p);
    std::vector<Interval> v;
    v.reserve(n);
    St st = St::Ok;
    for (std::size_t i = 0; i < n && st == St::Ok; ++i) {
      const Node &node = e.node(static_cast<int>(i));
      v.push_back(ev.make());
      Interval &r = v.back();
      switch (node.kind) {
      case NodeKind::Variable:
        ev.point(r, round_to_format(inputs.at(node.variable), f));
        break;
      case NodeKind::Literal:
        ev.literal(r, e.literals()[node.literal]);
        break;
      case NodeKind::Constant:
        ev.constant(r, node.constant);
        break;
      default: {
        const Interval *y =
            node.kind == NodeKind::Binary ? &v[node.children[1]] : nullptr;
        st = ev.apply(node.op, v[node.children[0]], y, r);
        if (st == St::Domain) {
          res.status = RefStatus::DomainError;
          res.precision = p;
          res.diagnostic = std::string(op_name(node.op)) + " outside its domain";
          return res;
        }
        break;
      }
      }
    }
    res.precision = p;
    if (st == St::Ok) {
      res.rounded.assign(n, 0.0);
      res.converged.assign(n, false);
      res.all_converged = true;
      for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        res.converged[i] = same_rounding(v[i], f, &r);
        res.all_converged = res.all_converged && res.converged[i];
        res.rounded[i] = r;
      }
      res.nodes = std::move(v);
      for (std::size_t i = 0; i < n; ++i)
        if (!res.converged[i])
          res.rounded[i] = res.midpoint(static_cast<int>(i)).round_to(f);
      bool root_ok = res.converged[n - 1];
      if (root_ok) {
        res.value = res.rounded[n - 1];
        res.status = RefStatus::Ok;
        if (!opts.all_nodes || res.all_converged)
          return res;
      }
      // Exponent overflow or underflow inside MPFR: more precision won't help.
      if (mpfr_overflow_p() || mpfr_underflow_p()) {
        res.status = root_ok ? RefStatus::Ok : RefStatus::ConvergenceFailure;
        return res;
      }
      if (root_ok && p == opts.max_precision)
        return res;
    } else if (mpfr_overflow_p() || mpfr_underflow_p()) {
      break;
    }
  }
  if (res.nodes.empty() || !res.converged.back()) {
    res.status = RefStatus::ConvergenceFailure;
    res.diagnostic = "no unambiguous rounding within " +
                     std::to_string(opts.max_precision) + " bits";
  }
  return res;
}

double eval_correctly_rounded(const Expr &e, const InputVector &inputs, Format f) {
  RefEvaluation r = evaluate_reference(e, inputs, f);
  if (r.status == RefStatus::DomainError)
    throw ReferenceDomainError(r.diagnostic);
  if (r.status == RefStatus::ConvergenceFailure)
    throw ConvergenceFailure(r.diagnostic);
  return r.value;
}

namespace {

int64_t ordinal(double x, Format f) {
  if (f == Format::Binary32) {
    float v = static_cast<float>(x);
    uint32_t b = 0;
    std::memcpy(&b, &v, sizeof b);
    int64_t mag = b & 0x7fffffffu;
    return (b >> 31) ? -mag : mag;
  }
  uint64_t b = 0;
  std::memcpy(&b, &x, sizeof b);
  auto mag = static_cast<int64_t>(b & 0x7fffffffffffffffull);
  return (b >> 63) ? -mag : mag;
}

} // namespace

uint64_t ulp_distance(double a, double b, Format f) {
  if (std::isnan(a) || std::isnan(b))
    return UINT64_MAX;
  int64_t oa = ordinal(a, f);
  int64_t ob = ordinal(b, f);
  auto ua = static_cast<uint64_t>(oa);
  auto ub = static_cast<uint64_t>(ob);
  return oa >= ob ? ua - ub : ub - ua;
}

double bits_of_error(uint64_t ulps) { return std::log2(1.0 + static_cast<double>(ulps)); }

GroundTruth ground_truth(const Expr &e, const InputVector &inputs, Format f,
                         double native) {
  GroundTruth g;
  RefEvaluation r = evaluate_reference(e, inputs, f);
  g.precision = r.precision;
  if (r.status == RefStatus::DomainError) {
    g.status = GroundTruth::Status::DomainError;
    return g;
  }
  if (r.status == RefStatus::ConvergenceFailure) {
    g.status = GroundTruth::Status::Unsampleable;
    return g;
  }
  g.value = r.value;
  g.ulp_error = ulp_distance(native, r.value, f);
  g.bits_of_error = bits_of_error(g.ulp_error);
  return g;
}

bool label_from_ulps(uint64_t ulps, double ulp_bits) {
  return bits_of_error(ulps) > ulp_bits;
}

std::optional<bool> label_input(const Expr &e, const InputVector &inputs, Format f,
                                double ulp_bits) {
  std::vector<double> native = evaluate_native(e, inputs, f);
  GroundTruth g = ground_truth(e, inputs, f, native.back());
  if (g.status != GroundTruth::Status::Ok)
    return std::nullopt;
  return g.bits_of_error > ulp_bits;
}

} // namespace floatscope
