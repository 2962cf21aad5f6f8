#pragma once

#include <mpfr.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "floatscope/detect.hpp"
#include "floatscope/expr.hpp"
#include "floatscope/format.hpp"

namespace floatscope {

// Owning wrapper around an mpfr_t.
class BigFloat {
public:
  explicit BigFloat(mpfr_prec_t prec = 128);
  BigFloat(double v, mpfr_prec_t prec);
  BigFloat(const BigFloat &o);
  BigFloat(BigFloat &&o) noexcept;
  BigFloat &operator=(const BigFloat &o);
  BigFloat &operator=(BigFloat &&o) noexcept;
  ~BigFloat();

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }
  mpfr_prec_t precision() const { return mpfr_get_prec(v_); }
  double to_double(mpfr_rnd_t rnd = MPFR_RNDN) const { return mpfr_get_d(v_, rnd); }
  // Round to the target format (binary32 results widened).
  double round_to(Format f) const;

private:
  mpfr_t v_;
  bool live_ = false;
};

struct Interval {
  BigFloat lo;
  BigFloat hi;
};

// Widest exponent range MPFR supports, set on the calling thread.
void use_wide_exponent_range();

constexpr int kMinPrecision = 128;
constexpr int kMaxPrecision = 10000;

// 128, 256, ..., 8192, 10000.
std::vector<int> precision_ladder(int min_precision = kMinPrecision,
                                  int max_precision = kMaxPrecision);

enum class RefStatus { Ok, DomainError, ConvergenceFailure };

struct RefOptions {
  // Keep escalating until every node rounds unambiguously (best effort:
  // values are reported even when intermediates never settle).
  bool all_nodes = false;
  int min_precision = kMinPrecision;
  int max_precision = kMaxPrecision;
};

struct RefEvaluation {
  RefStatus status = RefStatus::Ok;
  double value = 0.0; // root, correctly rounded to the target format
  int precision = 0;
  std::string diagnostic;
  std::vector<Interval> nodes;       // enclosures at the final precision
  std::vector<double> rounded;       // per node, rounded to the target format
  std::vector<bool> converged;       // per node
  bool all_converged = false;

  BigFloat midpoint(int node) const;
};

RefEvaluation evaluate_reference(const Expr &e, const InputVector &inputs, Format f,
                                 const RefOptions &opts = {});

// Number of evaluate_reference calls made by this process.
uint64_t reference_evaluation_count();

class ReferenceDomainError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class ConvergenceFailure : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Throws ReferenceDomainError or ConvergenceFailure.
double eval_correctly_rounded(const Expr &e, const InputVector &inputs, Format f);

// Ordinal distance between two values of the format; NaN gives UINT64_MAX.
uint64_t ulp_distance(double a, double b, Format f);

// log2(1 + ulps).
double bits_of_error(uint64_t ulps);

struct GroundTruth {
  enum class Status { Ok, DomainError, Unsampleable };
  Status status = Status::Ok;
  double value = 0.0;
  uint64_t ulp_error = 0;
  double bits_of_error = 0.0;
  int precision = 0;
};

GroundTruth ground_truth(const Expr &e, const InputVector &inputs, Format f,
                         double native);

// Erroneous iff bits_of_error > ulp_bits. The default of 4 bits agrees with
// "more than 16 ULPs" everywhere except at exactly 16.
bool label_from_ulps(uint64_t ulps, double ulp_bits = 4.0);

// nullopt when the ground truth cannot be computed (input discarded).
std::optional<bool> label_input(const Expr &e, const InputVector &inputs, Format f,
                                double ulp_bits = 4.0);

template <> struct RealOps<BigFloat> {
  using B = BigFloat;
  static B unary(const B &x, int (*fn)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t)) {
    B r(x.precision());
    fn(r.get(), x.get(), MPFR_RNDN);
    return r;
  }
  static B add(const B &a, const B &b) {
    B r(std::max(a.precision(), b.precision()));
    mpfr_add(r.get(), a.get(), b.get(), MPFR_RNDN);
    return r;
  }
  static B sub(const B &a, const B &b) {
    B r(std::max(a.precision(), b.precision()));
    mpfr_sub(r.get(), a.get(), b.get(), MPFR_RNDN);
    return r;
  }
  static B mul(const B &a, const B &b) {
    B r(std::max(a.precision(), b.precision()));
    mpfr_mul(r.get(), a.get(), b.get(), MPFR_RNDN);
    return r;
  }
  static B one_minus_sq(const B &x) {
    B a(x.precision()), b(x.precision());
    mpfr_ui_sub(a.get(), 1, x.get(), MPFR_RNDN);
    mpfr_add_ui(b.get(), x.get(), 1, MPFR_RNDN);
    return mul(a, b);
  }
  static B tan(const B &x) { return unary(x, mpfr_tan); }
  static B log(const B &x) { return unary(x, mpfr_log); }
  static B sqrt(const B &x) { return unary(x, mpfr_sqrt); }
  static B acos(const B &x) { return unary(x, mpfr_acos); }
  static B asin(const B &x) { return unary(x, mpfr_asin); }
  static double to_double(const B &x) { return x.to_double(); }
};

} // namespace floatscope
