#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "floatscope/refeval.hpp"
#include "oracle.hpp"

using namespace floatscope;

namespace {

std::vector<Benchmark> bundled() {
  std::ifstream in(FLOATSCOPE_SUITE);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_suite(ss.str());
}

// Random arithmetic expression over a, b, c with exactly `ops` operations.
std::string random_arith(oracle::Rng &rng, int ops) {
  const char *vars[] = {"a", "b", "c"};
  const char *opn[] = {"+", "-", "*", "/"};
  if (ops == 0)
    return vars[rng.integer(0, 2)];
  int left = rng.integer(0, ops - 1);
  return std::string("(") + opn[rng.integer(0, 3)] + " " + random_arith(rng, left) + " " +
         random_arith(rng, ops - 1 - left) + ")";
}

mpq_class eval_exact(const Expr &e, const InputVector &in, bool *ok) {
  std::vector<mpq_class> v(e.nodes().size());
  for (std::size_t i = 0; i < e.nodes().size(); ++i) {
    const Node &n = e.node(static_cast<int>(i));
    if (n.kind == NodeKind::Variable) {
      v[i] = oracle::exact(in[n.variable]);
      continue;
    }
    const mpq_class &x = v[n.children[0]];
    const mpq_class &y = v[n.children[1]];
    switch (n.op) {
    case Op::Add: v[i] = x + y; break;
    case Op::Sub: v[i] = x - y; break;
    case Op::Mul: v[i] = x * y; break;
    case Op::Div:
      if (y == 0) {
        *ok = false;
        return 0;
      }
      v[i] = x / y;
      break;
    default: *ok = false; return 0;
    }
  }
  return v.back();
}

double round_q(const mpq_class &q) {
  oracle::Mp r(53);
  mpfr_set_q(r, q.get_mpq_t(), MPFR_RNDN);
  return r.d();
}

} // namespace

TEST_CASE("reference values") {
  Expr e = parse_expression("(- (sqrt (+ x 1)) (sqrt x))");
  double v = eval_correctly_rounded(e, {1e100}, Format::Binary64);
  CHECK(v == doctest::Approx(5e-51).epsilon(1e-12));

  Expr c = parse_expression("(/ (- 1 (cos x)) (* x x))");
  GroundTruth g = ground_truth(c, {1e200}, Format::Binary64, 0.0);
  CHECK(g.status == GroundTruth::Status::Ok);
  CHECK(g.value == 0.0);
  CHECK(g.ulp_error == 0);

  Expr two = parse_expression("(+ 1 1)");
  GroundTruth t = ground_truth(two, {}, Format::Binary64, 2.0);
  CHECK(t.value == 2.0);
  CHECK(t.ulp_error == 0);

  Expr pi = parse_expression("(sin PI)");
  oracle::Mp ref(256), p(256);
  mpfr_set_d(p, M_PI, MPFR_RNDN);
  mpfr_sin(ref, p, MPFR_RNDN);
  // sin of the real pi, not of its rounding.
  CHECK(eval_correctly_rounded(pi, {}, Format::Binary64) == 0.0);
  CHECK(ref.d() != 0.0);
}

TEST_CASE("reference failures") {
  Expr s = parse_expression("(sqrt x)");
  CHECK_THROWS_AS(eval_correctly_rounded(s, {-1.0}, Format::Binary64), ReferenceDomainError);
  Expr d = parse_expression("(/ 1 x)");
  CHECK_THROWS_AS(eval_correctly_rounded(d, {0.0}, Format::Binary64), ReferenceDomainError);
  Expr l = parse_expression("(log (exp x))");
  CHECK_THROWS_AS(eval_correctly_rounded(l, {1e100}, Format::Binary64), ConvergenceFailure);
  CHECK(ground_truth(s, {-1.0}, Format::Binary64, std::nan("")).status ==
        GroundTruth::Status::DomainError);
  CHECK_FALSE(label_input(s, {-1.0}, Format::Binary64).has_value());
}

TEST_CASE("arithmetic agrees with exact rationals") {
  oracle::Rng rng(31);
  int checked = 0;
  for (int i = 0; i < 600; ++i) {
    std::string text = random_arith(rng, rng.integer(1, 3));
    Expr e = parse_expression(text);
    std::vector<std::string> args{"a", "b", "c"};
    e.bind_arguments(args);
    InputVector in{rng.logscale(-60, 60), rng.logscale(-60, 60), rng.logscale(-60, 60)};
    if (rng.coin())
      in[1] = in[0] * (1 + rng.uniform(-1e-12, 1e-12));
    bool ok = true;
    mpq_class q = eval_exact(e, in, &ok);
    if (!ok)
      continue;
    CAPTURE(text);
    REQUIRE(eval_correctly_rounded(e, in, Format::Binary64) == round_q(q));
    ++checked;
  }
  CHECK(checked > 500);
}

TEST_CASE("binary32 rounding") {
  Expr e = parse_expression("(/ 1 x)");
  double v = eval_correctly_rounded(e, {3.0}, Format::Binary32);
  CHECK(v == static_cast<double>(1.0f / 3.0f));
}

TEST_CASE("doubling the final precision does not change the result") {
  auto suite = bundled();
  int n = 0;
  for (const Benchmark &b : suite) {
    for (const InputVector &in : sample_inputs(b, 80, 17)) {
      RefEvaluation r = evaluate_reference(b.body, in, b.format);
      if (r.status != RefStatus::Ok)
        continue;
      RefOptions o;
      o.min_precision = 2 * r.precision;
      o.max_precision = 2 * r.precision;
      RefEvaluation d = evaluate_reference(b.body, in, b.format, o);
      CAPTURE(b.name);
      REQUIRE(d.status == RefStatus::Ok);
      REQUIRE(std::signbit(d.value) == std::signbit(r.value));
      REQUIRE(ulp_distance(d.value, r.value, b.format) == 0);
      ++n;
    }
  }
  CHECK(n > 700);
}

TEST_CASE("precision ladder") {
  std::vector<int> l = precision_ladder();
  CHECK(l.front() == 128);
  CHECK(l.back() == 10000);
  CHECK(l[l.size() - 2] == 8192);
  for (std::size_t i = 1; i + 1 < l.size(); ++i)
    CHECK(l[i] == 2 * l[i - 1]);
}

TEST_CASE("ulp distance") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(ulp_distance(1.0, 1.0, Format::Binary64) == 0);
  CHECK(ulp_distance(1.0, std::nextafter(1.0, 2.0), Format::Binary64) == 1);
  CHECK(ulp_distance(0.0, -0.0, Format::Binary64) == 0);
  CHECK(ulp_distance(0x1p-1074, -0x1p-1074, Format::Binary64) == 2);
  CHECK(ulp_distance(std::numeric_limits<double>::max(), inf, Format::Binary64) == 1);
  CHECK(ulp_distance(0.0, 5e-51, Format::Binary64) > 16);
  CHECK(ulp_distance(std::nan(""), 1.0, Format::Binary64) == UINT64_MAX);
  CHECK(ulp_distance(1.0, std::nextafter(1.0f, 2.0f), Format::Binary32) == 1);

  oracle::Rng rng(3);
  for (Format f : {Format::Binary64, Format::Binary32}) {
    for (int i = 0; i < 3000; ++i) {
      double a = round_to_format(rng.any_finite(), f);
      double b = round_to_format(rng.any_finite(), f);
      double c = round_to_format(rng.any_finite(), f);
      if (i % 3 == 0) {
        b = a * (1 + rng.uniform(-1e-13, 1e-13));
        c = round_to_format(b * (1 + rng.uniform(-1e-13, 1e-13)), f);
        b = round_to_format(b, f);
      }
      if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c))
        continue;
      uint64_t ab = ulp_distance(a, b, f), ba = ulp_distance(b, a, f);
      REQUIRE(ab == ba);
      REQUIRE(ulp_distance(a, a, f) == 0);
      REQUIRE((ab == 0) == (a == b));
      // Triangle inequality in 128-bit to avoid overflow.
      unsigned __int128 lhs = ab;
      unsigned __int128 rhs = static_cast<unsigned __int128>(ulp_distance(a, c, f)) +
                              ulp_distance(c, b, f);
      REQUIRE(lhs <= rhs);
    }
  }
}

TEST_CASE("labels") {
  CHECK(bits_of_error(0) == 0.0);
  CHECK(bits_of_error(15) == 4.0);
  CHECK_FALSE(label_from_ulps(15));
  // log2(17) > 4: the bits rule already labels 16 ULPs.
  CHECK(label_from_ulps(16));
  CHECK(label_from_ulps(17));
  CHECK(label_from_ulps(UINT64_MAX));
  CHECK_FALSE(label_from_ulps(255, 8.0));
  CHECK(label_from_ulps(256, 8.0));

  Expr s = parse_expression("(- (sqrt (+ x 1)) (sqrt x))");
  CHECK(label_input(s, {1e100}, Format::Binary64) == std::optional<bool>(true));
  Expr c = parse_expression("(/ (- 1 (cos x)) (* x x))");
  CHECK(label_input(c, {1e200}, Format::Binary64) == std::optional<bool>(false));
  Expr t = parse_expression("(+ 1 1)");
  CHECK(label_input(t, {}, Format::Binary64) == std::optional<bool>(false));
}
