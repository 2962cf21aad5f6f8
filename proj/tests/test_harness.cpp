#include <doctest.h>

#include <fstream>
#include <sstream>

#include "floatscope/harness.hpp"
#include "floatscope/report.hpp"

using namespace floatscope;

namespace {

std::vector<Benchmark> bundled() {
  std::ifstream in(FLOATSCOPE_SUITE);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_suite(ss.str());
}

} // namespace

TEST_CASE("precision and recall") {
  Confusion c = precision_recall({true, true, false, false, true}, {true, false, true, false, true});
  CHECK(c.tp == 2);
  CHECK(c.fp == 1);
  CHECK(c.fn == 1);
  CHECK(c.tn == 1);
  CHECK(c.precision == 2.0 / 3.0);
  CHECK(c.recall == 2.0 / 3.0);

  Confusion none = precision_recall({false, false}, {false, true});
  CHECK(none.precision == 1.0);
  CHECK(none.recall == 0.0);
  Confusion clean = precision_recall({false}, {false});
  CHECK(clean.precision == 1.0);
  CHECK(clean.recall == 1.0);
  Confusion all = precision_recall({true, true, true, true}, {true, false, false, false});
  CHECK(all.precision == 0.25);
  CHECK(all.recall == 1.0);
  CHECK_THROWS(precision_recall({true}, {true, false}));

  Confusion k = confusion_from_counts(117, 0, 0, 139);
  CHECK(k.precision == 1.0);
  CHECK(k.recall == 1.0);
  Confusion h = confusion_from_counts(3, 1, 7, 0);
  CHECK(h.precision == 0.75);
  CHECK(h.recall == 0.3);
}

TEST_CASE("modes and thresholds") {
  auto t = default_thresholds();
  REQUIRE(t.size() == 11);
  CHECK(t.front() == 4.0);
  CHECK(t.back() == 4096.0);
  CHECK(default_threshold(Mode::Dsl) == 64.0);
  CHECK(default_threshold(Mode::RefCond) == 64.0);
  CHECK(default_threshold(Mode::DdOracle) == 16.0);
  CHECK(parse_mode("dd-oracle") == Mode::DdOracle);
  CHECK_FALSE(parse_mode("oracle").has_value());
  for (Mode m : {Mode::Dsl, Mode::DdOracle, Mode::RefCond})
    CHECK(parse_mode(mode_name(m)) == m);
}

TEST_CASE("only ref-cond touches the reference evaluator") {
  Expr e = parse_expression("(- (sqrt (+ x 1)) (sqrt x))");
  uint64_t before = reference_evaluation_count();
  analyze_input(e, Format::Binary64, {1e100}, Mode::Dsl);
  analyze_input(e, Format::Binary64, {1e100}, Mode::DdOracle);
  CHECK(reference_evaluation_count() == before);
  analyze_input(e, Format::Binary64, {1e100}, Mode::RefCond);
  CHECK(reference_evaluation_count() > before);
}

TEST_CASE("mode behaviour on the case studies") {
  auto flags = [](const char *text, double x, Mode m) {
    Expr e = parse_expression(text);
    return analyze_input(e, Format::Binary64, {x}, m).explanations(default_threshold(m));
  };
  const char *twosqrt = "(- (sqrt (+ x 1)) (sqrt x))";
  CHECK_FALSE(flags(twosqrt, 1e100, Mode::Dsl).empty());
  CHECK(flags(twosqrt, 1e100, Mode::DdOracle).empty());
  CHECK_FALSE(flags(twosqrt, 1e100, Mode::RefCond).empty());

  const char *cos2 = "(/ (- 1 (cos x)) (* x x))";
  CHECK(flags(cos2, 1e200, Mode::Dsl).empty());
  auto dd = flags(cos2, 1e200, Mode::DdOracle);
  REQUIRE(dd.size() == 1);
  CHECK(dd[0].kind == ErrorKind::NativeOverflow);
  CHECK(dd[0].op_index == 3);
  CHECK(flags(cos2, 1e200, Mode::RefCond).empty());

  auto le = flags("(log (exp x))", 1e100, Mode::RefCond);
  CHECK(le.empty()); // reference evaluation fails, the input is discarded
  Expr lx = parse_expression("(log (exp x))");
  CHECK(analyze_input(lx, Format::Binary64, {1e100}, Mode::RefCond).discarded);

  auto sq = flags("(sqrt (+ 1 (* x x)))", 1e300, Mode::RefCond);
  REQUIRE(sq.size() == 1);
  CHECK(sq[0].kind == ErrorKind::OverflowRescue);
  CHECK(sq[0].sources == std::vector<int>{2});
}

TEST_CASE("sweep over the bundled suite") {
  auto suite = bundled();
  auto prepared = prepare_suite(suite, 24, 3);
  REQUIRE(prepared.size() == 13);
  for (const PreparedBenchmark &p : prepared) {
    CAPTURE(p.benchmark->name);
    CHECK(p.inputs.size() == 24);
    for (const LabeledInput &li : p.inputs)
      CHECK(li.label == label_from_ulps(li.truth.ulp_error));
  }
  SweepConfig cfg;
  SweepReport a = sweep(prepared, cfg, 3);
  CHECK(a.rows.size() == 11);
  uint64_t total = 0;
  for (const BenchmarkReport &b : a.benchmarks)
    total += b.inputs.size();
  for (const ThresholdRow &r : a.rows)
    CHECK(r.c.tp + r.c.fp + r.c.fn + r.c.tn == total);
  // Raising the threshold never adds flags.
  for (std::size_t i = 1; i < a.rows.size(); ++i)
    CHECK(a.rows[i].c.tp + a.rows[i].c.fp <= a.rows[i - 1].c.tp + a.rows[i - 1].c.fp);

  cfg.jobs = 3;
  SweepReport b = sweep(prepared, cfg, 3);
  CHECK(sweep_json(a, false) == sweep_json(b, false));

  cfg.thresholds = {};
  CHECK_THROWS(sweep(prepared, cfg, 3));
  cfg.thresholds = {0.5};
  CHECK_THROWS(sweep(prepared, cfg, 3));
}

TEST_CASE("unsampleable inputs are listed as discarded") {
  auto suite = parse_suite("(FPCore log-exp (x) (log (exp x)))");
  auto prepared = prepare_suite(suite, 32, 1);
  REQUIRE(prepared.size() == 1);
  CHECK(prepared[0].inputs.size() == 32);
  CHECK_FALSE(prepared[0].discarded.empty());
  for (const DiscardedInput &d : prepared[0].discarded)
    CHECK(d.reason == "no-convergence");
  SweepReport r = sweep(prepared, SweepConfig{}, 1);
  CHECK(r.discarded.size() == prepared[0].discarded.size());
}
