#include "floatscope/harness.hpp"

#include <atomic>
#include <chrono>
#include <limits>
#include <stdexcept>
#include <thread>

namespace floatscope {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double min_normal(Format f) { return f == Format::Binary32 ? 0x1p-126 : 0x1p-1022; }

// Decimal literal minus its rounded value, as a double.
double literal_residual(const Literal &lit, Format f) {
  if (lit.exact(f))
    return 0.0;
  mpfr_t m;
  mpfr_init2(m, 256);
  double r = 0.0;
  if (mpfr_set_str(m, lit.text.c_str(), 0, MPFR_RNDN) == 0) {
    mpfr_sub_d(m, m, lit.value(f), MPFR_RNDN);
    r = mpfr_get_d(m, MPFR_RNDN);
  }
  mpfr_clear(m);
  return r;
}

DSLValue leaf_shadow(const Expr &e, const Node &node, const InputVector &inputs,
                     Format f) {
  switch (node.kind) {
  case NodeKind::Variable:
    return make_shadow(round_to_format(inputs.at(node.variable), f), f, true);
  case NodeKind::Literal: {
    const Literal &lit = e.literals()[node.literal];
    return make_shadow(lit.value(f), f, lit.exact(f), literal_residual(lit, f));
  }
  default:
    return make_constant_shadow(node.constant, f);
  }
}

bool leaf_exact(const Expr &e, const Node &node, Format f) {
  switch (node.kind) {
  case NodeKind::Variable:
    return true;
  case NodeKind::Literal:
    return e.literals()[node.literal].exact(f);
  default:
    return false;
  }
}

bool has_condition_entry(Op op) { return !condition_spec(op).args.empty(); }

InputAnalysis analyze_dsl(const Expr &e, Format f, const InputVector &inputs,
                          const DetectOptions &opts) {
  InputAnalysis a;
  a.mode = Mode::Dsl;
  const std::size_t n = e.nodes().size();
  std::vector<double> native = evaluate_native(e, inputs, f);
  a.native = native.back();
  a.ops.resize(e.op_count());
  std::vector<DSLValue> sh(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Node &node = e.node(static_cast<int>(i));
    if (!node.is_op()) {
      sh[i] = leaf_shadow(e, node, inputs, f);
      continue;
    }
    int k = node.kind == NodeKind::Binary ? 2 : 1;
    DSLValue in[2];
    for (int j = 0; j < k; ++j)
      in[j] = sh[node.children[j]];
    std::span<const DSLValue> args(in, k);
    ShadowResult r = shadow_apply(node.op, args, node.op_index, f);

    OpRecord &rec = a.ops[node.op_index];
    rec.op_index = node.op_index;
    bool domain = false;
    for (const RangeEvent &ev : r.events) {
      if (ev.kind == RangeEventKind::DomainError) {
        domain = true;
        a.domain_errors.push_back("op " + std::to_string(node.op_index) + ": " +
                                  ev.diagnostic);
      }
    }
    bool all_in = true;
    for (const DSLValue &v : args)
      all_in = all_in && v.range == RangeState::InRange && v.usable();
    if (all_in && !domain && has_condition_entry(node.op)) {
      rec.has_condition = true;
      rec.condition = condition_values(node.op, args);
      for (int j = 0; j < k; ++j)
        rec.exact[j] = in[j].exact;
    }
    RescueResult rr = check_rescue(node.op_index, node.op, args, r.value, r.events, f, opts);
    rec.fixed = std::move(rr.explanations);
    rec.suppressed = std::move(rr.suppressed);
    sh[i] = r.value;

    TraceEntry t;
    t.op_index = node.op_index;
    t.node = static_cast<int>(i);
    t.native = native[i];
    t.range = r.value.range;
    t.unknown = r.value.unknown;
    t.undefined = r.value.undefined;
    t.logmag = r.value.logmag;
    if (r.value.range == RangeState::Overflowed)
      t.shadow = r.value.negative ? -kInf : kInf;
    else if (r.value.range == RangeState::Underflowed)
      t.shadow = r.value.negative ? -0.0 : 0.0;
    else
      t.shadow = round_to_format(r.value.dd, f);
    a.trace.push_back(t);
  }
  return a;
}

// Whether the exact result of op on these native operands is nonzero.
bool exact_nonzero(Op op, double x, double y) {
  switch (op) {
  case Op::Mul:
    return x != 0.0 && y != 0.0;
  case Op::Div:
    return x != 0.0 && std::isfinite(y);
  case Op::Exp:
    return !std::isnan(x);
  case Op::Pow:
    return x != 0.0 && std::isfinite(y);
  default:
    return false;
  }
}

InputAnalysis analyze_dd_oracle(const Expr &e, Format f, const InputVector &inputs) {
  InputAnalysis a;
  a.mode = Mode::DdOracle;
  const std::size_t n = e.nodes().size();
  std::vector<double> native = evaluate_native(e, inputs, f);
  a.native = native.back();
  a.ops.resize(e.op_count());
  std::vector<DD> dd(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Node &node = e.node(static_cast<int>(i));
    if (!node.is_op()) {
      dd[i] = leaf_shadow(e, node, inputs, f).dd;
      continue;
    }
    bool binary = node.kind == NodeKind::Binary;
    const DD &x = dd[node.children[0]];
    DD y = binary ? dd[node.children[1]] : DD();
    dd[i] = dd_apply(node.op, x, y);

    OpRecord &rec = a.ops[node.op_index];
    rec.op_index = node.op_index;
    double rounded = round_to_format(dd[i], f);
    if (!std::isnan(rounded)) {
      rec.has_ulps = true;
      rec.ulps = ulp_distance(native[i], rounded, f);
    }

    double nx = native[node.children[0]];
    double ny = binary ? native[node.children[1]] : 0.0;
    double r = native[i];
    bool inputs_finite = std::isfinite(nx) && (!binary || std::isfinite(ny));
    Explanation ex;
    ex.op_index = node.op_index;
    ex.sources = {node.op_index};
    if (std::isinf(r) && inputs_finite) {
      ex.kind = ErrorKind::NativeOverflow;
      rec.fixed.push_back(ex);
    } else if (inputs_finite && std::fabs(r) < min_normal(f) &&
               node.op != Op::Add && node.op != Op::Sub && node.op != Op::Neg &&
               (r != 0.0 || dd[i].hi != 0.0 || exact_nonzero(node.op, nx, ny))) {
      ex.kind = ErrorKind::NativeUnderflow;
      rec.fixed.push_back(ex);
    }

    TraceEntry t;
    t.op_index = node.op_index;
    t.node = static_cast<int>(i);
    t.native = r;
    t.shadow = rounded;
    t.logmag = dd[i].hi == 0.0 || !std::isfinite(dd[i].hi)
                   ? (dd[i].hi == 0.0 ? -kInf : std::fabs(dd[i].hi))
                   : dd_to_lns(dd[i]).logmag;
    t.range = std::isnan(dd[i].hi) ? RangeState::InRange : classify(dd[i], f);
    t.undefined = std::isnan(dd[i].hi);
    a.trace.push_back(t);
  }
  return a;
}

InputAnalysis analyze_ref_cond(const Expr &e, Format f, const InputVector &inputs,
                               const DetectOptions &opts) {
  InputAnalysis a;
  a.mode = Mode::RefCond;
  const std::size_t n = e.nodes().size();
  std::vector<double> native = evaluate_native(e, inputs, f);
  a.native = native.back();
  a.ops.resize(e.op_count());

  RefOptions ro;
  ro.all_nodes = true;
  RefEvaluation ref = evaluate_reference(e, inputs, f, ro);
  if (ref.status != RefStatus::Ok) {
    a.discarded = true;
    a.discard_reason =
        ref.status == RefStatus::DomainError ? "domain-error" : "no-convergence";
    return a;
  }

  std::vector<BigFloat> mid;
  mid.reserve(n);
  std::vector<DSLValue> val(n);
  for (std::size_t i = 0; i < n; ++i) {
    mid.push_back(ref.midpoint(static_cast<int>(i)));
    const BigFloat &m = mid.back();
    DSLValue &v = val[i];
    double r = ref.rounded[i];
    v.dd = DD(r);
    v.negative = mpfr_signbit(m.get()) != 0;
    v.is_zero = mpfr_zero_p(m.get()) != 0;
    if (!v.is_zero) {
      BigFloat l(64);
      mpfr_abs(l.get(), m.get(), MPFR_RNDN);
      mpfr_log2(l.get(), l.get(), MPFR_RNDN);
      v.logmag = l.to_double();
    }
    if (std::isinf(r))
      v.range = RangeState::Overflowed;
    else if (r == 0.0 && !v.is_zero)
      v.range = RangeState::Underflowed;

    const Node &node = e.node(static_cast<int>(i));
    if (!node.is_op()) {
      v.exact = leaf_exact(e, node, f);
      continue;
    }
    int k = node.kind == NodeKind::Binary ? 2 : 1;
    OpRecord &rec = a.ops[node.op_index];
    rec.op_index = node.op_index;

    std::vector<RangeSource> sources;
    for (int j = 0; j < k; ++j) {
      const DSLValue &in = val[node.children[j]];
      if (in.range != RangeState::InRange)
        sources.push_back({j, in.provenance, in.range, in.logmag});
    }
    if (v.range != RangeState::InRange)
      v.provenance = sources.empty() ? node.op_index : sources.front().provenance;

    DSLValue in[2];
    for (int j = 0; j < k; ++j)
      in[j] = val[node.children[j]];
    std::span<const DSLValue> args(in, k);
    if (sources.empty()) {
      if (has_condition_entry(node.op)) {
        BigFloat xs[2] = {mid[node.children[0]],
                          k == 2 ? mid[node.children[1]] : BigFloat(64)};
        rec.has_condition = true;
        rec.condition = condition_values_of<BigFloat>(node.op, xs);
        for (int j = 0; j < k; ++j)
          rec.exact[j] = in[j].exact;
      }
    } else if (v.range == RangeState::InRange) {
      bool underflowed = sources.front().state == RangeState::Underflowed;
      bool benign = underflowed && (node.op == Op::Cos || node.op == Op::Exp);
      RangeEvent ev{RangeEventKind::Reentry, node.op_index, std::move(sources), benign, {}};
      RescueResult rr = check_rescue(node.op_index, node.op, args, v,
                                     std::span<const RangeEvent>(&ev, 1), f, opts);
      rec.fixed = std::move(rr.explanations);
      rec.suppressed = std::move(rr.suppressed);
    }

    TraceEntry t;
    t.op_index = node.op_index;
    t.node = static_cast<int>(i);
    t.native = native[i];
    t.shadow = r;
    t.logmag = v.logmag;
    t.range = v.range;
    a.trace.push_back(t);
  }
  return a;
}

} // namespace

std::string_view mode_name(Mode m) {
  switch (m) {
  case Mode::Dsl:
    return "dsl";
  case Mode::DdOracle:
    return "dd-oracle";
  case Mode::RefCond:
    return "ref-cond";
  }
  return "?";
}

std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "dsl")
    return Mode::Dsl;
  if (s == "dd-oracle")
    return Mode::DdOracle;
  if (s == "ref-cond")
    return Mode::RefCond;
  return std::nullopt;
}

std::vector<double> default_thresholds() {
  std::vector<double> t;
  for (double v = 4.0; v <= 4096.0; v *= 2.0)
    t.push_back(v);
  return t;
}

double default_threshold(Mode m) { return m == Mode::DdOracle ? 16.0 : 64.0; }

std::vector<Explanation> InputAnalysis::explanations(double threshold,
                                                     const DetectOptions &opts) const {
  std::vector<Explanation> out;
  for (const OpRecord &rec : ops) {
    if (rec.has_condition) {
      std::vector<Explanation> c = check_condition(
          rec.op_index, rec.condition, std::span<const bool>(rec.exact.data(), 2),
          threshold, opts);
      out.insert(out.end(), c.begin(), c.end());
    }
    if (rec.has_ulps && static_cast<double>(rec.ulps) > threshold) {
      Explanation e;
      e.kind = ErrorKind::OracleMismatch;
      e.op_index = rec.op_index;
      e.value = static_cast<double>(rec.ulps);
      e.sources = {rec.op_index};
      out.push_back(e);
    }
    out.insert(out.end(), rec.fixed.begin(), rec.fixed.end());
  }
  return out;
}

bool InputAnalysis::flagged(double threshold, const DetectOptions &opts) const {
  for (const OpRecord &rec : ops) {
    if (!rec.fixed.empty())
      return true;
    if (rec.has_ulps && static_cast<double>(rec.ulps) > threshold)
      return true;
    if (rec.has_condition &&
        !check_condition(rec.op_index, rec.condition,
                         std::span<const bool>(rec.exact.data(), 2), threshold, opts)
             .empty())
      return true;
  }
  return false;
}

InputAnalysis analyze_input(const Expr &e, Format f, const InputVector &inputs, Mode mode,
                            const DetectOptions &opts) {
  if (inputs.size() < e.variables().size())
    throw std::invalid_argument("missing input bindings");
  switch (mode) {
  case Mode::Dsl:
    return analyze_dsl(e, f, inputs, opts);
  case Mode::DdOracle:
    return analyze_dd_oracle(e, f, inputs);
  case Mode::RefCond:
    return analyze_ref_cond(e, f, inputs, opts);
  }
  throw std::invalid_argument("unknown mode");
}

RunOutput run_input(const Benchmark &b, const InputVector &inputs, Mode mode,
                    double threshold, const DetectOptions &opts) {
  InputAnalysis a = analyze_input(b.body, b.format, inputs, mode, opts);
  RunOutput r;
  r.native = a.native;
  r.discarded = a.discarded || !a.domain_errors.empty();
  if (!a.discarded)
    r.explanations = a.explanations(threshold, opts);
  return r;
}

Confusion confusion_from_counts(uint64_t tp, uint64_t fp, uint64_t fn, uint64_t tn) {
  Confusion c{tp, fp, fn, tn, 1.0, 1.0};
  if (tp + fp > 0)
    c.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0)
    c.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return c;
}

Confusion precision_recall(const std::vector<bool> &flags, const std::vector<bool> &labels) {
  if (flags.size() != labels.size())
    throw std::invalid_argument("flags and labels differ in length");
  uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i])
      ++(labels[i] ? tp : fp);
    else
      ++(labels[i] ? fn : tn);
  }
  return confusion_from_counts(tp, fp, fn, tn);
}

std::vector<PreparedBenchmark> prepare_suite(const std::vector<Benchmark> &suite,
                                             int inputs_per_benchmark, uint64_t seed,
                                             double ulp_bits) {
  std::vector<PreparedBenchmark> out;
  out.reserve(suite.size());
  for (const Benchmark &b : suite) {
    PreparedBenchmark p;
    p.benchmark = &b;
    auto accept = [&](const InputVector &v) {
      double native = evaluate_native(b.body, v, b.format).back();
      GroundTruth g = ground_truth(b.body, v, b.format, native);
      if (g.status != GroundTruth::Status::Ok) {
        p.discarded.push_back({v, g.status == GroundTruth::Status::DomainError
                                      ? "domain-error"
                                      : "no-convergence"});
        return false;
      }
      p.inputs.push_back({v, native, g, g.bits_of_error > ulp_bits});
      return true;
    };
    try {
      sample_inputs(b, inputs_per_benchmark, benchmark_seed(seed, b.index), accept);
    } catch (const SamplingExhaustedError &ex) {
      p.error = ex.what();
    }
    out.push_back(std::move(p));
  }
  return out;
}

SweepReport sweep(const std::vector<PreparedBenchmark> &prepared, const SweepConfig &cfg,
                  uint64_t seed) {
  if (cfg.thresholds.empty())
    throw std::invalid_argument("threshold list is empty");
  for (double t : cfg.thresholds)
    if (!(t >= 1.0))
      throw std::invalid_argument("thresholds must be at least 1");

  struct Task {
    std::size_t bench;
    std::size_t input;
  };
  std::vector<Task> tasks;
  for (std::size_t b = 0; b < prepared.size(); ++b)
    for (std::size_t i = 0; i < prepared[b].inputs.size(); ++i)
      tasks.push_back({b, i});

  std::vector<InputAnalysis> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t k = next.fetch_add(1);
      if (k >= tasks.size())
        break;
      const PreparedBenchmark &p = prepared[tasks[k].bench];
      results[k] = analyze_input(p.benchmark->body, p.benchmark->format,
                                 p.inputs[tasks[k].input].bindings, cfg.mode, cfg.detect);
    }
  };

  auto start = std::chrono::steady_clock::now();
  int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j)
      pool.emplace_back([&]() {
        worker();
        mpfr_free_cache();
      });
    for (std::thread &t : pool)
      t.join();
  }
  auto stop = std::chrono::steady_clock::now();

  SweepReport rep;
  rep.mode = cfg.mode;
  rep.seed = seed;
  rep.eval_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  std::vector<std::array<uint64_t, 4>> counts(cfg.thresholds.size(), {0, 0, 0, 0});

  std::size_t k = 0;
  for (const PreparedBenchmark &p : prepared) {
    BenchmarkReport br;
    br.name = p.benchmark->name;
    br.args = p.benchmark->args;
    br.error = p.error;
    for (const DiscardedInput &d : p.discarded)
      rep.discarded.emplace_back(br.name, d);
    for (const LabeledInput &li : p.inputs) {
      const InputAnalysis &a = results[k++];
      if (a.discarded) {
        rep.discarded.emplace_back(br.name, DiscardedInput{li.bindings, a.discard_reason});
        continue;
      }
      InputReport ir;
      ir.input = li;
      ir.flags = a.explanations(cfg.threshold, cfg.detect);
      for (std::size_t t = 0; t < cfg.thresholds.size(); ++t) {
        bool fl = a.flagged(cfg.thresholds[t], cfg.detect);
        ir.flagged.push_back(fl);
        int cell = fl ? (li.label ? 0 : 1) : (li.label ? 2 : 3);
        ++counts[t][cell];
      }
      br.inputs.push_back(std::move(ir));
    }
    rep.benchmarks.push_back(std::move(br));
  }
  for (std::size_t t = 0; t < cfg.thresholds.size(); ++t)
    rep.rows.push_back({cfg.thresholds[t], confusion_from_counts(counts[t][0], counts[t][1],
                                                                 counts[t][2], counts[t][3])});
  return rep;
}

SweepReport sweep(const std::vector<Benchmark> &suite, int inputs_per_benchmark,
                  uint64_t seed, const SweepConfig &cfg, double ulp_bits) {
  return sweep(prepare_suite(suite, inputs_per_benchmark, seed, ulp_bits), cfg, seed);
}

} // namespace floatscope
