#include "floatscope/report.hpp"

#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

namespace floatscope {

namespace {

using json = nlohmann::ordered_json;

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string fmt_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string op_label(const Expr &e, int op_index) {
  const Node &n = e.node(e.node_of_op(op_index));
  return "op " + std::to_string(op_index) + " (" + std::string(op_name(n.op)) + ")";
}

std::string op_source(const Expr &e, int op_index) {
  const Node &n = e.node(e.node_of_op(op_index));
  const std::string &src = e.source();
  if (n.span.end <= src.size() && n.span.begin < n.span.end)
    return src.substr(n.span.begin, n.span.end - n.span.begin);
  return node_sexpr(e, e.node_of_op(op_index));
}

json flag_json(const Explanation &x) {
  json j;
  j["op"] = x.op_index;
  j["kind"] = std::string(error_kind_name(x.kind));
  j["value"] = hex_float(x.value);
  j["sources"] = x.sources;
  return j;
}

json bindings_json(const std::vector<std::string> &args, const InputVector &v) {
  json j = json::object();
  for (std::size_t i = 0; i < args.size() && i < v.size(); ++i)
    j[args[i]] = hex_float(v[i]);
  return j;
}

json rows_json(const SweepReport &rep) {
  json rows = json::array();
  for (const ThresholdRow &r : rep.rows) {
    json j;
    j["t"] = r.t;
    j["tp"] = r.c.tp;
    j["fp"] = r.c.fp;
    j["fn"] = r.c.fn;
    j["tn"] = r.c.tn;
    j["precision"] = hex_float(r.c.precision);
    j["recall"] = hex_float(r.c.recall);
    rows.push_back(std::move(j));
  }
  return rows;
}

json discarded_json(const SweepReport &rep) {
  std::map<std::string, std::vector<std::string>> args;
  for (const BenchmarkReport &b : rep.benchmarks)
    args[b.name] = b.args;
  json d = json::array();
  for (const auto &[name, in] : rep.discarded) {
    json j;
    j["benchmark"] = name;
    j["bindings"] = bindings_json(args[name], in.bindings);
    j["reason"] = in.reason;
    d.push_back(std::move(j));
  }
  return d;
}

json sweep_object(const SweepReport &rep, bool timing) {
  json j;
  j["mode"] = std::string(mode_name(rep.mode));
  j["seed"] = rep.seed;
  json benches = json::array();
  for (const BenchmarkReport &b : rep.benchmarks) {
    json bj;
    bj["name"] = b.name;
    if (!b.error.empty())
      bj["error"] = b.error;
    json inputs = json::array();
    for (const InputReport &ir : b.inputs) {
      json ij;
      ij["bindings"] = bindings_json(b.args, ir.input.bindings);
      ij["native"] = hex_float(ir.input.native);
      ij["label"] = ir.input.label;
      json flags = json::array();
      for (const Explanation &x : ir.flags)
        flags.push_back(flag_json(x));
      ij["flags"] = std::move(flags);
      inputs.push_back(std::move(ij));
    }
    bj["inputs"] = std::move(inputs);
    benches.push_back(std::move(bj));
  }
  j["benchmarks"] = std::move(benches);
  j["thresholds"] = rows_json(rep);
  j["discarded"] = discarded_json(rep);
  if (timing)
    j["timing_ms"] = rep.eval_ms;
  return j;
}

std::string rows_text(const SweepReport &rep) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%10s %6s %6s %6s %6s %10s %10s\n", "threshold", "tp", "fp",
                "fn", "tn", "precision", "recall");
  os << buf;
  for (const ThresholdRow &r : rep.rows) {
    std::snprintf(buf, sizeof buf, "%10s %6llu %6llu %6llu %6llu %10s %10s\n",
                  fmt_g(r.t).c_str(), static_cast<unsigned long long>(r.c.tp),
                  static_cast<unsigned long long>(r.c.fp),
                  static_cast<unsigned long long>(r.c.fn),
                  static_cast<unsigned long long>(r.c.tn), fmt_fixed(r.c.precision).c_str(),
                  fmt_fixed(r.c.recall).c_str());
    os << buf;
  }
  return os.str();
}

std::size_t labeled_count(const SweepReport &rep) {
  std::size_t n = 0;
  for (const BenchmarkReport &b : rep.benchmarks)
    n += b.inputs.size();
  return n;
}

} // namespace

std::string check_text(const CheckRequest &req, const InputAnalysis &a,
                       const std::vector<Explanation> &ex) {
  const Expr &e = *req.expr;
  std::ostringstream os;
  os << "expression: " << to_sexpr(e) << "\n";
  os << "mode: " << mode_name(req.mode) << ", format: " << format_name(req.format)
     << ", threshold: " << fmt_g(req.threshold) << "\n";
  for (std::size_t i = 0; i < e.variables().size() && i < req.inputs.size(); ++i)
    os << "  " << e.variables()[i] << " = " << hex_float(req.inputs[i]) << "\n";
  os << "native: " << hex_float(a.native) << " (" << fmt_g(a.native) << ")\n";
  if (a.discarded) {
    os << "reference evaluation failed: " << a.discard_reason << "\n";
    return os.str();
  }
  os << "trace:\n";
  for (int k = 0; k < e.op_count(); ++k) {
    for (const TraceEntry &t : a.trace) {
      if (t.op_index != k)
        continue;
      os << "  " << op_label(e, k) << "  fp " << hex_float(t.native) << "  shadow ";
      if (t.unknown)
        os << "unknown";
      else if (t.undefined)
        os << "undefined";
      else
        os << hex_float(t.shadow);
      os << "  e^ " << fmt_g(t.logmag) << "  " << range_state_name(t.range) << "\n";
    }
  }
  for (const std::string &d : a.domain_errors)
    os << "domain error: " << d << "\n";
  if (ex.empty()) {
    os << "explanations: none\n";
  } else {
    os << "explanations:\n";
    for (const Explanation &x : ex) {
      os << "  " << op_label(e, x.op_index) << " " << error_kind_name(x.kind);
      switch (x.kind) {
      case ErrorKind::Cancellation:
      case ErrorKind::Sensitivity:
        os << " in argument " << x.argument << ", condition " << fmt_g(x.value);
        break;
      case ErrorKind::OracleMismatch:
        os << ", " << fmt_g(x.value) << " ulps from the dd value";
        break;
      default:
        break;
      }
      os << "\n    at " << op_source(e, x.op_index) << "\n";
      if (x.kind == ErrorKind::OverflowRescue || x.kind == ErrorKind::UnderflowRescue)
        for (int s : x.sources)
          if (s >= 0)
            os << "    caused by " << op_label(e, s) << " at " << op_source(e, s) << "\n";
    }
  }
  bool any_suppressed = false;
  for (const OpRecord &r : a.ops)
    for (const SuppressedRescue &s : r.suppressed) {
      if (!any_suppressed)
        os << "suppressed:\n";
      any_suppressed = true;
      os << "  " << op_label(e, s.explanation.op_index) << " "
         << error_kind_name(s.explanation.kind) << " suppressed (" << s.reason << ")\n";
    }
  return os.str();
}

std::string check_json(const CheckRequest &req, const InputAnalysis &a,
                       const std::vector<Explanation> &ex) {
  const Expr &e = *req.expr;
  json j;
  j["expression"] = to_sexpr(e);
  j["mode"] = std::string(mode_name(req.mode));
  j["format"] = std::string(format_name(req.format));
  j["threshold"] = req.threshold;
  j["bindings"] = bindings_json(e.variables(), req.inputs);
  j["native"] = hex_float(a.native);
  if (a.discarded)
    j["discarded"] = a.discard_reason;
  json trace = json::array();
  for (const TraceEntry &t : a.trace) {
    json tj;
    tj["op"] = t.op_index;
    tj["name"] = std::string(op_name(e.node(t.node).op));
    tj["native"] = hex_float(t.native);
    tj["shadow"] = t.unknown ? "unknown" : t.undefined ? "undefined" : hex_float(t.shadow);
    tj["logmag"] = hex_float(t.logmag);
    tj["range"] = std::string(range_state_name(t.range));
    trace.push_back(std::move(tj));
  }
  j["trace"] = std::move(trace);
  j["domain_errors"] = a.domain_errors;
  json flags = json::array();
  for (const Explanation &x : ex) {
    json fj = flag_json(x);
    fj["argument"] = x.argument;
    fj["source"] = op_source(e, x.op_index);
    flags.push_back(std::move(fj));
  }
  j["flags"] = std::move(flags);
  return j.dump(2) + "\n";
}

std::string sweep_json(const SweepReport &rep, bool timing) {
  return sweep_object(rep, timing).dump(2) + "\n";
}

std::string sweep_text(const SweepReport &rep, bool timing) {
  std::ostringstream os;
  os << "mode " << mode_name(rep.mode) << ", seed " << rep.seed << ", "
     << rep.benchmarks.size() << " benchmarks, " << labeled_count(rep)
     << " labeled inputs, " << rep.discarded.size() << " discarded\n";
  for (const BenchmarkReport &b : rep.benchmarks)
    if (!b.error.empty())
      os << "warning: " << b.error << "\n";
  os << rows_text(rep);
  if (timing)
    os << "evaluation time: " << fmt_g(rep.eval_ms) << " ms\n";
  return os.str();
}

namespace {

const SweepReport *find_mode(const std::vector<SweepReport> &reps, Mode m) {
  for (const SweepReport &r : reps)
    if (r.mode == m)
      return &r;
  return nullptr;
}

double speedup(const std::vector<SweepReport> &reps) {
  const SweepReport *d = find_mode(reps, Mode::Dsl);
  const SweepReport *r = find_mode(reps, Mode::RefCond);
  if (!d || !r || d->eval_ms <= 0.0)
    return 0.0;
  return r->eval_ms / d->eval_ms;
}

} // namespace

std::string compare_json(const std::vector<SweepReport> &reps) {
  json j;
  j["seed"] = reps.empty() ? 0 : reps.front().seed;
  json modes = json::array();
  for (const SweepReport &r : reps) {
    json m;
    m["mode"] = std::string(mode_name(r.mode));
    m["labeled"] = labeled_count(r);
    m["discarded"] = r.discarded.size();
    m["thresholds"] = rows_json(r);
    m["timing_ms"] = r.eval_ms;
    modes.push_back(std::move(m));
  }
  j["modes"] = std::move(modes);
  j["speedup"] = speedup(reps);
  return j.dump(2) + "\n";
}

std::string compare_text(const std::vector<SweepReport> &reps) {
  std::ostringstream os;
  for (const SweepReport &r : reps) {
    os << "== " << mode_name(r.mode) << " (" << labeled_count(r) << " labeled, "
       << fmt_g(r.eval_ms) << " ms)\n";
    os << rows_text(r);
  }
  os << "ref-cond / dsl time: " << fmt_g(speedup(reps)) << "x\n";
  return os.str();
}

} // namespace floatscope
