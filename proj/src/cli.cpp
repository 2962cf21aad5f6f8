#include "floatscope/cli.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "floatscope/harness.hpp"
#include "floatscope/report.hpp"

namespace floatscope {

namespace {

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string mode = "dsl";
  double threshold = std::nan(""); // NaN: per-mode default
  std::string thresholds;
  uint64_t seed = 0;
  int inputs = 256;
  double ulp_bits = 4.0;
  bool no_suppress_exact = false;
  bool no_suppress_magnitude = false;
  bool no_suppress_benign = false;
  std::string format = "text";
  int jobs = 1;
  bool timing = false;
  std::string precision = "binary64";

  std::string expr;
  std::vector<std::string> bindings;
  std::string suite;
};

void add_common(CLI::App *cmd, Options &o, bool with_mode) {
  if (with_mode)
    cmd->add_option("--mode", o.mode, "Detection mode: dsl, dd-oracle or ref-cond")
        ->check(CLI::IsMember({"dsl", "dd-oracle", "ref-cond"}));
  cmd->add_option("--threshold", o.threshold,
                  "Condition threshold (default 64); ULP count in dd-oracle mode "
                  "(default 16)");
  cmd->add_flag("--no-suppress-exact", o.no_suppress_exact,
                "Report high condition numbers of exact arguments");
  cmd->add_flag("--no-suppress-magnitude", o.no_suppress_magnitude,
                "Report rescues of operands far smaller than the other addend");
  cmd->add_flag("--no-suppress-benign-cos", o.no_suppress_benign,
                "Report rescues whose native result is already correctly rounded");
  cmd->add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"json", "text"}));
}

void add_sweep(CLI::App *cmd, Options &o) {
  cmd->add_option("suite", o.suite, "FPCore suite file")->required();
  cmd->add_option("--thresholds", o.thresholds,
                  "Comma-separated sweep thresholds (default 4,8,...,4096)");
  cmd->add_option("--seed", o.seed, "Sampling seed (FLOATSCOPE_SEED overrides)");
  cmd->add_option("--inputs", o.inputs, "Valid inputs per benchmark")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--ulp-bits", o.ulp_bits,
                  "Label an input erroneous above this many bits of error "
                  "(4 bits: more than 16 ULPs)");
  cmd->add_option("--jobs", o.jobs, "Worker threads (0: one per core)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--timing", o.timing, "Include evaluation wall time in the report");
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DetectOptions detect_options(const Options &o) {
  DetectOptions d;
  d.suppress_exact = !o.no_suppress_exact;
  d.suppress_magnitude = !o.no_suppress_magnitude;
  d.suppress_benign = !o.no_suppress_benign;
  return d;
}

double threshold_for(const Options &o, Mode m) {
  double t = std::isnan(o.threshold) ? default_threshold(m) : o.threshold;
  if (!(t >= 1.0))
    throw ConfigError("threshold must be at least 1");
  return t;
}

std::vector<double> parse_thresholds(const std::string &text) {
  if (text.empty())
    return default_thresholds();
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty())
      continue;
    double v = 0.0;
    try {
      v = parse_double(item);
    } catch (const std::invalid_argument &) {
      throw ConfigError("bad threshold '" + item + "'");
    }
    if (!(v >= 1.0))
      throw ConfigError("thresholds must be at least 1");
    out.push_back(v);
  }
  if (out.empty())
    throw ConfigError("threshold list is empty");
  return out;
}

uint64_t effective_seed(uint64_t seed) {
  const char *env = std::getenv("FLOATSCOPE_SEED");
  if (!env || !*env)
    return seed;
  char *end = nullptr;
  errno = 0;
  unsigned long long v = std::strtoull(env, &end, 0);
  if (errno != 0 || *end != '\0' || env[0] == '-')
    throw ConfigError(std::string("FLOATSCOPE_SEED is not an unsigned integer: ") + env);
  return v;
}

int jobs_for(const Options &o) {
  if (o.jobs > 0)
    return o.jobs;
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

std::vector<Benchmark> load_suite(const std::string &path) {
  std::string text = read_file(path);
  return parse_suite(text);
}

bool any_flags(const SweepReport &rep) {
  for (const BenchmarkReport &b : rep.benchmarks)
    for (const InputReport &ir : b.inputs)
      if (!ir.flags.empty())
        return true;
  return false;
}

int cmd_check(const Options &o, std::ostream &out, std::ostream &err) {
  std::string text = o.expr;
  {
    std::ifstream probe(o.expr);
    if (probe && o.expr.find('(') == std::string::npos)
      text = read_file(o.expr);
  }
  Format format = Format::Binary64;
  if (auto f = parse_format(o.precision))
    format = *f;
  else
    throw ConfigError("unsupported precision '" + o.precision + "'");

  Expr e;
  std::vector<std::string> order;
  std::string head = text.substr(0, std::min<std::size_t>(text.size(), 64));
  if (head.find("FPCore") != std::string::npos) {
    std::vector<Benchmark> suite = parse_suite(text);
    if (suite.empty())
      throw ConfigError("no FPCore form found");
    e = suite.front().body;
    format = suite.front().format;
    order = suite.front().args;
  } else {
    e = parse_expression(text);
    order = e.variables();
  }

  InputVector inputs(order.size(), 0.0);
  std::vector<bool> bound(order.size(), false);
  for (const std::string &b : o.bindings) {
    auto eq = b.find('=');
    if (eq == std::string::npos)
      throw ConfigError("binding '" + b + "' is not name=value");
    std::string name = b.substr(0, eq);
    auto it = std::find(order.begin(), order.end(), name);
    if (it == order.end())
      throw ConfigError("'" + name + "' is not a variable of the expression");
    double v = 0.0;
    try {
      v = parse_double(b.substr(eq + 1));
    } catch (const std::invalid_argument &) {
      throw ConfigError("bad value in binding '" + b + "'");
    }
    if (!std::isfinite(v))
      throw ConfigError("binding '" + b + "' is not finite");
    inputs[it - order.begin()] = v;
    bound[it - order.begin()] = true;
  }
  for (std::size_t i = 0; i < order.size(); ++i)
    if (!bound[i])
      throw ConfigError("no binding for '" + order[i] + "'");

  CheckRequest req;
  req.expr = &e;
  req.format = format;
  req.inputs = inputs;
  req.mode = *parse_mode(o.mode);
  req.threshold = threshold_for(o, req.mode);
  req.detect = detect_options(o);

  InputAnalysis a = analyze_input(e, format, inputs, req.mode, req.detect);
  std::vector<Explanation> ex;
  if (!a.discarded)
    ex = a.explanations(req.threshold, req.detect);
  out << (o.format == "json" ? check_json(req, a, ex) : check_text(req, a, ex));
  if (a.discarded) {
    err << "error: reference evaluation failed (" << a.discard_reason << ")\n";
    return 1;
  }
  if (!a.domain_errors.empty()) {
    for (const std::string &d : a.domain_errors)
      err << "error: domain error at " << d << "\n";
    return 1;
  }
  return ex.empty() ? 0 : 2;
}

int cmd_bench(const Options &o, std::ostream &out) {
  std::vector<Benchmark> suite = load_suite(o.suite);
  SweepConfig cfg;
  cfg.mode = *parse_mode(o.mode);
  cfg.thresholds = parse_thresholds(o.thresholds);
  cfg.threshold = threshold_for(o, cfg.mode);
  cfg.detect = detect_options(o);
  cfg.jobs = jobs_for(o);
  uint64_t seed = effective_seed(o.seed);
  SweepReport rep = sweep(suite, o.inputs, seed, cfg, o.ulp_bits);
  out << (o.format == "json" ? sweep_json(rep, o.timing) : sweep_text(rep, o.timing));
  return any_flags(rep) ? 2 : 0;
}

int cmd_compare(const Options &o, std::ostream &out) {
  std::vector<Benchmark> suite = load_suite(o.suite);
  std::vector<double> thresholds = parse_thresholds(o.thresholds);
  uint64_t seed = effective_seed(o.seed);
  std::vector<PreparedBenchmark> prepared = prepare_suite(suite, o.inputs, seed, o.ulp_bits);
  std::vector<SweepReport> reps;
  bool findings = false;
  for (Mode m : {Mode::Dsl, Mode::DdOracle, Mode::RefCond}) {
    SweepConfig cfg;
    cfg.mode = m;
    cfg.thresholds = thresholds;
    cfg.threshold = threshold_for(o, m);
    cfg.detect = detect_options(o);
    cfg.jobs = jobs_for(o);
    reps.push_back(sweep(prepared, cfg, seed));
    findings = findings || any_flags(reps.back());
  }
  out << (o.format == "json" ? compare_json(reps) : compare_text(reps));
  return findings ? 2 : 0;
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"floatscope: explain floating-point error in numeric expressions"};
  app.require_subcommand(1);
  Options o;

  CLI::App *check = app.add_subcommand(
      "check", "Analyze one expression at one input; exit 2 when anything is flagged");
  check->add_option("expression", o.expr,
                    "S-expression, FPCore form, or a file containing either")
      ->required();
  check->add_option("bindings", o.bindings, "Variable bindings name=value");
  check->add_option("--precision", o.precision, "binary64 or binary32 (s-expressions only)");
  add_common(check, o, true);

  CLI::App *bench = app.add_subcommand("bench", "Sweep thresholds over a suite");
  add_common(bench, o, true);
  add_sweep(bench, o);

  CLI::App *compare =
      app.add_subcommand("compare", "Run dsl, dd-oracle and ref-cond on identical inputs");
  add_common(compare, o, false);
  add_sweep(compare, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &) {
    CLI::App *shown = &app;
    for (CLI::App *s : {check, bench, compare})
      if (s->parsed())
        shown = s;
    out << shown->help();
    return 0;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (check->parsed())
      return cmd_check(o, out, err);
    if (bench->parsed())
      return cmd_bench(o, out);
    return cmd_compare(o, out);
  } catch (const ParseError &e) {
    err << "error: " << e.what() << " (at offset " << e.position() << ")\n";
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
  }
  return 1;
}

} // namespace floatscope
