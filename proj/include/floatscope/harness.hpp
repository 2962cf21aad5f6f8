#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "floatscope/detect.hpp"
#include "floatscope/expr.hpp"
#include "floatscope/refeval.hpp"
#include "floatscope/shadow.hpp"

namespace floatscope {

enum class Mode { Dsl, DdOracle, RefCond };

std::string_view mode_name(Mode m);
std::optional<Mode> parse_mode(std::string_view s);

// Condition thresholds for dsl and ref-cond, ULP counts for dd-oracle.
std::vector<double> default_thresholds(); // 4, 8, ..., 4096
double default_threshold(Mode m);         // 64, or 16 ULPs for dd-oracle

// Threshold-independent result of one operation; flags for any threshold
// are derived from it.
struct OpRecord {
  int op_index = -1;
  bool has_condition = false;
  ConditionValues condition;
  std::array<bool, 2> exact{false, false};
  // dd-oracle: distance between the native intermediate and the rounded dd.
  bool has_ulps = false;
  uint64_t ulps = 0;
  // Flags that do not depend on the threshold (rescues, native range).
  std::vector<Explanation> fixed;
  std::vector<SuppressedRescue> suppressed;
};

struct TraceEntry {
  int op_index = -1;
  int node = -1;
  double native = 0.0;
  double shadow = 0.0; // shadow value rounded to the target format
  double logmag = 0.0; // ê
  RangeState range = RangeState::InRange;
  bool unknown = false;
  bool undefined = false;
};

struct InputAnalysis {
  Mode mode = Mode::Dsl;
  double native = 0.0;
  std::vector<OpRecord> ops; // in op-index order
  std::vector<TraceEntry> trace;
  std::vector<std::string> domain_errors;
  // ref-cond only: the reference evaluation failed.
  bool discarded = false;
  std::string discard_reason;

  std::vector<Explanation> explanations(double threshold,
                                        const DetectOptions &opts = {}) const;
  bool flagged(double threshold, const DetectOptions &opts = {}) const;
};

InputAnalysis analyze_input(const Expr &e, Format f, const InputVector &inputs, Mode mode,
                            const DetectOptions &opts = {});

struct RunOutput {
  double native = 0.0;
  std::vector<Explanation> explanations;
  bool discarded = false;
};

RunOutput run_input(const Benchmark &b, const InputVector &inputs, Mode mode,
                    double threshold, const DetectOptions &opts = {});

struct Confusion {
  uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 1.0;
  double recall = 1.0;
};

// Precision is 1 when tp + fp = 0; recall is 1 when tp + fn = 0.
Confusion precision_recall(const std::vector<bool> &flags, const std::vector<bool> &labels);
Confusion confusion_from_counts(uint64_t tp, uint64_t fp, uint64_t fn, uint64_t tn);

struct LabeledInput {
  InputVector bindings;
  double native = 0.0;
  GroundTruth truth;
  bool label = false;
};

struct DiscardedInput {
  InputVector bindings;
  std::string reason;
};

struct PreparedBenchmark {
  const Benchmark *benchmark = nullptr;
  std::vector<LabeledInput> inputs;
  std::vector<DiscardedInput> discarded;
  std::string error; // sampling gave up before reaching the count
};

// Samples inputs whose ground truth exists and labels them.
std::vector<PreparedBenchmark> prepare_suite(const std::vector<Benchmark> &suite,
                                             int inputs_per_benchmark, uint64_t seed,
                                             double ulp_bits = 4.0);

struct SweepConfig {
  Mode mode = Mode::Dsl;
  std::vector<double> thresholds = default_thresholds();
  double threshold = 64.0; // the one whose flags are reported per input
  DetectOptions detect;
  int jobs = 1;
};

struct InputReport {
  LabeledInput input;
  std::vector<Explanation> flags; // at SweepConfig::threshold
  std::vector<bool> flagged;      // per sweep threshold
  bool discarded = false;
  std::string discard_reason;
};

struct BenchmarkReport {
  std::string name;
  std::vector<std::string> args;
  std::string error;
  std::vector<InputReport> inputs;
};

struct ThresholdRow {
  double t = 0.0;
  Confusion c;
};

struct SweepReport {
  Mode mode = Mode::Dsl;
  uint64_t seed = 0;
  std::vector<BenchmarkReport> benchmarks;
  std::vector<ThresholdRow> rows;
  std::vector<std::pair<std::string, DiscardedInput>> discarded;
  double eval_ms = 0.0; // analysis wall time, excluding parsing and labeling
};

SweepReport sweep(const std::vector<PreparedBenchmark> &prepared, const SweepConfig &cfg,
                  uint64_t seed);

// Convenience: prepare and sweep in one call.
SweepReport sweep(const std::vector<Benchmark> &suite, int inputs_per_benchmark,
                  uint64_t seed, const SweepConfig &cfg, double ulp_bits = 4.0);

} // namespace floatscope
