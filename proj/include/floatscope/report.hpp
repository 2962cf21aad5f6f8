#pragma once

#include <string>
#include <vector>

#include "floatscope/harness.hpp"

namespace floatscope {

struct CheckRequest {
  const Expr *expr = nullptr;
  Format format = Format::Binary64;
  InputVector inputs;
  Mode mode = Mode::Dsl;
  double threshold = 64.0;
  DetectOptions detect;
};

// Single-input report: native value, per-op trace and explanations.
std::string check_text(const CheckRequest &req, const InputAnalysis &a,
                       const std::vector<Explanation> &ex);
std::string check_json(const CheckRequest &req, const InputAnalysis &a,
                       const std::vector<Explanation> &ex);

std::string sweep_json(const SweepReport &rep, bool timing);
std::string sweep_text(const SweepReport &rep, bool timing);

// Always carries timing: the wall-time ratio is part of the comparison.
std::string compare_json(const std::vector<SweepReport> &reps);
std::string compare_text(const std::vector<SweepReport> &reps);

} // namespace floatscope
