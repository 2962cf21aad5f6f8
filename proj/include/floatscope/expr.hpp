#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "floatscope/format.hpp"

namespace floatscope {

enum class Op : uint8_t {
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Sqrt,
  Cbrt,
  Log,
  Exp,
  Pow,
  Sin,
  Cos,
  Tan,
  Acos,
  Asin,
};

constexpr int kOpKinds = 15;

int arity(Op op);
std::string_view op_name(Op op);
std::optional<Op> op_from_name(std::string_view name, int nargs);

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string &msg, std::size_t position)
      : std::runtime_error(msg), position_(position) {}
  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

class UnsupportedOperatorError : public ParseError {
public:
  UnsupportedOperatorError(const std::string &op, std::size_t position);
  const std::string &op() const { return op_; }

private:
  std::string op_;
};

class UnknownConstantError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class NamedConstant { Pi, E };

struct ConstantValue {
  double value;
  bool exact;
  double residual;
};

ConstantValue resolve_constant(std::string_view name);
ConstantValue resolve_constant(NamedConstant c);
std::string_view constant_name(NamedConstant c);

struct Literal {
  std::string text;
  double value64 = 0.0;
  double value32 = 0.0;
  bool exact64 = false;
  bool exact32 = false;

  double value(Format f) const { return f == Format::Binary32 ? value32 : value64; }
  bool exact(Format f) const { return f == Format::Binary32 ? exact32 : exact64; }
};

// Throws ParseError when text is not a number.
Literal make_literal(std::string_view text);

struct SourceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

enum class NodeKind { Variable, Literal, Constant, Unary, Binary };

struct Node {
  NodeKind kind = NodeKind::Variable;
  Op op = Op::Neg;
  std::array<int, 2> children{-1, -1};
  int variable = -1;
  int literal = -1;
  NamedConstant constant = NamedConstant::Pi;
  int op_index = -1;
  SourceSpan span;

  bool is_op() const { return kind == NodeKind::Unary || kind == NodeKind::Binary; }
};

// Nodes are stored children-first; the root is the last node. Operation
// indices follow a preorder walk from the root.
class Expr {
public:
  const std::vector<Node> &nodes() const { return nodes_; }
  const Node &node(int i) const { return nodes_[i]; }
  int root() const { return static_cast<int>(nodes_.size()) - 1; }
  const std::vector<Literal> &literals() const { return literals_; }
  const std::vector<std::string> &variables() const { return variables_; }
  int op_count() const { return static_cast<int>(op_nodes_.size()); }
  int node_of_op(int op_index) const { return op_nodes_[op_index]; }
  const std::string &source() const { return source_; }

  // Renumber variables so that variable i is args[i]. Throws ParseError if a
  // variable is not among args.
  void bind_arguments(const std::vector<std::string> &args);

private:
  friend class ExprBuilder;
  std::vector<Node> nodes_;
  std::vector<Literal> literals_;
  std::vector<std::string> variables_;
  std::vector<int> op_nodes_;
  std::string source_;
};

bool structurally_equal(const Expr &a, const Expr &b);

Expr parse_expression(std::string_view text);
std::string to_sexpr(const Expr &e);
std::string node_sexpr(const Expr &e, int node);

struct Benchmark {
  std::string name;
  std::vector<std::string> args;
  Format format = Format::Binary64;
  Expr body;
  int index = 0;
};

std::vector<Benchmark> parse_suite(std::string_view text);

using InputVector = std::vector<double>;
using InputPredicate = std::function<bool(const InputVector &)>;

class SamplingExhaustedError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

uint64_t splitmix64(uint64_t x);

// Per-benchmark stream seed derived from the run seed.
uint64_t benchmark_seed(uint64_t seed, int benchmark_index);

// Uniform over finite bit patterns of the target format; candidates failing
// accept are redrawn. budget <= 0 means 100 * count candidates.
std::vector<InputVector> sample_inputs(const Benchmark &b, int count, uint64_t seed,
                                       const InputPredicate &accept = {},
                                       int budget = 0);

// Input files: one JSON object per line mapping each argument name to a
// hex-float string. Blank lines are skipped. Throws ParseError with the
// byte offset of the offending line.
std::vector<InputVector> parse_inputs(std::string_view text,
                                      const std::vector<std::string> &args);

} // namespace floatscope
