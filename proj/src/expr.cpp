#include "floatscope/expr.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdlib>
#include <random>
#include <sstream>

#include <json.hpp>
#include <mpfr.h>

namespace floatscope {

namespace {

struct OpInfo {
  Op op;
  std::string_view name;
  int arity;
};

constexpr OpInfo kOps[] = {
    {Op::Neg, "neg", 1},   {Op::Add, "+", 2},     {Op::Sub, "-", 2},
    {Op::Mul, "*", 2},     {Op::Div, "/", 2},     {Op::Sqrt, "sqrt", 1},
    {Op::Cbrt, "cbrt", 1}, {Op::Log, "log", 1},   {Op::Exp, "exp", 1},
    {Op::Pow, "pow", 2},   {Op::Sin, "sin", 1},   {Op::Cos, "cos", 1},
    {Op::Tan, "tan", 1},   {Op::Acos, "acos", 1}, {Op::Asin, "asin", 1},
};

constexpr std::string_view kKnownUnsupported[] = {"fmod", "log1p", "hypot",
                                                  "copysign"};

struct Datum {
  enum Kind { Atom, String, List } kind = Atom;
  std::string text;
  std::vector<Datum> items;
  std::size_t begin = 0;
  std::size_t end = 0;
};

class Reader {
public:
  explicit Reader(std::string_view text) : text_(text) {}

  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }

  Datum read() {
    skip_space();
    if (pos_ >= text_.size())
      throw ParseError("unexpected end of input", pos_);
    char c = text_[pos_];
    if (c == ')')
      throw ParseError("unexpected ')'", pos_);
    if (c == '(') {
      Datum d;
      d.kind = Datum::List;
      d.begin = pos_++;
      for (;;) {
        skip_space();
        if (pos_ >= text_.size())
          throw ParseError("unterminated list", d.begin);
        if (text_[pos_] == ')')
          break;
        d.items.push_back(read());
      }
      d.end = ++pos_;
      return d;
    }
    if (c == '"') {
      Datum d;
      d.kind = Datum::String;
      d.begin = pos_++;
      while (pos_ < text_.size() && text_[pos_] != '"') {
        if (text_[pos_] == '\\' && pos_ + 1 < text_.size())
          ++pos_;
        d.text.push_back(text_[pos_++]);
      }
      if (pos_ >= text_.size())
        throw ParseError("unterminated string", d.begin);
      d.end = ++pos_;
      return d;
    }
    Datum d;
    d.begin = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != '(' && text_[pos_] != ')' && text_[pos_] != '"' &&
           text_[pos_] != ';')
      ++pos_;
    d.end = pos_;
    d.text = std::string(text_.substr(d.begin, d.end - d.begin));
    return d;
  }

private:
  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n')
          ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

bool looks_numeric(std::string_view t) {
  if (t.empty())
    return false;
  std::size_t i = 0;
  if (t[0] == '-' || t[0] == '+')
    i = 1;
  if (i < t.size() && t[i] == '.')
    ++i;
  return i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]));
}

} // namespace

UnsupportedOperatorError::UnsupportedOperatorError(const std::string &op,
                                                   std::size_t position)
    : ParseError("unsupported operator '" + op +
                     "' (fmod, log1p, hypot and copysign are not supported)",
                 position),
      op_(op) {}

int arity(Op op) { return kOps[static_cast<int>(op)].arity; }

std::string_view op_name(Op op) { return kOps[static_cast<int>(op)].name; }

std::optional<Op> op_from_name(std::string_view name, int nargs) {
  if (name == "-" && nargs == 1)
    return Op::Neg;
  for (const OpInfo &info : kOps)
    if (info.name == name && info.arity == nargs)
      return info.op;
  return std::nullopt;
}

ConstantValue resolve_constant(NamedConstant c) {
  if (c == NamedConstant::Pi)
    return {ddconst::kPi.hi, false, ddconst::kPi.lo};
  return {ddconst::kE.hi, false, ddconst::kE.lo};
}

ConstantValue resolve_constant(std::string_view name) {
  if (name == "PI")
    return resolve_constant(NamedConstant::Pi);
  if (name == "E")
    return resolve_constant(NamedConstant::E);
  throw UnknownConstantError("unknown constant '" + std::string(name) + "'");
}

std::string_view constant_name(NamedConstant c) {
  return c == NamedConstant::Pi ? "PI" : "E";
}

Literal make_literal(std::string_view text) {
  Literal lit;
  lit.text = std::string(text);
  const char *s = lit.text.c_str();
  char *end = nullptr;
  lit.value64 = std::strtod(s, &end);
  if (end != s + lit.text.size())
    throw ParseError("malformed number '" + lit.text + "'", 0);
  lit.value32 = static_cast<double>(std::strtof(s, nullptr));
  if (!std::isfinite(lit.value64))
    throw ParseError("literal '" + lit.text + "' is out of binary64 range", 0);

  // A zero ternary value means the text is exactly a 53-bit number; the
  // comparison rules out subnormal rounding that MPFR does not model.
  mpfr_t m;
  mpfr_init2(m, 53);
  int ternary = mpfr_strtofr(m, s, nullptr, 0, MPFR_RNDN);
  lit.exact64 = ternary == 0 && mpfr_cmp_d(m, lit.value64) == 0;
  mpfr_clear(m);
  lit.exact32 = lit.exact64 && std::isfinite(lit.value32) && lit.value32 == lit.value64;
  return lit;
}

class ExprBuilder {
public:
  // base: offset of source within the text the datum positions refer to.
  explicit ExprBuilder(std::string_view source, std::size_t base = 0) : base_(base) {
    e_.source_ = std::string(source);
  }

  int build(const Datum &d) {
    if (d.kind == Datum::String)
      throw ParseError("unexpected string literal", d.begin);
    if (d.kind == Datum::Atom)
      return leaf(d);
    if (d.items.empty())
      throw ParseError("empty application", d.begin);
    const Datum &head = d.items[0];
    if (head.kind != Datum::Atom || looks_numeric(head.text))
      throw ParseError("expected operator name", head.begin);
    int nargs = static_cast<int>(d.items.size()) - 1;
    std::optional<Op> op = op_from_name(head.text, nargs);
    if (!op) {
      for (const OpInfo &info : kOps)
        if (info.name == head.text)
          throw ParseError("operator '" + head.text + "' expects " +
                               std::to_string(info.arity) + " argument(s)",
                           head.begin);
      throw UnsupportedOperatorError(head.text, head.begin);
    }
    Node n;
    n.kind = nargs == 1 ? NodeKind::Unary : NodeKind::Binary;
    n.op = *op;
    n.op_index = next_op_++;
    n.span = {d.begin - base_, d.end - base_};
    for (int i = 0; i < nargs; ++i)
      n.children[i] = build(d.items[i + 1]);
    return push(n);
  }

  Expr finish() {
    e_.op_nodes_.assign(next_op_, -1);
    for (std::size_t i = 0; i < e_.nodes_.size(); ++i)
      if (e_.nodes_[i].is_op())
        e_.op_nodes_[e_.nodes_[i].op_index] = static_cast<int>(i);
    return std::move(e_);
  }

private:
  int leaf(const Datum &d) {
    Node n;
    n.span = {d.begin - base_, d.end - base_};
    if (looks_numeric(d.text)) {
      Literal lit;
      try {
        lit = make_literal(d.text);
      } catch (const ParseError &err) {
        throw ParseError(err.what(), d.begin);
      }
      n.kind = NodeKind::Literal;
      n.literal = static_cast<int>(e_.literals_.size());
      e_.literals_.push_back(std::move(lit));
    } else if (d.text == "PI" || d.text == "E") {
      n.kind = NodeKind::Constant;
      n.constant = d.text == "PI" ? NamedConstant::Pi : NamedConstant::E;
    } else {
      if (d.text.front() == ':')
        throw ParseError("unexpected property '" + d.text + "'", d.begin);
      n.kind = NodeKind::Variable;
      auto &vars = e_.variables_;
      auto it = std::find(vars.begin(), vars.end(), d.text);
      n.variable = static_cast<int>(it - vars.begin());
      if (it == vars.end())
        vars.push_back(d.text);
    }
    return push(n);
  }

  int push(const Node &n) {
    e_.nodes_.push_back(n);
    return static_cast<int>(e_.nodes_.size()) - 1;
  }

  Expr e_;
  int next_op_ = 0;
  std::size_t base_ = 0;
};

void Expr::bind_arguments(const std::vector<std::string> &args) {
  for (Node &n : nodes_) {
    if (n.kind != NodeKind::Variable)
      continue;
    const std::string &name = variables_[n.variable];
    auto it = std::find(args.begin(), args.end(), name);
    if (it == args.end())
      throw ParseError("variable '" + name + "' is not an argument", n.span.begin);
    n.variable = static_cast<int>(it - args.begin());
  }
  variables_ = args;
}

namespace {

bool nodes_equal(const Expr &a, int i, const Expr &b, int j) {
  const Node &x = a.node(i);
  const Node &y = b.node(j);
  if (x.kind != y.kind || x.op_index != y.op_index)
    return false;
  switch (x.kind) {
  case NodeKind::Variable:
    return a.variables()[x.variable] == b.variables()[y.variable];
  case NodeKind::Literal: {
    const Literal &l = a.literals()[x.literal];
    const Literal &m = b.literals()[y.literal];
    return l.text == m.text && l.value64 == m.value64 && l.exact64 == m.exact64;
  }
  case NodeKind::Constant:
    return x.constant == y.constant;
  default:
    break;
  }
  if (x.op != y.op)
    return false;
  for (int k = 0; k < arity(x.op); ++k)
    if (!nodes_equal(a, x.children[k], b, y.children[k]))
      return false;
  return true;
}

void print_node(const Expr &e, int i, std::ostringstream &out) {
  const Node &n = e.node(i);
  switch (n.kind) {
  case NodeKind::Variable:
    out << e.variables()[n.variable];
    return;
  case NodeKind::Literal:
    out << e.literals()[n.literal].text;
    return;
  case NodeKind::Constant:
    out << constant_name(n.constant);
    return;
  default:
    break;
  }
  out << '(' << (n.op == Op::Neg ? std::string_view("-") : op_name(n.op));
  for (int k = 0; k < arity(n.op); ++k) {
    out << ' ';
    print_node(e, n.children[k], out);
  }
  out << ')';
}

} // namespace

bool structurally_equal(const Expr &a, const Expr &b) {
  if (a.nodes().empty() || b.nodes().empty())
    return a.nodes().empty() && b.nodes().empty();
  return a.op_count() == b.op_count() && nodes_equal(a, a.root(), b, b.root());
}

std::string node_sexpr(const Expr &e, int node) {
  std::ostringstream out;
  print_node(e, node, out);
  return out.str();
}

std::string to_sexpr(const Expr &e) { return node_sexpr(e, e.root()); }

Expr parse_expression(std::string_view text) {
  Reader reader(text);
  Datum d = reader.read();
  if (!reader.at_end())
    throw ParseError("trailing input after expression", d.end);
  ExprBuilder builder(text);
  builder.build(d);
  return builder.finish();
}

std::vector<Benchmark> parse_suite(std::string_view text) {
  Reader reader(text);
  std::vector<Benchmark> out;
  while (!reader.at_end()) {
    Datum form = reader.read();
    if (form.kind != Datum::List || form.items.empty() ||
        form.items[0].kind != Datum::Atom || form.items[0].text != "FPCore")
      throw ParseError("expected (FPCore ...)", form.begin);
    Benchmark b;
    b.index = static_cast<int>(out.size());
    std::size_t i = 1;
    if (i < form.items.size() && form.items[i].kind == Datum::Atom) {
      b.name = form.items[i].text;
      ++i;
    }
    if (i >= form.items.size() || form.items[i].kind != Datum::List)
      throw ParseError("expected argument list", form.begin);
    for (const Datum &a : form.items[i].items) {
      if (a.kind != Datum::Atom || looks_numeric(a.text))
        throw ParseError("malformed argument", a.begin);
      if (std::find(b.args.begin(), b.args.end(), a.text) != b.args.end())
        throw ParseError("duplicate argument '" + a.text + "'", a.begin);
      b.args.push_back(a.text);
    }
    ++i;
    while (i + 1 < form.items.size() && form.items[i].kind == Datum::Atom &&
           form.items[i].text.front() == ':') {
      const Datum &key = form.items[i];
      const Datum &val = form.items[i + 1];
      if (key.text == ":name") {
        b.name = val.text;
      } else if (key.text == ":precision") {
        auto f = parse_format(val.text);
        if (!f)
          throw ParseError("unsupported precision '" + val.text + "'", val.begin);
        b.format = *f;
      }
      i += 2;
    }
    if (i + 1 != form.items.size())
      throw ParseError("expected exactly one body expression", form.begin);
    const Datum &body = form.items[i];
    ExprBuilder builder(std::string_view(text).substr(body.begin, body.end - body.begin),
                        body.begin);
    builder.build(body);
    b.body = builder.finish();
    b.body.bind_arguments(b.args);
    if (b.name.empty())
      b.name = "benchmark-" + std::to_string(b.index);
    out.push_back(std::move(b));
  }
  return out;
}

uint64_t splitmix64(uint64_t x) {
  uint64_t z = x + 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

uint64_t benchmark_seed(uint64_t seed, int benchmark_index) {
  return splitmix64(splitmix64(seed) + static_cast<uint64_t>(benchmark_index));
}

std::vector<InputVector> sample_inputs(const Benchmark &b, int count, uint64_t seed,
                                       const InputPredicate &accept, int budget) {
  if (count < 1)
    throw std::invalid_argument("sample count must be at least 1");
  std::mt19937_64 rng(splitmix64(seed));
  auto draw = [&]() -> double {
    if (b.format == Format::Binary64) {
      for (;;) {
        uint64_t bits = rng();
        if (((bits >> 52) & 0x7ff) != 0x7ff)
          return std::bit_cast<double>(bits);
      }
    }
    for (;;) {
      auto bits = static_cast<uint32_t>(rng() >> 32);
      if (((bits >> 23) & 0xff) != 0xff)
        return static_cast<double>(std::bit_cast<float>(bits));
    }
  };
  long limit = budget > 0 ? budget : 100L * count;
  std::vector<InputVector> out;
  out.reserve(count);
  for (long attempt = 0; static_cast<int>(out.size()) < count; ++attempt) {
    if (attempt >= limit)
      throw SamplingExhaustedError("found " + std::to_string(out.size()) + " of " +
                                   std::to_string(count) + " valid inputs for '" +
                                   b.name + "' within " + std::to_string(limit) +
                                   " candidates");
    InputVector v(b.args.size());
    for (double &x : v)
      x = draw();
    if (!accept || accept(v))
      out.push_back(std::move(v));
  }
  return out;
}

std::vector<InputVector> parse_inputs(std::string_view text,
                                      const std::vector<std::string> &args) {
  std::vector<InputVector> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos)
      end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (!j.is_object())
        throw ParseError("input line is not a JSON object", pos);
      if (j.size() != args.size())
        throw ParseError("input line must bind exactly the arguments", pos);
      InputVector v;
      for (const std::string &a : args) {
        auto it = j.find(a);
        if (it == j.end() || !it->is_string())
          throw ParseError("missing or non-string binding for " + a, pos);
        try {
          v.push_back(parse_double(it->get<std::string>()));
        } catch (const std::invalid_argument &) {
          throw ParseError("bad number for " + a, pos);
        }
      }
      out.push_back(std::move(v));
    }
    pos = end + 1;
  }
  return out;
}

} // namespace floatscope
