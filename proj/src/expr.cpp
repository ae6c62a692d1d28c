#include "lyascreen/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>

namespace lyascreen {

bool Node::is_binary() const {
  switch (kind) {
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div:
    case NodeKind::Pow:
      return true;
    default:
      return false;
  }
}

bool Node::is_function() const {
  switch (kind) {
    case NodeKind::Sin:
    case NodeKind::Cos:
    case NodeKind::Tan:
    case NodeKind::Exp:
    case NodeKind::Ln:
    case NodeKind::Sqrt:
    case NodeKind::Abs:
      return true;
    default:
      return false;
  }
}

bool structurally_equal(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::Number:
      return a.number == b.number;
    case NodeKind::Variable:
      return a.variable == b.variable;
    default:
      break;
  }
  if (!structurally_equal(*a.lhs, *b.lhs)) return false;
  if (a.is_binary()) return structurally_equal(*a.rhs, *b.rhs);
  return true;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

int precedence(const Node& n) {
  switch (n.kind) {
    case NodeKind::Add:
    case NodeKind::Sub:
      return 1;
    case NodeKind::Mul:
    case NodeKind::Div:
      return 2;
    case NodeKind::Neg:
      return 3;
    case NodeKind::Pow:
      return 4;
    default:
      return 5;
  }
}

const char* function_name(NodeKind k) {
  switch (k) {
    case NodeKind::Sin: return "sin";
    case NodeKind::Cos: return "cos";
    case NodeKind::Tan: return "tan";
    case NodeKind::Exp: return "exp";
    case NodeKind::Ln: return "ln";
    case NodeKind::Sqrt: return "sqrt";
    case NodeKind::Abs: return "abs";
    default: return "?";
  }
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void print(const Node& n, std::string& out);

void print_operand(const Node& n, int min_prec, std::string& out) {
  const bool paren = precedence(n) < min_prec ||
                     (n.kind == NodeKind::Number && std::signbit(n.number));
  if (paren) out += '(';
  print(n, out);
  if (paren) out += ')';
}

void print(const Node& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::Number:
      out += format_number(n.number);
      return;
    case NodeKind::Variable:
      out += 'x';
      out += std::to_string(n.variable + 1);
      return;
    case NodeKind::Add:
    case NodeKind::Sub:
      print_operand(*n.lhs, 1, out);
      out += n.kind == NodeKind::Add ? " + " : " - ";
      print_operand(*n.rhs, 2, out);
      return;
    case NodeKind::Mul:
    case NodeKind::Div:
      print_operand(*n.lhs, 2, out);
      out += n.kind == NodeKind::Mul ? "*" : "/";
      print_operand(*n.rhs, 3, out);
      return;
    case NodeKind::Neg:
      out += '-';
      print_operand(*n.lhs, 3, out);
      return;
    case NodeKind::Pow:
      print_operand(*n.lhs, 5, out);
      out += '^';
      print_operand(*n.rhs, 3, out);
      return;
    default:
      out += function_name(n.kind);
      out += '(';
      print(*n.lhs, out);
      out += ')';
      return;
  }
}

}  // namespace

std::string to_string(const Node& node) {
  std::string out;
  print(node, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

NodePtr make_leaf_number(double v) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Number;
  n->number = v;
  return n;
}

NodePtr make_node(NodeKind k, NodePtr lhs, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  Parser(std::string_view src, int dimension) : src_(src), dimension_(dimension) {}

  NodePtr parse_all() {
    skip_ws();
    if (pos_ >= src_.size()) throw SyntaxError("empty expression", pos_);
    NodePtr e = parse_expr();
    skip_ws();
    if (pos_ < src_.size()) fail_unexpected();
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  [[noreturn]] void fail_unexpected() {
    if (pos_ >= src_.size()) throw SyntaxError("unexpected end of input", pos_);
    throw SyntaxError(std::string("unexpected '") + src_[pos_] + "' at position " +
                          std::to_string(pos_),
                      pos_);
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      const char c = peek();
      if (c != '+' && c != '-') return lhs;
      ++pos_;
      NodePtr rhs = parse_term();
      lhs = make_node(c == '+' ? NodeKind::Add : NodeKind::Sub, std::move(lhs), std::move(rhs));
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      const char c = peek();
      if (c != '*' && c != '/') return lhs;
      ++pos_;
      NodePtr rhs = parse_unary();
      lhs = make_node(c == '*' ? NodeKind::Mul : NodeKind::Div, std::move(lhs), std::move(rhs));
    }
  }

  NodePtr parse_unary() {
    const char c = peek();
    if (c == '-') {
      ++pos_;
      return make_node(NodeKind::Neg, parse_unary());
    }
    if (c == '+') {
      ++pos_;
      return parse_unary();
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (peek() == '^') {
      ++pos_;
      NodePtr exponent = parse_unary();
      return make_node(NodeKind::Pow, std::move(base), std::move(exponent));
    }
    return base;
  }

  NodePtr parse_primary() {
    const char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      if (peek() != ')') {
        if (pos_ >= src_.size()) throw SyntaxError("missing ')'", pos_);
        fail_unexpected();
      }
      ++pos_;
      return inner;
    }
    fail_unexpected();
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    auto is_digit = [&](std::size_t i) {
      return i < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i]));
    };
    std::size_t i = pos_;
    while (is_digit(i)) ++i;
    if (i < src_.size() && src_[i] == '.') {
      ++i;
      while (is_digit(i)) ++i;
    }
    if (i == start + 1 && src_[start] == '.') throw SyntaxError("malformed number", start);
    if (i < src_.size() && (src_[i] == 'e' || src_[i] == 'E')) {
      std::size_t j = i + 1;
      if (j < src_.size() && (src_[j] == '+' || src_[j] == '-')) ++j;
      if (is_digit(j)) {
        while (is_digit(j)) ++j;
        i = j;
      }
    }
    double v = 0.0;
    auto res = std::from_chars(src_.data() + start, src_.data() + i, v);
    if (res.ec != std::errc() || res.ptr != src_.data() + i) {
      throw SyntaxError("malformed number", start);
    }
    pos_ = i;
    return make_leaf_number(v);
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    std::size_t i = pos_;
    while (i < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[i])) || src_[i] == '_')) {
      ++i;
    }
    const std::string_view name = src_.substr(start, i - start);
    pos_ = i;

    if (name == "pi") return make_leaf_number(std::numbers::pi);
    if (name == "e") return make_leaf_number(std::numbers::e);

    if (auto fn = function_kind(name)) {
      if (peek() != '(') {
        throw SyntaxError("expected '(' after function '" + std::string(name) + "'", pos_);
      }
      ++pos_;
      NodePtr arg = parse_expr();
      if (peek() != ')') {
        if (pos_ >= src_.size()) throw SyntaxError("missing ')'", pos_);
        fail_unexpected();
      }
      ++pos_;
      return make_node(*fn, std::move(arg));
    }

    if (name.size() >= 2 && name[0] == 'x' &&
        std::all_of(name.begin() + 1, name.end(),
                    [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      long index = 0;
      auto res = std::from_chars(name.data() + 1, name.data() + name.size(), index);
      if (res.ec != std::errc() || index < 1 || index > dimension_) {
        throw VariableOutOfRange("variable '" + std::string(name) + "' is out of range for dimension " +
                                     std::to_string(dimension_),
                                 start);
      }
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::Variable;
      n->variable = static_cast<int>(index - 1);
      return n;
    }
    throw UnknownIdentifier("unknown identifier '" + std::string(name) + "'", start);
  }

  static std::optional<NodeKind> function_kind(std::string_view name) {
    if (name == "sin") return NodeKind::Sin;
    if (name == "cos") return NodeKind::Cos;
    if (name == "tan") return NodeKind::Tan;
    if (name == "exp") return NodeKind::Exp;
    if (name == "ln") return NodeKind::Ln;
    if (name == "sqrt") return NodeKind::Sqrt;
    if (name == "abs") return NodeKind::Abs;
    return std::nullopt;
  }

  std::string_view src_;
  int dimension_;
  std::size_t pos_ = 0;
};

}  // namespace

// ---------------------------------------------------------------------------
// Tape

namespace detail {

enum class Op {
  Const,
  Var,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  PowInt,
  PowConst,
  Pow,
  Sin,
  Cos,
  Tan,
  Exp,
  Ln,
  Sqrt,
  Abs,
};

struct Instruction {
  Op op;
  double constant = 0.0;  // Const value, PowConst exponent
  int index = 0;          // Var index, PowInt exponent
  const Node* node = nullptr;
};

}  // namespace detail

namespace {

using detail::Instruction;
using detail::Op;

bool has_variables(const Node& n) {
  if (n.kind == NodeKind::Variable) return true;
  if (n.kind == NodeKind::Number) return false;
  if (has_variables(*n.lhs)) return true;
  return n.is_binary() && has_variables(*n.rhs);
}

bool contains_abs(const Node& n) {
  if (n.kind == NodeKind::Abs) return true;
  if (n.kind == NodeKind::Number || n.kind == NodeKind::Variable) return false;
  if (contains_abs(*n.lhs)) return true;
  return n.is_binary() && contains_abs(*n.rhs);
}

Op function_op(NodeKind k) {
  switch (k) {
    case NodeKind::Sin: return Op::Sin;
    case NodeKind::Cos: return Op::Cos;
    case NodeKind::Tan: return Op::Tan;
    case NodeKind::Exp: return Op::Exp;
    case NodeKind::Ln: return Op::Ln;
    case NodeKind::Sqrt: return Op::Sqrt;
    case NodeKind::Abs: return Op::Abs;
    default: return Op::Neg;
  }
}

class Compiler {
 public:
  explicit Compiler(bool fold) : fold_(fold) {}

  std::vector<Instruction> tape;
  std::size_t depth = 0;
  std::size_t max_depth = 0;

  void emit(const Node& n) {
    if (fold_ && !has_variables(n) && n.kind != NodeKind::Number) {
      if (auto folded = try_fold(n)) {
        push({Op::Const, *folded, 0, &n});
        return;
      }
    }
    switch (n.kind) {
      case NodeKind::Number:
        push({Op::Const, n.number, 0, &n});
        return;
      case NodeKind::Variable:
        push({Op::Var, 0.0, n.variable, &n});
        return;
      case NodeKind::Add:
      case NodeKind::Sub:
      case NodeKind::Mul:
      case NodeKind::Div:
        emit(*n.lhs);
        emit(*n.rhs);
        pop_binary({n.kind == NodeKind::Add   ? Op::Add
                    : n.kind == NodeKind::Sub ? Op::Sub
                    : n.kind == NodeKind::Mul ? Op::Mul
                                              : Op::Div,
                    0.0, 0, &n});
        return;
      case NodeKind::Pow:
        emit_pow(n);
        return;
      case NodeKind::Neg:
        emit(*n.lhs);
        tape.push_back({Op::Neg, 0.0, 0, &n});
        return;
      default:
        emit(*n.lhs);
        tape.push_back({function_op(n.kind), 0.0, 0, &n});
        return;
    }
  }

 private:
  void push(Instruction ins) {
    tape.push_back(ins);
    max_depth = std::max(max_depth, ++depth);
  }
  void pop_binary(Instruction ins) {
    tape.push_back(ins);
    --depth;
  }

  void emit_pow(const Node& n) {
    if (!has_variables(*n.rhs)) {
      if (auto c = try_fold(*n.rhs)) {
        emit(*n.lhs);
        const double r = std::round(*c);
        if (r == *c && std::abs(r) <= 1024.0) {
          tape.push_back({Op::PowInt, 0.0, static_cast<int>(r), &n});
        } else {
          tape.push_back({Op::PowConst, *c, 0, &n});
        }
        return;
      }
    }
    emit(*n.lhs);
    emit(*n.rhs);
    pop_binary({Op::Pow, 0.0, 0, &n});
  }

  static std::optional<double> try_fold(const Node& n);

  bool fold_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Evaluation

namespace {

template <class T>
T pow_int(T base, int exponent) {
  const bool negative = exponent < 0;
  unsigned e = static_cast<unsigned>(negative ? -static_cast<long>(exponent) : exponent);
  T result(1.0);
  T x = base;
  bool first = true;
  while (e != 0) {
    if (e & 1u) {
      result = first ? x : result * x;
      first = false;
    }
    e >>= 1u;
    if (e != 0) x = x * x;
  }
  if (negative) return T(1.0) / result;
  return result;
}

[[noreturn]] void domain_error(const char* what, const Node* node) {
  const std::string sub = node ? to_string(*node) : std::string("?");
  throw EvalDomainError(std::string(what) + " in '" + sub + "'", sub);
}

template <class T>
T run_tape(const std::vector<Instruction>& tape, std::span<const T> point, std::vector<T>& stack,
           std::size_t max_depth) {
  stack.resize(std::max<std::size_t>(max_depth, 1));
  std::size_t top = 0;  // number of live entries
  for (const Instruction& ins : tape) {
    T r;
    switch (ins.op) {
      case Op::Const:
        stack[top++] = T(ins.constant);
        continue;
      case Op::Var:
        stack[top++] = point[static_cast<std::size_t>(ins.index)];
        continue;
      case Op::Add:
        --top;
        r = stack[top - 1] + stack[top];
        break;
      case Op::Sub:
        --top;
        r = stack[top - 1] - stack[top];
        break;
      case Op::Mul:
        --top;
        r = stack[top - 1] * stack[top];
        break;
      case Op::Div:
        --top;
        if (value_of(stack[top]) == 0.0) domain_error("division by zero", ins.node);
        r = stack[top - 1] / stack[top];
        break;
      case Op::Neg:
        r = -stack[top - 1];
        break;
      case Op::PowInt: {
        const T a = stack[top - 1];
        if (ins.index < 0 && value_of(a) == 0.0) domain_error("zero to a negative power", ins.node);
        r = pow_int(a, ins.index);
        break;
      }
      case Op::PowConst: {
        const T a = stack[top - 1];
        const double av = value_of(a);
        const double c = ins.constant;
        if (av < 0.0) domain_error("negative base to a non-integer power", ins.node);
        if (av == 0.0 && c < 0.0) domain_error("zero to a negative power", ins.node);
        const double f0 = std::pow(av, c);
        const double f1 = av == 0.0 ? (c > 1.0 ? 0.0 : c == 1.0 ? 1.0 : INFINITY)
                                    : c * f0 / av;
        const double f2 = av == 0.0 ? (c > 2.0 ? 0.0 : c == 2.0 ? 2.0 : INFINITY)
                                    : c * (c - 1.0) * f0 / (av * av);
        r = chain(a, f0, f1, f2);
        break;
      }
      case Op::Pow: {
        --top;
        const T a = stack[top - 1];
        const T b = stack[top];
        if (value_of(a) <= 0.0) domain_error("non-positive base to a variable power", ins.node);
        const double la = std::log(value_of(a));
        const T lna = chain(a, la, 1.0 / value_of(a), -1.0 / (value_of(a) * value_of(a)));
        const T prod = b * lna;
        const double ep = std::exp(value_of(prod));
        r = chain(prod, ep, ep, ep);
        break;
      }
      case Op::Sin: {
        const T a = stack[top - 1];
        const double s = std::sin(value_of(a));
        const double c = std::cos(value_of(a));
        r = chain(a, s, c, -s);
        break;
      }
      case Op::Cos: {
        const T a = stack[top - 1];
        const double s = std::sin(value_of(a));
        const double c = std::cos(value_of(a));
        r = chain(a, c, -s, -c);
        break;
      }
      case Op::Tan: {
        const T a = stack[top - 1];
        const double t = std::tan(value_of(a));
        const double sec2 = 1.0 + t * t;
        r = chain(a, t, sec2, 2.0 * t * sec2);
        break;
      }
      case Op::Exp: {
        const T a = stack[top - 1];
        const double ev = std::exp(value_of(a));
        r = chain(a, ev, ev, ev);
        break;
      }
      case Op::Ln: {
        const T a = stack[top - 1];
        const double av = value_of(a);
        if (av <= 0.0) domain_error("logarithm of a non-positive number", ins.node);
        r = chain(a, std::log(av), 1.0 / av, -1.0 / (av * av));
        break;
      }
      case Op::Sqrt: {
        const T a = stack[top - 1];
        const double av = value_of(a);
        if (av < 0.0) domain_error("square root of a negative number", ins.node);
        const double s = std::sqrt(av);
        r = chain(a, s, 0.5 / s, -0.25 / (s * av));
        break;
      }
      case Op::Abs: {
        const T a = stack[top - 1];
        const double av = value_of(a);
        const double sign = av > 0.0 ? 1.0 : av < 0.0 ? -1.0 : 0.0;
        r = chain(a, std::abs(av), sign, 0.0);
        break;
      }
    }
    if (!all_finite(r)) domain_error("non-finite result", ins.node);
    stack[top - 1] = r;
  }
  return stack[0];
}

std::optional<double> Compiler::try_fold(const Node& n) {
  Compiler sub(false);
  sub.emit(n);
  std::vector<double> stack;
  try {
    return run_tape<double>(sub.tape, std::span<const double>(), stack, sub.max_depth);
  } catch (const EvalDomainError&) {
    return std::nullopt;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Expression

Expression::Expression(NodePtr root, int dimension)
    : root_(std::move(root)), dimension_(dimension) {
  smooth_ = !contains_abs(*root_);
  Compiler c(true);
  c.emit(*root_);
  max_depth_ = c.max_depth;
  tape_ = std::make_shared<const std::vector<Instruction>>(std::move(c.tape));
}

Expression Expression::parse(std::string_view source, int dimension) {
  if (dimension < 1) throw std::invalid_argument("dimension must be positive");
  Parser p(source, dimension);
  return Expression(p.parse_all(), dimension);
}

std::string Expression::to_string() const { return lyascreen::to_string(*root_); }

template <class T>
T Expression::evaluate(std::span<const T> point, std::vector<T>& stack) const {
  if (point.size() != static_cast<std::size_t>(dimension_)) {
    throw std::invalid_argument("point has " + std::to_string(point.size()) +
                                " coordinates, expected " + std::to_string(dimension_));
  }
  return run_tape<T>(*tape_, point, stack, max_depth_);
}

template double Expression::evaluate<double>(std::span<const double>, std::vector<double>&) const;
template Dual1 Expression::evaluate<Dual1>(std::span<const Dual1>, std::vector<Dual1>&) const;
template Dual2 Expression::evaluate<Dual2>(std::span<const Dual2>, std::vector<Dual2>&) const;

double Expression::eval(std::span<const double> point) const {
  std::vector<double> stack;
  return evaluate<double>(point, stack);
}

std::vector<double> Expression::grad(std::span<const double> point) const {
  const auto n = static_cast<std::size_t>(dimension_);
  if (point.size() != n) throw std::invalid_argument("gradient point has wrong dimension");
  std::vector<Dual1> seeded(n);
  for (std::size_t i = 0; i < n; ++i) seeded[i] = Dual1(point[i], 0.0);
  std::vector<Dual1> stack;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    seeded[i].d1 = 1.0;
    g[i] = evaluate<Dual1>(seeded, stack).d1;
    seeded[i].d1 = 0.0;
  }
  return g;
}

RayJet Expression::directional_derivatives(std::span<const double> base,
                                           std::span<const double> dir, double gamma) const {
  const auto n = static_cast<std::size_t>(dimension_);
  if (base.size() != n || dir.size() != n) {
    throw std::invalid_argument("directional derivative arguments have wrong dimension");
  }
  double norm2 = 0.0;
  for (double v : dir) norm2 += v * v;
  if (std::abs(std::sqrt(norm2) - 1.0) > 1e-12) {
    throw std::invalid_argument("direction must have unit 2-norm");
  }
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be non-negative");
  std::vector<Dual2> seeded(n);
  for (std::size_t i = 0; i < n; ++i) seeded[i] = Dual2(base[i] + gamma * dir[i], dir[i], 0.0);
  std::vector<Dual2> stack;
  const Dual2 r = evaluate<Dual2>(seeded, stack);
  return {r.value, r.d1, r.d2};
}

}  // namespace lyascreen
