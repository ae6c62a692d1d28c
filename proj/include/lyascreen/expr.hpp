#pragma once

// Scalar expressions over x1..xn.
//
// Grammar (EBNF):
//   expr    = term { ("+" | "-") term } ;
//   term    = unary { ("*" | "/") unary } ;
//   unary   = ("-" | "+") unary | power ;
//   power   = primary [ "^" unary ] ;            (* right-associative *)
//   primary = number | variable | constant | func "(" expr ")" | "(" expr ")" ;
//   number  = digit { digit } [ "." { digit } ] [ ("e" | "E") [ "+" | "-" ] digit { digit } ]
//           | "." digit { digit } [ exponent ] ;
//   variable = "x" index ;                       (* x1 .. xn *)
//   constant = "pi" | "e" ;
//   func    = "sin" | "cos" | "tan" | "exp" | "ln" | "sqrt" | "abs" ;
//
// Unary minus binds looser than "^": -x1^2 is -(x1^2). The printed canonical
// form re-parses to a structurally equal tree.

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lyascreen/dual.hpp"

namespace lyascreen {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class SyntaxError : public ParseError {
  using ParseError::ParseError;
};

class UnknownIdentifier : public ParseError {
  using ParseError::ParseError;
};

class VariableOutOfRange : public ParseError {
  using ParseError::ParseError;
};

// Raised instead of letting NaN/Inf escape an evaluation.
class EvalDomainError : public std::runtime_error {
 public:
  EvalDomainError(const std::string& what, std::string subexpression)
      : std::runtime_error(what), subexpression_(std::move(subexpression)) {}
  const std::string& subexpression() const { return subexpression_; }

 private:
  std::string subexpression_;
};

enum class NodeKind {
  Number,
  Variable,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Neg,
  Sin,
  Cos,
  Tan,
  Exp,
  Ln,
  Sqrt,
  Abs,
};

struct Node {
  NodeKind kind;
  double number = 0.0;  // Number
  int variable = 0;     // Variable, zero-based
  std::shared_ptr<const Node> lhs;  // operand of unary nodes
  std::shared_ptr<const Node> rhs;

  bool is_binary() const;
  bool is_function() const;
};

using NodePtr = std::shared_ptr<const Node>;

bool structurally_equal(const Node& a, const Node& b);
std::string to_string(const Node& node);

// (k, k', k'') of t -> V(base + t * dir) at a fixed t.
struct RayJet {
  double value;
  double d1;
  double d2;
};

namespace detail {
struct Instruction;
}

class Expression {
 public:
  static Expression parse(std::string_view source, int dimension);

  int dimension() const { return dimension_; }
  const Node& root() const { return *root_; }
  // False when the tree contains abs(), which is not continuously differentiable.
  bool is_smooth() const { return smooth_; }
  std::string to_string() const;

  double eval(std::span<const double> point) const;
  std::vector<double> grad(std::span<const double> point) const;
  RayJet directional_derivatives(std::span<const double> base, std::span<const double> dir,
                                 double gamma) const;

  // Generic tape evaluation; `stack` is caller-owned scratch so hot loops
  // can avoid reallocating.
  template <class T>
  T evaluate(std::span<const T> point, std::vector<T>& stack) const;

  friend bool operator==(const Expression& a, const Expression& b) {
    return a.dimension_ == b.dimension_ && structurally_equal(*a.root_, *b.root_);
  }

 private:
  Expression(NodePtr root, int dimension);

  NodePtr root_;
  int dimension_;
  bool smooth_ = true;
  std::shared_ptr<const std::vector<detail::Instruction>> tape_;
  std::size_t max_depth_ = 0;
};

}  // namespace lyascreen
