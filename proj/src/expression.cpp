#include "vfrac/expression.hpp"

#include <charconv>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "vfrac/error.hpp"

namespace vfrac {

struct Expression::Node {
  enum class Kind { Number, X, Y, T, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos } kind;
  double value = 0.0;
  std::shared_ptr<const Node> a, b;

  double eval(double x, double y, double t) const {
    switch (kind) {
      case Kind::Number: return value;
      case Kind::X: return x;
      case Kind::Y: return y;
      case Kind::T: return t;
      case Kind::Neg: return -a->eval(x, y, t);
      case Kind::Add: return a->eval(x, y, t) + b->eval(x, y, t);
      case Kind::Sub: return a->eval(x, y, t) - b->eval(x, y, t);
      case Kind::Mul: return a->eval(x, y, t) * b->eval(x, y, t);
      case Kind::Div: return a->eval(x, y, t) / b->eval(x, y, t);
      case Kind::Pow: return std::pow(a->eval(x, y, t), b->eval(x, y, t));
      case Kind::Sin: return std::sin(a->eval(x, y, t));
      case Kind::Cos: return std::cos(a->eval(x, y, t));
    }
    return 0.0;
  }

  bool uses_t() const { return kind == Kind::T || (a && a->uses_t()) || (b && b->uses_t()); }
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr leaf(Node::Kind k, double v = 0.0) { return std::make_shared<Node>(Node{k, v, nullptr, nullptr}); }
NodePtr unary(Node::Kind k, NodePtr a) { return std::make_shared<Node>(Node{k, 0.0, std::move(a), nullptr}); }
NodePtr binary(Node::Kind k, NodePtr a, NodePtr b) {
  return std::make_shared<Node>(Node{k, 0.0, std::move(a), std::move(b)});
}

// expr   := term (('+'|'-') term)*
// term   := unary (('*'|'/') unary)*
// unary  := '-' unary | '+' unary | power
// power  := atom ('^' unary)?
// atom   := number | x | y | t | pi | fn '(' expr ')' | '(' expr ')'
class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  NodePtr run() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(Errc::ConfigError, "expression '" + std::string(s_) + "': " + what + " at offset " +
                                       std::to_string(pos_));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (eat('+')) lhs = binary(Node::Kind::Add, lhs, term());
      else if (eat('-')) lhs = binary(Node::Kind::Sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary_expr();
    for (;;) {
      if (eat('*')) lhs = binary(Node::Kind::Mul, lhs, unary_expr());
      else if (eat('/')) lhs = binary(Node::Kind::Div, lhs, unary_expr());
      else return lhs;
    }
  }

  NodePtr unary_expr() {
    if (eat('-')) return unary(Node::Kind::Neg, unary_expr());
    if (eat('+')) return unary_expr();
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (eat('^')) return binary(Node::Kind::Pow, base, unary_expr());
    return base;
  }

  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!eat(')')) fail("missing ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
      if (ec != std::errc()) fail("bad number");
      pos_ = static_cast<std::size_t>(ptr - s_.data());
      return leaf(Node::Kind::Number, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string_view name = s_.substr(start, pos_ - start);
      if (name == "x") return leaf(Node::Kind::X);
      if (name == "y") return leaf(Node::Kind::Y);
      if (name == "t") return leaf(Node::Kind::T);
      if (name == "pi") return leaf(Node::Kind::Number, std::numbers::pi);
      if (name == "sin" || name == "cos") {
        if (!eat('(')) fail("expected '(' after " + std::string(name));
        NodePtr arg = expr();
        if (!eat(')')) fail("missing ')'");
        return unary(name == "sin" ? Node::Kind::Sin : Node::Kind::Cos, arg);
      }
      pos_ = start;
      fail("unknown name '" + std::string(name) + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression() : text_("0"), root_(leaf(Node::Kind::Number, 0.0)) {}

Expression Expression::parse(std::string_view text) {
  Expression e;
  e.root_ = Parser(text).run();
  e.text_ = std::string(text);
  return e;
}

Expression Expression::constant(double value) {
  Expression e;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  e.text_ = buf;
  e.root_ = leaf(Node::Kind::Number, value);
  return e;
}

double Expression::operator()(double x, double y, double t) const { return root_->eval(x, y, t); }

bool Expression::depends_on_t() const { return root_->uses_t(); }

}  // namespace vfrac
