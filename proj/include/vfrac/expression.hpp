#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace vfrac {

/// Scalar expression in x, y and t: numbers, pi, + - * / ^, parentheses,
/// sin and cos. Parse errors throw ConfigError.
class Expression {
 public:
  Expression();
  static Expression parse(std::string_view text);
  static Expression constant(double value);

  double operator()(double x, double y, double t = 0.0) const;
  const std::string& text() const { return text_; }
  bool depends_on_t() const;

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace vfrac
