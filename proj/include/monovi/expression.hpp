#pragma once

// Arithmetic expressions over x and y: + - * / ^, unary minus, parentheses
// and decimal constants. ^ is right-associative and binds tighter than
// unary minus, so -x^2 = -(x^2).

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <string>
#include <utility>

#include "monovi/error.hpp"

namespace monovi {

class Expression {
 public:
  explicit Expression(std::string text) : text_(std::move(text)) {
    pos_ = 0;
    root_ = parse_sum();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
  }

  double operator()(double x, double y = 0.0) const { return root_->eval(x, y); }
  const std::string& text() const noexcept { return text_; }

 private:
  struct Node {
    char op = 0;  // 'c' constant, 'x', 'y', 'n' negation, or a binary operator
    double value = 0.0;
    std::shared_ptr<const Node> lhs, rhs;

    double eval(double x, double y) const {
      switch (op) {
        case 'c': return value;
        case 'x': return x;
        case 'y': return y;
        case 'n': return -lhs->eval(x, y);
        case '+': return lhs->eval(x, y) + rhs->eval(x, y);
        case '-': return lhs->eval(x, y) - rhs->eval(x, y);
        case '*': return lhs->eval(x, y) * rhs->eval(x, y);
        case '/': return lhs->eval(x, y) / rhs->eval(x, y);
        default: return std::pow(lhs->eval(x, y), rhs->eval(x, y));
      }
    }
  };
  using Ptr = std::shared_ptr<const Node>;

  [[noreturn]] void fail(const std::string& msg) const {
    throw InvalidArgument("expression '" + text_ + "' at position " + std::to_string(pos_) + ": " + msg);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static Ptr binary(char op, Ptr a, Ptr b) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  Ptr parse_sum() {
    Ptr lhs = parse_product();
    for (;;) {
      if (accept('+')) lhs = binary('+', lhs, parse_product());
      else if (accept('-')) lhs = binary('-', lhs, parse_product());
      else return lhs;
    }
  }

  Ptr parse_product() {
    Ptr lhs = parse_unary();
    for (;;) {
      if (accept('*')) lhs = binary('*', lhs, parse_unary());
      else if (accept('/')) lhs = binary('/', lhs, parse_unary());
      else return lhs;
    }
  }

  Ptr parse_unary() {
    if (accept('-')) {
      auto n = std::make_shared<Node>();
      n->op = 'n';
      n->lhs = parse_unary();
      return n;
    }
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Ptr parse_power() {
    Ptr base = parse_atom();
    if (accept('^')) return binary('^', base, parse_unary());
    return base;
  }

  Ptr parse_atom() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    if (accept('(')) {
      Ptr inner = parse_sum();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    const char c = text_[pos_];
    if (c == 'x' || c == 'y') {
      ++pos_;
      auto n = std::make_shared<Node>();
      n->op = c;
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = text_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      auto n = std::make_shared<Node>();
      n->op = 'c';
      n->value = v;
      return n;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string text_;
  std::size_t pos_ = 0;
  Ptr root_;
};

}  // namespace monovi
