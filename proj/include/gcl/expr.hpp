// Small arithmetic-expression evaluator for config-driven analytic fields:
// variables x, y, z, t; constants pi, e; operators + - * / ^ and parentheses;
// one-argument functions sin cos tan sinh cosh tanh exp log sqrt abs floor.
#pragma once

#include <cctype>
#include <cmath>
#include <memory>

#include "gcl/core.hpp"

namespace gcl {

class Expression {
 public:
  Expression() = default;
  Expression(Expression&&) = default;
  Expression& operator=(Expression&&) = default;
  Expression(const Expression& o) { *this = o; }
  Expression& operator=(const Expression& o) {
    if (this == &o) return *this;
    if (o.root_ != nullptr)
      *this = parse(o.text_);
    else {
      root_.reset();
      text_.clear();
    }
    return *this;
  }

  static Expression parse(const std::string& text) {
    Parser p{text, 0};
    Expression e;
    e.root_ = p.parse_sum();
    p.skip_ws();
    require(p.pos == text.size(), "trailing characters in expression: " + text);
    e.text_ = text;
    return e;
  }

  double eval(double x, double y, double z, double t) const {
    require(root_ != nullptr, "evaluating an empty expression");
    return eval_node(*root_, x, y, z, t);
  }
  double operator()(const std::array<double, 3>& p, double t = 0.0) const {
    return eval(p[0], p[1], p[2], t);
  }

  const std::string& text() const { return text_; }
  bool empty() const { return root_ == nullptr; }

 private:
  enum class Op {
    constant, var_x, var_y, var_z, var_t,
    add, sub, mul, divide, pow,
    neg, sin, cos, tan, sinh, cosh, tanh_, exp, log, sqrt, abs, floor
  };
  struct Node {
    Op op;
    double value = 0.0;
    std::unique_ptr<Node> a, b;
  };

  static double eval_node(const Node& n, double x, double y, double z, double t) {
    switch (n.op) {
      case Op::constant: return n.value;
      case Op::var_x: return x;
      case Op::var_y: return y;
      case Op::var_z: return z;
      case Op::var_t: return t;
      case Op::add: return eval_node(*n.a, x, y, z, t) + eval_node(*n.b, x, y, z, t);
      case Op::sub: return eval_node(*n.a, x, y, z, t) - eval_node(*n.b, x, y, z, t);
      case Op::mul: return eval_node(*n.a, x, y, z, t) * eval_node(*n.b, x, y, z, t);
      case Op::divide: return eval_node(*n.a, x, y, z, t) / eval_node(*n.b, x, y, z, t);
      case Op::pow: return std::pow(eval_node(*n.a, x, y, z, t), eval_node(*n.b, x, y, z, t));
      case Op::neg: return -eval_node(*n.a, x, y, z, t);
      case Op::sin: return std::sin(eval_node(*n.a, x, y, z, t));
      case Op::cos: return std::cos(eval_node(*n.a, x, y, z, t));
      case Op::tan: return std::tan(eval_node(*n.a, x, y, z, t));
      case Op::sinh: return std::sinh(eval_node(*n.a, x, y, z, t));
      case Op::cosh: return std::cosh(eval_node(*n.a, x, y, z, t));
      case Op::tanh_: return std::tanh(eval_node(*n.a, x, y, z, t));
      case Op::exp: return std::exp(eval_node(*n.a, x, y, z, t));
      case Op::log: return std::log(eval_node(*n.a, x, y, z, t));
      case Op::sqrt: return std::sqrt(eval_node(*n.a, x, y, z, t));
      case Op::abs: return std::fabs(eval_node(*n.a, x, y, z, t));
      case Op::floor: return std::floor(eval_node(*n.a, x, y, z, t));
    }
    return 0.0;
  }

  struct Parser {
    const std::string& s;
    size_t pos;

    void skip_ws() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool accept(char c) {
      skip_ws();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }

    std::unique_ptr<Node> parse_sum() {
      auto lhs = parse_product();
      for (;;) {
        if (accept('+'))
          lhs = binary(Op::add, std::move(lhs), parse_product());
        else if (accept('-'))
          lhs = binary(Op::sub, std::move(lhs), parse_product());
        else
          return lhs;
      }
    }
    std::unique_ptr<Node> parse_product() {
      auto lhs = parse_unary();
      for (;;) {
        if (accept('*'))
          lhs = binary(Op::mul, std::move(lhs), parse_unary());
        else if (accept('/'))
          lhs = binary(Op::divide, std::move(lhs), parse_unary());
        else
          return lhs;
      }
    }
    std::unique_ptr<Node> parse_unary() {
      if (accept('-')) {
        auto n = std::make_unique<Node>();
        n->op = Op::neg;
        n->a = parse_unary();
        return n;
      }
      (void)accept('+');
      return parse_power();
    }
    std::unique_ptr<Node> parse_power() {
      auto base = parse_primary();
      if (accept('^')) return binary(Op::pow, std::move(base), parse_unary());
      return base;
    }
    std::unique_ptr<Node> parse_primary() {
      skip_ws();
      require(pos < s.size(), "unexpected end of expression: " + s);
      const char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
      if (accept('(')) {
        auto inner = parse_sum();
        require(accept(')'), "missing ')' in expression: " + s);
        return inner;
      }
      throw std::invalid_argument("unexpected character '" + std::string(1, c) +
                                  "' in expression: " + s);
    }
    std::unique_ptr<Node> parse_number() {
      size_t end = pos;
      while (end < s.size() && (std::isdigit(static_cast<unsigned char>(s[end])) || s[end] == '.'))
        ++end;
      if (end < s.size() && (s[end] == 'e' || s[end] == 'E')) {
        size_t e = end + 1;
        if (e < s.size() && (s[e] == '+' || s[e] == '-')) ++e;
        if (e < s.size() && std::isdigit(static_cast<unsigned char>(s[e]))) {
          while (e < s.size() && std::isdigit(static_cast<unsigned char>(s[e]))) ++e;
          end = e;
        }
      }
      auto n = std::make_unique<Node>();
      n->op = Op::constant;
      n->value = std::stod(s.substr(pos, end - pos));
      pos = end;
      return n;
    }
    std::unique_ptr<Node> parse_ident() {
      size_t end = pos;
      while (end < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[end])) || s[end] == '_'))
        ++end;
      const std::string name = s.substr(pos, end - pos);
      pos = end;
      auto leaf = [&](Op op, double v = 0.0) {
        auto n = std::make_unique<Node>();
        n->op = op;
        n->value = v;
        return n;
      };
      if (name == "x") return leaf(Op::var_x);
      if (name == "y") return leaf(Op::var_y);
      if (name == "z") return leaf(Op::var_z);
      if (name == "t") return leaf(Op::var_t);
      if (name == "pi") return leaf(Op::constant, M_PI);
      if (name == "e") return leaf(Op::constant, M_E);
      static const std::pair<const char*, Op> fns[] = {
          {"sin", Op::sin},   {"cos", Op::cos},     {"tan", Op::tan},  {"sinh", Op::sinh},
          {"cosh", Op::cosh}, {"tanh", Op::tanh_},  {"exp", Op::exp},  {"log", Op::log},
          {"sqrt", Op::sqrt}, {"abs", Op::abs},     {"floor", Op::floor}};
      for (const auto& [fname, op] : fns) {
        if (name == fname) {
          require(accept('('), "expected '(' after " + name);
          auto arg = parse_sum();
          require(accept(')'), "missing ')' after " + name + "(...");
          auto n = std::make_unique<Node>();
          n->op = op;
          n->a = std::move(arg);
          return n;
        }
      }
      throw std::invalid_argument("unknown identifier '" + name + "' in expression: " + s);
    }
    static std::unique_ptr<Node> binary(Op op, std::unique_ptr<Node> a, std::unique_ptr<Node> b) {
      auto n = std::make_unique<Node>();
      n->op = op;
      n->a = std::move(a);
      n->b = std::move(b);
      return n;
    }
  };

  std::unique_ptr<Node> root_;
  std::string text_;
};

}  // namespace gcl
