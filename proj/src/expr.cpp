#include "meanfield/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "meanfield/error.hpp"

namespace meanfield {

struct Expr::Node {
  enum class Kind { number, variable, negate, add, sub, mul, div, pow, call };
  enum class Var { x, y, r, theta };
  enum class Fn { sin, cos, exp, log, sqrt, abs };

  Kind kind = Kind::number;
  double value = 0.0;
  Var var = Var::x;
  Fn fn = Fn::sin;
  bool is_pi = false;
  std::size_t offset = 0;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using Node = Expr::Node;
using NodePtr = std::shared_ptr<const Node>;

struct NamedFn {
  std::string_view name;
  Node::Fn fn;
};
constexpr NamedFn kFunctions[] = {{"sin", Node::Fn::sin},   {"cos", Node::Fn::cos},
                                  {"exp", Node::Fn::exp},   {"log", Node::Fn::log},
                                  {"sqrt", Node::Fn::sqrt}, {"abs", Node::Fn::abs}};

struct NamedVar {
  std::string_view name;
  Node::Var var;
};
constexpr NamedVar kVariables[] = {
    {"x", Node::Var::x}, {"y", Node::Var::y}, {"r", Node::Var::r}, {"theta", Node::Var::theta}};

NodePtr make_binary(Node::Kind kind, NodePtr lhs, NodePtr rhs, std::size_t offset) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  n->offset = offset;
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    NodePtr root = sum();
    skip_space();
    if (pos_ != src_.size()) fail("expected operator or end of input");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& expected) const {
    std::ostringstream msg;
    msg << "syntax error at offset " << pos_ << ": " << expected;
    if (pos_ < src_.size()) {
      msg << ", found '" << src_[pos_] << "'";
    } else {
      msg << ", found end of input";
    }
    throw ExprError(msg.str(), pos_);
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr sum() {
    NodePtr lhs = product();
    for (;;) {
      skip_space();
      const std::size_t at = pos_;
      if (accept('+')) {
        lhs = make_binary(Node::Kind::add, lhs, product(), at);
      } else if (accept('-')) {
        lhs = make_binary(Node::Kind::sub, lhs, product(), at);
      } else {
        return lhs;
      }
    }
  }

  NodePtr product() {
    NodePtr lhs = unary();
    for (;;) {
      skip_space();
      const std::size_t at = pos_;
      if (accept('*')) {
        lhs = make_binary(Node::Kind::mul, lhs, unary(), at);
      } else if (accept('/')) {
        lhs = make_binary(Node::Kind::div, lhs, unary(), at);
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    skip_space();
    const std::size_t at = pos_;
    if (accept('-')) {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::negate;
      n->lhs = unary();
      n->offset = at;
      return n;
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    skip_space();
    const std::size_t at = pos_;
    if (accept('^')) return make_binary(Node::Kind::pow, base, unary(), at);
    return base;
  }

  NodePtr atom() {
    skip_space();
    const std::size_t at = pos_;
    if (pos_ >= src_.size()) fail("expected number, variable, function or '('");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = sum();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t end = pos_;
      while (end < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_')) {
        ++end;
      }
      const std::string_view word = src_.substr(pos_, end - pos_);
      for (const auto& f : kFunctions) {
        if (word == f.name) {
          pos_ = end;
          if (!accept('(')) fail("expected '(' after function name");
          auto n = std::make_shared<Node>();
          n->kind = Node::Kind::call;
          n->fn = f.fn;
          n->offset = at;
          n->lhs = sum();
          if (!accept(')')) fail("expected ')'");
          return n;
        }
      }
      for (const auto& v : kVariables) {
        if (word == v.name) {
          pos_ = end;
          auto n = std::make_shared<Node>();
          n->kind = Node::Kind::variable;
          n->var = v.var;
          n->offset = at;
          return n;
        }
      }
      if (word == "pi") {
        pos_ = end;
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::number;
        n->value = std::numbers::pi;
        n->is_pi = true;
        n->offset = at;
        return n;
      }
      fail("unknown identifier '" + std::string(word) + "'; expected x, y, r, theta, pi or a function");
    }
    fail("expected number, variable, function or '('");
  }

  NodePtr number() {
    const std::size_t at = pos_;
    double value = 0.0;
    const char* first = src_.data() + pos_;
    const char* last = src_.data() + src_.size();
    auto [ptr, ec] = std::from_chars(first, last, value, std::chars_format::general);
    if (ec != std::errc() || ptr == first) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - first);
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::number;
    n->value = value;
    n->offset = at;
    return n;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

[[noreturn]] void domain_error(const Node& n, const std::string& what) {
  throw ExprError("evaluation error at offset " + std::to_string(n.offset) + ": " + what, n.offset);
}

struct Bindings {
  double x, y, r, theta;
};

double evaluate(const Node& n, const Bindings& b) {
  switch (n.kind) {
    case Node::Kind::number:
      return n.value;
    case Node::Kind::variable:
      switch (n.var) {
        case Node::Var::x: return b.x;
        case Node::Var::y: return b.y;
        case Node::Var::r: return b.r;
        case Node::Var::theta: return b.theta;
      }
      break;
    case Node::Kind::negate:
      return -evaluate(*n.lhs, b);
    case Node::Kind::add:
      return evaluate(*n.lhs, b) + evaluate(*n.rhs, b);
    case Node::Kind::sub:
      return evaluate(*n.lhs, b) - evaluate(*n.rhs, b);
    case Node::Kind::mul:
      return evaluate(*n.lhs, b) * evaluate(*n.rhs, b);
    case Node::Kind::div: {
      const double den = evaluate(*n.rhs, b);
      if (den == 0.0) domain_error(n, "division by zero");
      return evaluate(*n.lhs, b) / den;
    }
    case Node::Kind::pow:
      return std::pow(evaluate(*n.lhs, b), evaluate(*n.rhs, b));
    case Node::Kind::call: {
      const double arg = evaluate(*n.lhs, b);
      switch (n.fn) {
        case Node::Fn::sin: return std::sin(arg);
        case Node::Fn::cos: return std::cos(arg);
        case Node::Fn::exp: return std::exp(arg);
        case Node::Fn::log:
          if (!(arg > 0.0)) domain_error(n, "log of non-positive value " + std::to_string(arg));
          return std::log(arg);
        case Node::Fn::sqrt:
          if (arg < 0.0) domain_error(n, "sqrt of negative value " + std::to_string(arg));
          return std::sqrt(arg);
        case Node::Fn::abs: return std::abs(arg);
      }
      break;
    }
  }
  return 0.0;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print(const Node& n, std::string& out) {
  auto binary = [&](const char* op) {
    out += '(';
    print(*n.lhs, out);
    out += op;
    print(*n.rhs, out);
    out += ')';
  };
  switch (n.kind) {
    case Node::Kind::number:
      out += n.is_pi ? std::string("pi") : format_number(n.value);
      return;
    case Node::Kind::variable:
      for (const auto& v : kVariables) {
        if (v.var == n.var) out += v.name;
      }
      return;
    case Node::Kind::negate:
      out += "(-";
      print(*n.lhs, out);
      out += ')';
      return;
    case Node::Kind::add: binary(" + "); return;
    case Node::Kind::sub: binary(" - "); return;
    case Node::Kind::mul: binary(" * "); return;
    case Node::Kind::div: binary(" / "); return;
    case Node::Kind::pow: binary("^"); return;
    case Node::Kind::call:
      for (const auto& f : kFunctions) {
        if (f.fn == n.fn) out += f.name;
      }
      out += '(';
      print(*n.lhs, out);
      out += ')';
      return;
  }
}

}  // namespace

Expr Expr::parse(std::string_view source) {
  Parser parser(source);
  return Expr(parser.parse(), std::string(source));
}

double Expr::eval(Point p) const {
  const Bindings b{p.x, p.y, std::hypot(p.x, p.y), std::atan2(p.y, p.x)};
  return evaluate(*root_, b);
}

std::string Expr::to_string() const {
  std::string out;
  print(*root_, out);
  return out;
}

Field sample(const Expr& e, const SurfaceMesh& mesh, bool on_boundary) {
  if (on_boundary) {
    Field values(mesh.num_boundary_vertices());
    for (int k = 0; k < mesh.num_boundary_vertices(); ++k) {
      values[k] = e.eval(mesh.vertices()[mesh.boundary_vertices()[k]]);
    }
    return values;
  }
  Field values(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) values[v] = e.eval(mesh.vertices()[v]);
  return values;
}

SampleRange validate_positive(const Expr& e, const SurfaceMesh& mesh, bool on_boundary) {
  SampleRange range{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), -1};
  const int count = on_boundary ? mesh.num_boundary_vertices() : mesh.num_vertices();
  for (int k = 0; k < count; ++k) {
    const int vertex = on_boundary ? mesh.boundary_vertices()[k] : k;
    const Point p = mesh.vertices()[vertex];
    const double value = e.eval(p);
    if (!std::isfinite(value) || value <= 0.0) {
      std::ostringstream msg;
      msg << "potential '" << e.source() << "' is not positive at vertex " << vertex << " (" << p.x
          << ", " << p.y << "): value " << value;
      throw ExprError(msg.str(), 0);
    }
    if (value < range.min) {
      range.min = value;
      range.argmin = vertex;
    }
    range.max = std::max(range.max, value);
  }
  return range;
}

}  // namespace meanfield
