#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "meanfield/mesh.hpp"

namespace meanfield {

/// Parsed arithmetic expression in the variables x, y, r = hypot(x, y) and
/// theta = atan2(y, x). Immutable; copies share the tree.
///
/// Grammar, loosest binding first:
///   sum     := product (('+' | '-') product)*
///   product := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := atom ('^' unary)?            (right associative)
///   atom    := number | 'pi' | variable | function '(' sum ')' | '(' sum ')'
/// Functions: sin cos exp log sqrt abs.
class Expr {
 public:
  struct Node;

  /// Throws ExprError carrying the byte offset of the offending token.
  static Expr parse(std::string_view source);

  /// Throws ExprError (with the source offset of the failing operation) on
  /// log/sqrt of a negative number, log(0) or division by zero.
  double eval(Point p) const;
  double eval(double x, double y) const { return eval(Point{x, y}); }

  /// Fully parenthesized canonical text; parsing it gives back an
  /// expression that prints identically.
  std::string to_string() const;

  const std::string& source() const { return source_; }

 private:
  Expr(std::shared_ptr<const Node> root, std::string source)
      : root_(std::move(root)), source_(std::move(source)) {}

  std::shared_ptr<const Node> root_;
  std::string source_;
};

struct SampleRange {
  double min = 0.0;
  double max = 0.0;
  int argmin = -1;  // vertex index of the minimum
};

/// Samples `e` at every vertex (or every boundary vertex) and rejects the
/// potential with an ExprError naming the vertex if any sample is <= 0 or
/// not finite.
SampleRange validate_positive(const Expr& e, const SurfaceMesh& mesh, bool on_boundary);

/// Vertex samples of `e` (all vertices, or boundary vertices in boundary order).
Field sample(const Expr& e, const SurfaceMesh& mesh, bool on_boundary);

}  // namespace meanfield
