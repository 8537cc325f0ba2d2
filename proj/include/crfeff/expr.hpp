#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "crfeff/jet.hpp"

namespace crfeff {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprKind { Constant, Ref, Unary, Binary, Differential };
enum class UnaryOp { Neg, Conj, Exp, Log, Sqrt, Sin, Cos };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

/// Immutable AST node.  `Ref` covers coordinate references and named
/// subexpressions; resolution happens at evaluation time against the chart
/// and the let-table.  `Differential` is d(coord) with an optional
/// conjugation (d(conj(z))), used by the geometry-file front end.
struct Expr {
  ExprKind kind;
  cplx constant{0.0, 0.0};
  std::string name;
  bool conj_diff = false;
  UnaryOp uop{};
  BinaryOp bop{};
  ExprPtr a, b;

  static ExprPtr make_const(cplx v);
  static ExprPtr make_ref(std::string n);
  static ExprPtr make_diff(std::string n, bool conj);
  static ExprPtr make_unary(UnaryOp op, ExprPtr x);
  static ExprPtr make_binary(BinaryOp op, ExprPtr x, ExprPtr y);
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, size_t pos)
      : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"),
        position(pos) {}
  size_t position;
};

/// Raised when a sampled point violates a domain restriction (fractional
/// power of a non-positive base, division by zero, log of zero, ...).
struct SingularPoint : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ExprPtr parse_expr(const std::string& source);
std::string to_string(const ExprPtr& e);
bool expr_equal(const ExprPtr& a, const ExprPtr& b);

/// A real chart together with complex coordinate sugar.  Complex names
/// expand as z = x_re + i x_im during evaluation.
struct ComplexPair {
  std::string name;
  int re = -1, im = -1;
};

using Point = std::vector<double>;

struct Chart {
  std::vector<std::string> coords;
  std::vector<ComplexPair> complex_pairs;
  ExprPtr domain;  // real-valued; point admissible iff value > 0
  std::vector<std::pair<double, double>> box;  // sampling box, per coordinate

  int dim() const { return static_cast<int>(coords.size()); }
  int coord_index(const std::string& n) const;        // -1 if absent
  const ComplexPair* complex_pair(const std::string& n) const;
};

using LetTable = std::map<std::string, ExprPtr>;

/// Scalar-or-one-form value used by the geometry front end: the degree-0
/// part is a jet, the degree-1 part holds coordinate covector components.
struct DiffValue {
  Jet scalar;
  std::vector<Jet> form;  // empty when the value is a pure scalar
  bool is_form() const { return !form.empty(); }
};

/// Evaluate an expression to a jet at `point`.  Throws SingularPoint on
/// domain violations and std::runtime_error on unresolved names or
/// non-scalar (differential) content.
Jet eval_expr(const ExprPtr& e, const Chart& chart, const LetTable& lets,
              const Point& point, int order);

/// Evaluate allowing degree-one differential content.
DiffValue eval_diff_expr(const ExprPtr& e, const Chart& chart, const LetTable& lets,
                         const Point& point, int order);

/// Fold an expression with no coordinate references to a complex number.
cplx eval_const_expr(const ExprPtr& e);

/// True if `point` satisfies the chart's domain predicate (> 0).
bool in_domain(const Chart& chart, const Point& point);

}  // namespace crfeff
