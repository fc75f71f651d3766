#ifndef REALIZER_EXPR_HPP
#define REALIZER_EXPR_HPP

#include <memory>
#include <string>

#include "realizer/errors.hpp"
#include "realizer/geometry.hpp"

namespace realizer {

enum class UnaryOp { Neg, Sin, Cos, Sinh, Cosh, Tanh, Exp, Ln, Sqrt, Abs, Asinh, Atanh };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

struct ExprNode;
/// Immutable expression over variables {x, y, z}; shared subtrees are fine.
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    enum class Kind { Constant, Variable, Unary, Binary };
    Kind kind;
    double value = 0.0; // Constant
    int var = 0;        // Variable: 0=x 1=y 2=z
    UnaryOp un{};       // Unary
    BinaryOp bin{};     // Binary
    Expr a, b;
};

Expr make_const(double v);
Expr make_var(int axis);
Expr make_unary(UnaryOp op, Expr a);
Expr make_binary(BinaryOp op, Expr a, Expr b);

/// Parse an arithmetic expression. Precedence: ^ (right-assoc) > unary minus
/// > * / > + -. Throws SyntaxError with the byte offset it stalled at.
Expr parse_expr(const std::string& src);

/// Canonical text form; parse(print(e)) is structurally identical to e.
std::string print_expr(const Expr& e);

/// IEEE double evaluation; throws EvalDomain on ln(<=0), sqrt(<0),
/// atanh outside (-1,1), division by zero, and negative base with a
/// non-integer exponent.
double eval_expr(const Expr& e, const Point3& p);

/// Structural equality (same shape, same ops, bit-equal constants).
bool expr_equal(const Expr& a, const Expr& b);

} // namespace realizer

#endif
