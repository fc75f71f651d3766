#include "realizer/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>
#include <vector>

namespace realizer {

Expr make_const(double v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Constant;
    n->value = v;
    return n;
}

Expr make_var(int axis) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Variable;
    n->var = axis;
    return n;
}

Expr make_unary(UnaryOp op, Expr a) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Unary;
    n->un = op;
    n->a = std::move(a);
    return n;
}

Expr make_binary(BinaryOp op, Expr a, Expr b) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Binary;
    n->bin = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

namespace {

const std::map<std::string, UnaryOp>& function_table() {
    static const std::map<std::string, UnaryOp> table = {
        {"sin", UnaryOp::Sin},     {"cos", UnaryOp::Cos},   {"sinh", UnaryOp::Sinh},
        {"cosh", UnaryOp::Cosh},   {"tanh", UnaryOp::Tanh}, {"exp", UnaryOp::Exp},
        {"ln", UnaryOp::Ln},       {"log", UnaryOp::Ln},    {"sqrt", UnaryOp::Sqrt},
        {"abs", UnaryOp::Abs},     {"asinh", UnaryOp::Asinh}, {"atanh", UnaryOp::Atanh},
    };
    return table;
}

const char* function_name(UnaryOp op) {
    switch (op) {
        case UnaryOp::Neg: return "-";
        case UnaryOp::Sin: return "sin";
        case UnaryOp::Cos: return "cos";
        case UnaryOp::Sinh: return "sinh";
        case UnaryOp::Cosh: return "cosh";
        case UnaryOp::Tanh: return "tanh";
        case UnaryOp::Exp: return "exp";
        case UnaryOp::Ln: return "ln";
        case UnaryOp::Sqrt: return "sqrt";
        case UnaryOp::Abs: return "abs";
        case UnaryOp::Asinh: return "asinh";
        case UnaryOp::Atanh: return "atanh";
    }
    return "?";
}

struct Token {
    enum class Kind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };
    Kind kind;
    std::size_t offset;
    double number = 0.0;
    std::string ident;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        tok_.offset = pos_;
        if (pos_ >= src_.size()) {
            tok_.kind = Token::Kind::End;
            return;
        }
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = src_.c_str() + pos_;
            char* end = nullptr;
            tok_.number = std::strtod(begin, &end);
            if (end == begin) throw SyntaxError(pos_, "number", "malformed number");
            pos_ += static_cast<std::size_t>(end - begin);
            tok_.kind = Token::Kind::Number;
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            tok_.kind = Token::Kind::Ident;
            tok_.ident = src_.substr(start, pos_ - start);
            return;
        }
        ++pos_;
        switch (c) {
            case '+': tok_.kind = Token::Kind::Plus; return;
            case '-': tok_.kind = Token::Kind::Minus; return;
            case '*': tok_.kind = Token::Kind::Star; return;
            case '/': tok_.kind = Token::Kind::Slash; return;
            case '^': tok_.kind = Token::Kind::Caret; return;
            case '(': tok_.kind = Token::Kind::LParen; return;
            case ')': tok_.kind = Token::Kind::RParen; return;
            default: {
                std::ostringstream os;
                os << "unexpected character '" << c << "' at offset " << (pos_ - 1);
                throw SyntaxError(pos_ - 1, "operator or operand", os.str());
            }
        }
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    Token tok_;
};

// Precedence-climbing parser. A premature end of input is reported at the
// offset of the last token actually consumed, which is where the parse stalls.
class Parser {
public:
    explicit Parser(const std::string& src) : lex_(src) {}

    Expr parse() {
        Expr e = parse_sum();
        const Token& t = lex_.peek();
        if (t.kind != Token::Kind::End)
            throw SyntaxError(t.offset, "end of input", "trailing input after expression");
        return e;
    }

private:
    [[noreturn]] void fail(const Token& t, const std::string& expected) {
        if (t.kind == Token::Kind::End)
            throw SyntaxError(last_offset_, expected, "unexpected end of input, expected " + expected);
        std::ostringstream os;
        os << "unexpected token at offset " << t.offset << ", expected " << expected;
        throw SyntaxError(t.offset, expected, os.str());
    }

    Token take() {
        Token t = lex_.take();
        if (t.kind != Token::Kind::End) last_offset_ = t.offset;
        return t;
    }

    Expr parse_sum() {
        Expr e = parse_product();
        for (;;) {
            const Token::Kind k = lex_.peek().kind;
            if (k == Token::Kind::Plus) {
                take();
                e = make_binary(BinaryOp::Add, e, parse_product());
            } else if (k == Token::Kind::Minus) {
                take();
                e = make_binary(BinaryOp::Sub, e, parse_product());
            } else {
                return e;
            }
        }
    }

    Expr parse_product() {
        Expr e = parse_unary();
        for (;;) {
            const Token::Kind k = lex_.peek().kind;
            if (k == Token::Kind::Star) {
                take();
                e = make_binary(BinaryOp::Mul, e, parse_unary());
            } else if (k == Token::Kind::Slash) {
                take();
                e = make_binary(BinaryOp::Div, e, parse_unary());
            } else {
                return e;
            }
        }
    }

    // Unary minus sits between */ and ^: -x^2 parses as -(x^2).
    Expr parse_unary() {
        if (lex_.peek().kind == Token::Kind::Minus) {
            take();
            return make_unary(UnaryOp::Neg, parse_unary());
        }
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_primary();
        if (lex_.peek().kind == Token::Kind::Caret) {
            take();
            // Right-associative; the exponent may carry its own unary minus.
            return make_binary(BinaryOp::Pow, base, parse_unary());
        }
        return base;
    }

    Expr parse_primary() {
        Token t = take();
        switch (t.kind) {
            case Token::Kind::Number: return make_const(t.number);
            case Token::Kind::LParen: {
                Expr e = parse_sum();
                const Token close = take();
                if (close.kind != Token::Kind::RParen) fail(close, "')'");
                return e;
            }
            case Token::Kind::Ident: {
                if (t.ident == "x") return make_var(0);
                if (t.ident == "y") return make_var(1);
                if (t.ident == "z") return make_var(2);
                if (t.ident == "pi") return make_const(M_PI);
                auto it = function_table().find(t.ident);
                if (it == function_table().end()) fail(t, "variable, constant or function");
                const Token open = take();
                if (open.kind != Token::Kind::LParen) fail(open, "'(' after function name");
                Expr arg = parse_sum();
                const Token close = take();
                if (close.kind != Token::Kind::RParen) fail(close, "')'");
                return make_unary(it->second, arg);
            }
            default: fail(t, "expression");
        }
    }

    Lexer lex_;
    std::size_t last_offset_ = 0;
};

int precedence_of(const Expr& e) {
    switch (e->kind) {
        case ExprNode::Kind::Constant: return e->value < 0 ? 3 : 5;
        case ExprNode::Kind::Variable: return 5;
        case ExprNode::Kind::Unary: return e->un == UnaryOp::Neg ? 3 : 5;
        case ExprNode::Kind::Binary:
            switch (e->bin) {
                case BinaryOp::Add:
                case BinaryOp::Sub: return 1;
                case BinaryOp::Mul:
                case BinaryOp::Div: return 2;
                case BinaryOp::Pow: return 4;
            }
    }
    return 5;
}

void print_rec(std::ostream& os, const Expr& e, int min_prec) {
    const int prec = precedence_of(e);
    const bool parens = prec < min_prec;
    if (parens) os << "(";
    switch (e->kind) {
        case ExprNode::Kind::Constant: {
            char buf[48];
            std::snprintf(buf, sizeof(buf), "%.17g", e->value);
            os << buf;
            break;
        }
        case ExprNode::Kind::Variable: os << (e->var == 0 ? "x" : e->var == 1 ? "y" : "z"); break;
        case ExprNode::Kind::Unary:
            if (e->un == UnaryOp::Neg) {
                os << "-";
                print_rec(os, e->a, 3);
            } else {
                os << function_name(e->un) << "(";
                print_rec(os, e->a, 0);
                os << ")";
            }
            break;
        case ExprNode::Kind::Binary: {
            const char* sym = nullptr;
            int lp = 0, rp = 0;
            switch (e->bin) {
                case BinaryOp::Add: sym = " + "; lp = 1; rp = 2; break;
                case BinaryOp::Sub: sym = " - "; lp = 1; rp = 2; break;
                case BinaryOp::Mul: sym = "*"; lp = 2; rp = 3; break;
                case BinaryOp::Div: sym = "/"; lp = 2; rp = 3; break;
                case BinaryOp::Pow: sym = "^"; lp = 5; rp = 3; break;
            }
            print_rec(os, e->a, lp);
            os << sym;
            print_rec(os, e->b, rp);
            break;
        }
    }
    if (parens) os << ")";
}

bool nearly_integer(double v, long long& out) {
    if (std::abs(v) > 9.0e15) return false;
    const double r = std::nearbyint(v);
    if (r != v) return false;
    out = static_cast<long long>(r);
    return true;
}

} // namespace

Expr parse_expr(const std::string& src) {
    if (src.empty()) throw SyntaxError(0, "expression", "empty input");
    Parser p(src);
    return p.parse();
}

std::string print_expr(const Expr& e) {
    std::ostringstream os;
    print_rec(os, e, 0);
    return os.str();
}

double eval_expr(const Expr& e, const Point3& p) {
    switch (e->kind) {
        case ExprNode::Kind::Constant: return e->value;
        case ExprNode::Kind::Variable: return p[e->var];
        case ExprNode::Kind::Unary: {
            const double a = eval_expr(e->a, p);
            switch (e->un) {
                case UnaryOp::Neg: return -a;
                case UnaryOp::Sin: return std::sin(a);
                case UnaryOp::Cos: return std::cos(a);
                case UnaryOp::Sinh: return std::sinh(a);
                case UnaryOp::Cosh: return std::cosh(a);
                case UnaryOp::Tanh: return std::tanh(a);
                case UnaryOp::Exp: return std::exp(a);
                case UnaryOp::Ln:
                    if (!(a > 0.0)) throw EvalDomain("ln of non-positive value");
                    return std::log(a);
                case UnaryOp::Sqrt:
                    if (a < 0.0) throw EvalDomain("sqrt of negative value");
                    return std::sqrt(a);
                case UnaryOp::Abs: return std::abs(a);
                case UnaryOp::Asinh: return std::asinh(a);
                case UnaryOp::Atanh:
                    if (!(std::abs(a) < 1.0)) throw EvalDomain("atanh outside (-1,1)");
                    return std::atanh(a);
            }
            break;
        }
        case ExprNode::Kind::Binary: {
            const double a = eval_expr(e->a, p);
            const double b = eval_expr(e->b, p);
            switch (e->bin) {
                case BinaryOp::Add: return a + b;
                case BinaryOp::Sub: return a - b;
                case BinaryOp::Mul: return a * b;
                case BinaryOp::Div:
                    if (b == 0.0) throw EvalDomain("division by zero");
                    return a / b;
                case BinaryOp::Pow: {
                    long long bi = 0;
                    if (a < 0.0 && !nearly_integer(b, bi))
                        throw EvalDomain("negative base with non-integer exponent");
                    if (a == 0.0 && b < 0.0) throw EvalDomain("zero base with negative exponent");
                    return std::pow(a, b);
                }
            }
            break;
        }
    }
    throw EvalDomain("malformed expression node");
}

bool expr_equal(const Expr& a, const Expr& b) {
    if (a == b) return true;
    if (!a || !b || a->kind != b->kind) return false;
    switch (a->kind) {
        case ExprNode::Kind::Constant:
            return a->value == b->value || (std::isnan(a->value) && std::isnan(b->value));
        case ExprNode::Kind::Variable: return a->var == b->var;
        case ExprNode::Kind::Unary: return a->un == b->un && expr_equal(a->a, b->a);
        case ExprNode::Kind::Binary:
            return a->bin == b->bin && expr_equal(a->a, b->a) && expr_equal(a->b, b->b);
    }
    return false;
}

} // namespace realizer
