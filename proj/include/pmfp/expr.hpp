#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pmfp/carrier.hpp"
#include "pmfp/errors.hpp"

namespace pmfp {

// ---------------------------------------------------------------------------
// Expression trees
//
// Grammar:
//   expr    := term (('+'|'-') term)*
//   term    := factor (('*'|'/') factor)*
//   factor  := unary ('^' factor)?          -- '^' right-associative
//   unary   := '-' unary | primary
//   primary := NUMBER | IDENT | IDENT '(' expr (',' expr)* ')' | '(' expr ')'
//
// Functions: min(a,b), max(a,b), abs(a), sqrt(a).
// ---------------------------------------------------------------------------

class Expression {
public:
    enum class Kind { number, var, neg, add, sub, mul, div, pow, fmin, fmax, fabs, fsqrt };

    Kind kind = Kind::number;
    double value = 0.0;        // kind == number
    int var_index = -1;        // kind == var; index into the declared variable list
    std::string var_name;      // kind == var
    std::vector<Expression> children;

    static Expression number(double v) {
        Expression e;
        e.kind = Kind::number;
        e.value = v;
        return e;
    }

    static Expression variable(int index, std::string name) {
        Expression e;
        e.kind = Kind::var;
        e.var_index = index;
        e.var_name = std::move(name);
        return e;
    }

    static Expression node(Kind k, std::vector<Expression> kids) {
        Expression e;
        e.kind = k;
        e.children = std::move(kids);
        return e;
    }
};

namespace detail {

enum class TokKind { number, ident, plus, minus, star, slash, caret, lparen, rparen, comma, end };

struct Token {
    TokKind kind;
    std::size_t offset;
    double number = 0.0;
    std::string text;
};

inline std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        std::size_t start = i;
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
            if (i < src.size() && src[i] == '.') {
                ++i;
                while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
            }
            if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
                std::size_t save = i;
                ++i;
                if (i < src.size() && (src[i] == '+' || src[i] == '-')) ++i;
                if (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) {
                    while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
                } else {
                    i = save;  // bare 'e' belongs to the next token
                }
            }
            double v = 0.0;
            auto res = std::from_chars(src.data() + start, src.data() + i, v);
            if (res.ec != std::errc())
                throw parse_error("malformed number", start);
            out.push_back({TokKind::number, start, v, std::string(src.substr(start, i - start))});
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_'))
                ++i;
            out.push_back({TokKind::ident, start, 0.0, std::string(src.substr(start, i - start))});
            continue;
        }
        TokKind k;
        switch (c) {
            case '+': k = TokKind::plus; break;
            case '-': k = TokKind::minus; break;
            case '*': k = TokKind::star; break;
            case '/': k = TokKind::slash; break;
            case '^': k = TokKind::caret; break;
            case '(': k = TokKind::lparen; break;
            case ')': k = TokKind::rparen; break;
            case ',': k = TokKind::comma; break;
            default:
                throw parse_error(std::string("unexpected character '") + c + "'", start);
        }
        out.push_back({k, start, 0.0, std::string(1, c)});
        ++i;
    }
    out.push_back({TokKind::end, src.size(), 0.0, ""});
    return out;
}

class Parser {
public:
    Parser(std::string_view src, std::span<const std::string> vars)
        : tokens_(lex(src)), vars_(vars) {}

    Expression parse() {
        Expression e = parse_expr();
        if (cur().kind != TokKind::end)
            throw parse_error("unexpected trailing input", cur().offset);
        return e;
    }

private:
    const Token& cur() const { return tokens_[pos_]; }
    void advance() { ++pos_; }

    Expression parse_expr() {
        Expression lhs = parse_term();
        while (cur().kind == TokKind::plus || cur().kind == TokKind::minus) {
            bool plus = cur().kind == TokKind::plus;
            advance();
            Expression rhs = parse_term();
            lhs = Expression::node(plus ? Expression::Kind::add : Expression::Kind::sub,
                                   {std::move(lhs), std::move(rhs)});
        }
        return lhs;
    }

    Expression parse_term() {
        Expression lhs = parse_factor();
        while (cur().kind == TokKind::star || cur().kind == TokKind::slash) {
            bool mul = cur().kind == TokKind::star;
            advance();
            Expression rhs = parse_factor();
            lhs = Expression::node(mul ? Expression::Kind::mul : Expression::Kind::div,
                                   {std::move(lhs), std::move(rhs)});
        }
        return lhs;
    }

    Expression parse_factor() {
        Expression base = parse_unary();
        if (cur().kind == TokKind::caret) {
            advance();
            Expression exp = parse_factor();  // right-associative
            return Expression::node(Expression::Kind::pow, {std::move(base), std::move(exp)});
        }
        return base;
    }

    Expression parse_unary() {
        if (cur().kind == TokKind::minus) {
            advance();
            return Expression::node(Expression::Kind::neg, {parse_unary()});
        }
        return parse_primary();
    }

    Expression parse_primary() {
        const Token& t = cur();
        switch (t.kind) {
            case TokKind::number: {
                advance();
                return Expression::number(t.number);
            }
            case TokKind::ident: {
                std::string name = t.text;
                std::size_t name_off = t.offset;
                advance();
                if (cur().kind == TokKind::lparen) {
                    advance();
                    std::vector<Expression> args;
                    args.push_back(parse_expr());
                    while (cur().kind == TokKind::comma) {
                        advance();
                        args.push_back(parse_expr());
                    }
                    if (cur().kind != TokKind::rparen)
                        throw parse_error("expected ')'", cur().offset);
                    advance();
                    return make_call(name, std::move(args), name_off);
                }
                for (std::size_t i = 0; i < vars_.size(); ++i) {
                    if (vars_[i] == name)
                        return Expression::variable(static_cast<int>(i), name);
                }
                throw parse_error("unknown identifier '" + name + "'", name_off);
            }
            case TokKind::lparen: {
                advance();
                Expression inner = parse_expr();
                if (cur().kind != TokKind::rparen)
                    throw parse_error("expected ')'", cur().offset);
                advance();
                return inner;
            }
            default:
                throw parse_error("expected expression", t.offset);
        }
    }

    Expression make_call(const std::string& name, std::vector<Expression> args,
                         std::size_t offset) {
        auto want = [&](Expression::Kind k, std::size_t arity) {
            if (args.size() != arity)
                throw parse_error("function '" + name + "' expects " + std::to_string(arity) +
                                      " argument(s), got " + std::to_string(args.size()),
                                  offset);
            return Expression::node(k, std::move(args));
        };
        if (name == "min") return want(Expression::Kind::fmin, 2);
        if (name == "max") return want(Expression::Kind::fmax, 2);
        if (name == "abs") return want(Expression::Kind::fabs, 1);
        if (name == "sqrt") return want(Expression::Kind::fsqrt, 1);
        throw parse_error("unknown function '" + name + "'", offset);
    }

    std::vector<Token> tokens_;
    std::span<const std::string> vars_;
    std::size_t pos_ = 0;
};

inline void check_finite(double v) {
    if (!std::isfinite(v)) throw eval_error("non-finite result");
}

}  // namespace detail

/// Parses `source` over the declared variable set. Whitespace-insensitive.
inline Expression parse(std::string_view source, std::span<const std::string> variables) {
    return detail::Parser(source, variables).parse();
}

inline Expression parse(std::string_view source, std::initializer_list<std::string> variables) {
    std::vector<std::string> vars(variables);
    return detail::Parser(source, vars).parse();
}

/// Evaluates `expr` with `values[i]` bound to the i-th declared variable.
inline double eval(const Expression& e, std::span<const double> values) {
    using K = Expression::Kind;
    switch (e.kind) {
        case K::number:
            return e.value;
        case K::var:
            if (e.var_index < 0 || static_cast<std::size_t>(e.var_index) >= values.size())
                throw eval_error("unbound variable '" + e.var_name + "'");
            return values[static_cast<std::size_t>(e.var_index)];
        case K::neg:
            return -eval(e.children[0], values);
        case K::add: {
            double v = eval(e.children[0], values) + eval(e.children[1], values);
            detail::check_finite(v);
            return v;
        }
        case K::sub: {
            double v = eval(e.children[0], values) - eval(e.children[1], values);
            detail::check_finite(v);
            return v;
        }
        case K::mul: {
            double v = eval(e.children[0], values) * eval(e.children[1], values);
            detail::check_finite(v);
            return v;
        }
        case K::div: {
            double d = eval(e.children[1], values);
            if (d == 0.0) throw eval_error("division by zero");
            double v = eval(e.children[0], values) / d;
            detail::check_finite(v);
            return v;
        }
        case K::pow: {
            double b = eval(e.children[0], values);
            double x = eval(e.children[1], values);
            if (b == 0.0 && x < 0.0) throw eval_error("zero raised to a negative power");
            double v = std::pow(b, x);
            detail::check_finite(v);
            return v;
        }
        case K::fmin:
            return std::min(eval(e.children[0], values), eval(e.children[1], values));
        case K::fmax:
            return std::max(eval(e.children[0], values), eval(e.children[1], values));
        case K::fabs:
            return std::abs(eval(e.children[0], values));
        case K::fsqrt: {
            double a = eval(e.children[0], values);
            if (a < 0.0) throw eval_error("sqrt of a negative number");
            return std::sqrt(a);
        }
    }
    throw eval_error("corrupt expression node");
}

namespace detail {

// Precedence levels used by the canonical printer: additive 1, multiplicative 2,
// power 3. A child is parenthesized when its level is below what its position
// requires.
inline int precedence(Expression::Kind k) {
    using K = Expression::Kind;
    switch (k) {
        case K::add:
        case K::sub: return 1;
        case K::mul:
        case K::div: return 2;
        case K::pow: return 3;
        case K::neg: return 0;  // handled specially
        default: return 9;      // atoms and calls never need parens
    }
}

inline void print_rec(const Expression& e, int min_level, std::string& out) {
    using K = Expression::Kind;
    auto binary = [&](const char* op, int level, int left_min, int right_min) {
        bool parens = level < min_level;
        if (parens) out += '(';
        print_rec(e.children[0], left_min, out);
        out += op;
        print_rec(e.children[1], right_min, out);
        if (parens) out += ')';
    };
    switch (e.kind) {
        case K::number: {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", e.value);
            out += buf;
            return;
        }
        case K::var:
            out += e.var_name;
            return;
        case K::neg: {
            // '-' binds to a unary; anything looser must be parenthesized so the
            // output re-parses to the same tree.
            bool parens = min_level > 0;
            if (parens) out += '(';
            out += '-';
            const Expression& c = e.children[0];
            bool child_atom = c.kind == K::number || c.kind == K::var || c.kind == K::neg ||
                              precedence(c.kind) == 9;
            if (child_atom) {
                print_rec(c, 0, out);
            } else {
                out += '(';
                print_rec(c, 0, out);
                out += ')';
            }
            if (parens) out += ')';
            return;
        }
        case K::add: binary("+", 1, 1, 2); return;
        case K::sub: binary("-", 1, 1, 2); return;
        case K::mul: binary("*", 2, 2, 3); return;
        case K::div: binary("/", 2, 2, 3); return;
        case K::pow: {
            bool parens = 3 < min_level;
            if (parens) out += '(';
            // The base of '^' must be a unary; wrap anything looser.
            const Expression& base = e.children[0];
            if (precedence(base.kind) >= 3 || base.kind == K::neg) {
                if (base.kind == K::pow) {
                    out += '(';
                    print_rec(base, 0, out);
                    out += ')';
                } else {
                    print_rec(base, 3, out);
                }
            } else {
                out += '(';
                print_rec(base, 0, out);
                out += ')';
            }
            out += '^';
            print_rec(e.children[1], 3, out);
            if (parens) out += ')';
            return;
        }
        case K::fmin:
        case K::fmax: {
            out += (e.kind == K::fmin) ? "min(" : "max(";
            print_rec(e.children[0], 0, out);
            out += ',';
            print_rec(e.children[1], 0, out);
            out += ')';
            return;
        }
        case K::fabs:
        case K::fsqrt: {
            out += (e.kind == K::fabs) ? "abs(" : "sqrt(";
            print_rec(e.children[0], 0, out);
            out += ')';
            return;
        }
    }
}

}  // namespace detail

/// Canonical printer; parse(to_string(e)) rebuilds the same tree.
inline std::string to_string(const Expression& e) {
    std::string out;
    detail::print_rec(e, 0, out);
    return out;
}

// ---------------------------------------------------------------------------
// Piecewise self-maps
// ---------------------------------------------------------------------------

/// One guarded branch of a piecewise map: applies `body` when the input lies
/// in the closed interval [lo, hi].
struct MapPiece {
    Interval guard;
    Expression body;
    std::string source;  // original expression text, kept for reports
};

/// A self-map T given by guarded expressions. Guards may overlap; the first
/// matching piece wins.
struct PiecewiseMap {
    std::string name;
    std::vector<MapPiece> pieces;

    static PiecewiseMap from_sources(
        std::string name,
        const std::vector<std::pair<Interval, std::string>>& sources) {
        PiecewiseMap m;
        m.name = std::move(name);
        std::vector<std::string> vars{"x"};
        for (const auto& [guard, src] : sources) {
            m.pieces.push_back({guard, parse(src, vars), src});
        }
        return m;
    }
};

/// Applies the map and checks the image stays in the carrier.
inline double apply_map(const PiecewiseMap& map, const CarrierSpec& carrier, double x) {
    if (!carrier.contains(x))
        throw domain_error("point " + std::to_string(x) + " is not in the carrier");
    for (const auto& piece : map.pieces) {
        if (x >= piece.guard.lo - kPointTol && x <= piece.guard.hi + kPointTol) {
            double args[1] = {x};
            double image = eval(piece.body, args);
            if (!carrier.contains(image)) {
                throw not_self_map_error(
                    "map '" + map.name + "' is not a self-map: T(" + std::to_string(x) +
                        ") = " + std::to_string(image) + " is outside the carrier",
                    x, image);
            }
            return image;
        }
    }
    throw not_self_map_error(
        "map '" + map.name + "' is not total: no guard matches x = " + std::to_string(x), x,
        std::numeric_limits<double>::quiet_NaN());
}

}  // namespace pmfp
