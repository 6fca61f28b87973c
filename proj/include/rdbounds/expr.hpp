#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rdbounds/errors.hpp"

namespace rdbounds {

enum class Var { X, T };

/// Syntax or name error while parsing, with the byte offset where it was found.
class ParseError : public InputError {
public:
    ParseError(const std::string& message, std::size_t offset);
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Evaluating a derivative exactly at a kink of abs/min/max.
class KinkError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

namespace detail {
struct Node;
}

/// Immutable scalar expression in the variables x and t.
///
/// Grammar (whitespace ignored):
///
///     expr    := term (('+' | '-') term)*
///     term    := unary (('*' | '/') unary)*
///     unary   := ('-' | '+') unary | power
///     power   := primary ('^' exponent)*        left associative
///     exponent:= '-' exponent | primary
///     primary := number | 'x' | 't' | 'pi' | 'e' | name '(' expr (',' expr)* ')' | '(' expr ')'
///
/// Functions: sin cos exp log sqrt abs sgn min max, and
/// `piecewise(v, e0, b1, e1, ..., bk, ek)` with v in {x, t} and numeric
/// break points b1 < ... < bk; segment j is the half-open interval [b_j, b_{j+1}).
class ScalarExpr {
public:
    ScalarExpr();  // the constant 0
    static ScalarExpr constant(double value);
    static ScalarExpr variable(Var var);

    double operator()(double x, double t) const;
    double eval(double x, double t) const { return (*this)(x, t); }

    /// Shortest text that parses back to an equivalent tree.
    std::string str() const;

    bool depends_on(Var var) const;
    std::optional<double> constant_value() const;
    /// Numeric break points of every piecewise node over `var`, sorted and unique.
    std::vector<double> breakpoints(Var var) const;

    ScalarExpr substitute(Var var, double value) const;

    friend ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b);
    friend ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b);
    friend ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b);
    friend ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b);
    friend ScalarExpr operator-(const ScalarExpr& a);
    friend ScalarExpr pow(const ScalarExpr& a, const ScalarExpr& b);
    friend ScalarExpr apply(std::string_view function, std::vector<ScalarExpr> args);
    friend ScalarExpr piecewise(Var var, std::vector<double> breaks, std::vector<ScalarExpr> pieces);
    friend ScalarExpr differentiate(const ScalarExpr& expr, Var var);
    friend ScalarExpr parse_expr(std::string_view text);

private:
    explicit ScalarExpr(std::shared_ptr<const detail::Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const detail::Node> node_;
};

ScalarExpr parse_expr(std::string_view text);
ScalarExpr differentiate(const ScalarExpr& expr, Var var);

ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b);
ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b);
ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b);
ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b);
ScalarExpr operator-(const ScalarExpr& a);
ScalarExpr pow(const ScalarExpr& a, const ScalarExpr& b);
ScalarExpr apply(std::string_view function, std::vector<ScalarExpr> args);
ScalarExpr piecewise(Var var, std::vector<double> breaks, std::vector<ScalarExpr> pieces);

inline ScalarExpr operator+(const ScalarExpr& a, double b) { return a + ScalarExpr::constant(b); }
inline ScalarExpr operator*(double a, const ScalarExpr& b) { return ScalarExpr::constant(a) * b; }

}  // namespace rdbounds
