#include "rdbounds/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>

namespace rdbounds {

ParseError::ParseError(const std::string& message, std::size_t offset)
    : InputError(message + " at offset " + std::to_string(offset)), offset_(offset) {}

namespace detail {

enum class Op { Const, VarX, VarT, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Log, Sqrt, Abs, Sgn, Min, Max, Piecewise };

using NodePtr = std::shared_ptr<const Node>;

struct Node {
    Op op = Op::Const;
    double value = 0.0;
    Var var = Var::X;  // Piecewise only
    std::vector<double> breaks;
    std::vector<NodePtr> kids;
};

}  // namespace detail

namespace {

using detail::Node;
using detail::NodePtr;
using detail::Op;

struct FunctionInfo {
    const char* name;
    Op op;
    int arity;
};

constexpr FunctionInfo kFunctions[] = {
    {"sin", Op::Sin, 1},   {"cos", Op::Cos, 1},   {"exp", Op::Exp, 1}, {"log", Op::Log, 1},
    {"sqrt", Op::Sqrt, 1}, {"abs", Op::Abs, 1},   {"sgn", Op::Sgn, 1}, {"min", Op::Min, 2},
    {"max", Op::Max, 2},
};

const FunctionInfo* find_function(std::string_view name) {
    for (const auto& f : kFunctions)
        if (name == f.name) return &f;
    return nullptr;
}

const char* function_name(Op op) {
    for (const auto& f : kFunctions)
        if (f.op == op) return f.name;
    return "?";
}

NodePtr make_const(double v) {
    auto n = std::make_shared<Node>();
    n->op = Op::Const;
    n->value = v;
    return n;
}

NodePtr make_node(Op op, std::vector<NodePtr> kids) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->kids = std::move(kids);
    return n;
}

bool is_const(const NodePtr& n, double v) { return n->op == Op::Const && n->value == v; }
bool is_const(const NodePtr& n) { return n->op == Op::Const; }

double eval_node(const Node& n, double x, double t);

double sign_at(double a) {
    if (a == 0.0) throw KinkError("derivative evaluated at a kink of abs/min/max");
    return a > 0.0 ? 1.0 : -1.0;
}

std::size_t piece_index(const std::vector<double>& breaks, double v) {
    return static_cast<std::size_t>(std::upper_bound(breaks.begin(), breaks.end(), v) - breaks.begin());
}

double eval_node(const Node& n, double x, double t) {
    auto k = [&](std::size_t i) { return eval_node(*n.kids[i], x, t); };
    switch (n.op) {
        case Op::Const: return n.value;
        case Op::VarX: return x;
        case Op::VarT: return t;
        case Op::Add: return k(0) + k(1);
        case Op::Sub: return k(0) - k(1);
        case Op::Mul: return k(0) * k(1);
        case Op::Div: return k(0) / k(1);
        case Op::Pow: return std::pow(k(0), k(1));
        case Op::Neg: return -k(0);
        case Op::Sin: return std::sin(k(0));
        case Op::Cos: return std::cos(k(0));
        case Op::Exp: return std::exp(k(0));
        case Op::Log: return std::log(k(0));
        case Op::Sqrt: return std::sqrt(k(0));
        case Op::Abs: return std::abs(k(0));
        case Op::Sgn: return sign_at(k(0));
        case Op::Min: return std::min(k(0), k(1));
        case Op::Max: return std::max(k(0), k(1));
        case Op::Piecewise: {
            const double v = n.var == Var::X ? x : t;
            return k(piece_index(n.breaks, v));
        }
    }
    return 0.0;
}

// Builders with light constant folding; they keep derivatives readable.

NodePtr fold(Op op, std::vector<NodePtr> kids) {
    if (std::all_of(kids.begin(), kids.end(), [](const NodePtr& c) { return is_const(c); }) && op != Op::Sgn) {
        Node tmp;
        tmp.op = op;
        tmp.kids = kids;
        return make_const(eval_node(tmp, 0.0, 0.0));
    }
    return make_node(op, std::move(kids));
}

NodePtr add(NodePtr a, NodePtr b) {
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    return fold(Op::Add, {std::move(a), std::move(b)});
}

NodePtr neg(NodePtr a) {
    if (a->op == Op::Neg) return a->kids[0];
    if (is_const(a)) return make_const(-a->value);
    return make_node(Op::Neg, {std::move(a)});
}

NodePtr sub(NodePtr a, NodePtr b) {
    if (is_const(b, 0.0)) return a;
    if (is_const(a, 0.0)) return neg(std::move(b));
    return fold(Op::Sub, {std::move(a), std::move(b)});
}

NodePtr mul(NodePtr a, NodePtr b) {
    if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    if (is_const(a, -1.0)) return neg(std::move(b));
    if (is_const(b, -1.0)) return neg(std::move(a));
    return fold(Op::Mul, {std::move(a), std::move(b)});
}

NodePtr div(NodePtr a, NodePtr b) {
    if (is_const(b, 1.0)) return a;
    if (is_const(a, 0.0) && !is_const(b, 0.0)) return make_const(0.0);
    return fold(Op::Div, {std::move(a), std::move(b)});
}

NodePtr power(NodePtr a, NodePtr b) {
    if (is_const(b, 1.0)) return a;
    if (is_const(b, 0.0)) return make_const(1.0);
    return fold(Op::Pow, {std::move(a), std::move(b)});
}

NodePtr call(Op op, std::vector<NodePtr> kids) { return fold(op, std::move(kids)); }

NodePtr make_piecewise(Var var, std::vector<double> breaks, std::vector<NodePtr> pieces) {
    if (pieces.size() != breaks.size() + 1 || breaks.empty())
        throw InputError("piecewise needs k >= 1 break points and k+1 pieces");
    for (std::size_t i = 0; i < breaks.size(); ++i) {
        if (!std::isfinite(breaks[i]) || (i > 0 && !(breaks[i] > breaks[i - 1])))
            throw InputError("piecewise break points must be finite and strictly increasing");
    }
    auto n = std::make_shared<Node>();
    n->op = Op::Piecewise;
    n->var = var;
    n->breaks = std::move(breaks);
    n->kids = std::move(pieces);
    return n;
}

NodePtr derive(const NodePtr& n, Var v) {
    const auto& k = n->kids;
    switch (n->op) {
        case Op::Const: return make_const(0.0);
        case Op::VarX: return make_const(v == Var::X ? 1.0 : 0.0);
        case Op::VarT: return make_const(v == Var::T ? 1.0 : 0.0);
        case Op::Add: return add(derive(k[0], v), derive(k[1], v));
        case Op::Sub: return sub(derive(k[0], v), derive(k[1], v));
        case Op::Neg: return neg(derive(k[0], v));
        case Op::Mul: return add(mul(derive(k[0], v), k[1]), mul(k[0], derive(k[1], v)));
        case Op::Div:
            return div(sub(mul(derive(k[0], v), k[1]), mul(k[0], derive(k[1], v))), power(k[1], make_const(2.0)));
        case Op::Pow: {
            auto db = derive(k[1], v);
            if (is_const(db, 0.0)) {
                return mul(mul(k[1], power(k[0], sub(k[1], make_const(1.0)))), derive(k[0], v));
            }
            // a^b (b' log a + b a'/a)
            return mul(n, add(mul(db, call(Op::Log, {k[0]})), div(mul(k[1], derive(k[0], v)), k[0])));
        }
        case Op::Sin: return mul(call(Op::Cos, {k[0]}), derive(k[0], v));
        case Op::Cos: return mul(neg(call(Op::Sin, {k[0]})), derive(k[0], v));
        case Op::Exp: return mul(n, derive(k[0], v));
        case Op::Log: return div(derive(k[0], v), k[0]);
        case Op::Sqrt: return div(derive(k[0], v), mul(make_const(2.0), n));
        case Op::Abs: return mul(call(Op::Sgn, {k[0]}), derive(k[0], v));
        case Op::Sgn: return make_const(0.0);
        case Op::Min:
        case Op::Max: {
            // min/max(a, b) = (a + b)/2 -/+ |a - b|/2
            auto da = derive(k[0], v);
            auto db = derive(k[1], v);
            auto half = make_const(0.5);
            auto mean = mul(half, add(da, db));
            auto kink = mul(mul(half, call(Op::Sgn, {sub(k[0], k[1])})), sub(da, db));
            return n->op == Op::Min ? sub(mean, kink) : add(mean, kink);
        }
        case Op::Piecewise: {
            std::vector<NodePtr> pieces;
            for (const auto& p : k) pieces.push_back(derive(p, v));
            if (std::all_of(pieces.begin(), pieces.end(), [&](const NodePtr& p) { return is_const(p, 0.0); }))
                return make_const(0.0);
            return make_piecewise(n->var, n->breaks, std::move(pieces));
        }
    }
    return make_const(0.0);
}

NodePtr rebuild(Op op, std::vector<NodePtr> kids) {
    switch (op) {
        case Op::Add: return add(kids[0], kids[1]);
        case Op::Sub: return sub(kids[0], kids[1]);
        case Op::Mul: return mul(kids[0], kids[1]);
        case Op::Div: return div(kids[0], kids[1]);
        case Op::Pow: return power(kids[0], kids[1]);
        case Op::Neg: return neg(kids[0]);
        default: return call(op, std::move(kids));
    }
}

NodePtr subst(const NodePtr& n, Var v, double value) {
    switch (n->op) {
        case Op::Const: return n;
        case Op::VarX: return v == Var::X ? make_const(value) : n;
        case Op::VarT: return v == Var::T ? make_const(value) : n;
        case Op::Piecewise: {
            if (n->var == v) return subst(n->kids[piece_index(n->breaks, value)], v, value);
            std::vector<NodePtr> pieces;
            for (const auto& p : n->kids) pieces.push_back(subst(p, v, value));
            return make_piecewise(n->var, n->breaks, std::move(pieces));
        }
        default: {
            std::vector<NodePtr> kids;
            for (const auto& c : n->kids) kids.push_back(subst(c, v, value));
            return rebuild(n->op, std::move(kids));
        }
    }
}

bool depends(const Node& n, Var v) {
    if (n.op == Op::VarX) return v == Var::X;
    if (n.op == Op::VarT) return v == Var::T;
    if (n.op == Op::Piecewise && n.var == v) return true;
    return std::any_of(n.kids.begin(), n.kids.end(), [&](const NodePtr& c) { return depends(*c, v); });
}

void collect_breaks(const Node& n, Var v, std::vector<double>& out) {
    if (n.op == Op::Piecewise && n.var == v) out.insert(out.end(), n.breaks.begin(), n.breaks.end());
    for (const auto& c : n.kids) collect_breaks(*c, v, out);
}

// ---- printing ----

enum Prec { kAdd = 1, kMul = 2, kNeg = 3, kPow = 4, kAtom = 5 };

std::string format_number(double v) {
    char buf[64];
    for (int digits : {15, 16, 17}) {
        std::snprintf(buf, sizeof buf, "%.*g", digits, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

int precedence(const Node& n) {
    switch (n.op) {
        case Op::Add:
        case Op::Sub: return kAdd;
        case Op::Mul:
        case Op::Div: return kMul;
        case Op::Neg: return kNeg;
        case Op::Pow: return kPow;
        case Op::Const: return n.value < 0.0 || std::signbit(n.value) ? kNeg : kAtom;
        default: return kAtom;
    }
}

std::string print(const Node& n);

std::string wrap(const Node& child, int min_prec) {
    std::string s = print(child);
    return precedence(child) < min_prec ? "(" + s + ")" : s;
}

std::string print(const Node& n) {
    switch (n.op) {
        case Op::Const: {
            if (n.value == std::numbers::pi) return "pi";
            if (n.value == std::numbers::e) return "e";
            if (n.value == -std::numbers::pi) return "-pi";
            return format_number(n.value);
        }
        case Op::VarX: return "x";
        case Op::VarT: return "t";
        case Op::Add: return wrap(*n.kids[0], kAdd) + " + " + wrap(*n.kids[1], kAdd + 1);
        case Op::Sub: return wrap(*n.kids[0], kAdd) + " - " + wrap(*n.kids[1], kAdd + 1);
        case Op::Mul: return wrap(*n.kids[0], kMul) + "*" + wrap(*n.kids[1], kMul + 1);
        case Op::Div: return wrap(*n.kids[0], kMul) + "/" + wrap(*n.kids[1], kMul + 1);
        case Op::Pow: return wrap(*n.kids[0], kPow) + "^" + wrap(*n.kids[1], kAtom);
        case Op::Neg: return "-" + wrap(*n.kids[0], kNeg);
        case Op::Piecewise: {
            std::string s = std::string("piecewise(") + (n.var == Var::X ? "x" : "t") + ", " + print(*n.kids[0]);
            for (std::size_t i = 0; i < n.breaks.size(); ++i)
                s += ", " + format_number(n.breaks[i]) + ", " + print(*n.kids[i + 1]);
            return s + ")";
        }
        default: {
            std::string s = std::string(function_name(n.op)) + "(";
            for (std::size_t i = 0; i < n.kids.size(); ++i) s += (i ? ", " : "") + print(*n.kids[i]);
            return s + ")";
        }
    }
}

// ---- parsing ----

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    NodePtr parse() {
        skip();
        if (pos_ >= s_.size()) throw ParseError("empty expression", pos_);
        auto n = expr();
        skip();
        if (pos_ < s_.size()) throw ParseError("unexpected '" + std::string(1, s_[pos_]) + "'", pos_);
        return n;
    }

private:
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) throw ParseError(std::string("expected '") + c + "'", pos_);
    }

    NodePtr expr() {
        auto lhs = term();
        for (;;) {
            if (accept('+')) lhs = make_node(Op::Add, {lhs, term()});
            else if (accept('-')) lhs = make_node(Op::Sub, {lhs, term()});
            else return lhs;
        }
    }
    NodePtr term() {
        auto lhs = unary();
        for (;;) {
            if (accept('*')) lhs = make_node(Op::Mul, {lhs, unary()});
            else if (accept('/')) lhs = make_node(Op::Div, {lhs, unary()});
            else return lhs;
        }
    }
    NodePtr unary() {
        if (accept('-')) return neg_literal(unary());
        if (accept('+')) return unary();
        return pow_chain();
    }
    NodePtr pow_chain() {
        auto lhs = primary();
        while (accept('^')) lhs = make_node(Op::Pow, {lhs, exponent()});
        return lhs;
    }
    NodePtr exponent() {
        if (accept('-')) return neg_literal(exponent());
        return primary();
    }
    static NodePtr neg_literal(NodePtr n) {
        if (n->op == Op::Const) return make_const(-n->value);
        return make_node(Op::Neg, {std::move(n)});
    }

    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            auto n = expr();
            expect(')');
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
    }

    NodePtr number() {
        const std::size_t start = pos_;
        std::string buf(s_.substr(pos_));
        char* end = nullptr;
        const double v = std::strtod(buf.c_str(), &end);
        if (end == buf.c_str()) throw ParseError("malformed number", start);
        pos_ += static_cast<std::size_t>(end - buf.c_str());
        return make_const(v);
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        const std::string_view name = s_.substr(start, pos_ - start);
        skip();
        const bool is_call = pos_ < s_.size() && s_[pos_] == '(';
        if (!is_call) {
            if (name == "x") return make_node(Op::VarX, {});
            if (name == "t") return make_node(Op::VarT, {});
            if (name == "pi") return make_const(std::numbers::pi);
            if (name == "e") return make_const(std::numbers::e);
            throw ParseError("unknown variable '" + std::string(name) + "'", start);
        }
        ++pos_;  // '('
        if (name == "piecewise") return piecewise_call(start);
        const FunctionInfo* f = find_function(name);
        if (!f) throw ParseError("unknown function '" + std::string(name) + "'", start);
        std::vector<NodePtr> args{expr()};
        while (accept(',')) args.push_back(expr());
        expect(')');
        if (static_cast<int>(args.size()) != f->arity)
            throw ParseError("function '" + std::string(name) + "' takes " + std::to_string(f->arity) +
                                 " argument(s)",
                             start);
        return make_node(f->op, std::move(args));
    }

    NodePtr piecewise_call(std::size_t start) {
        skip();
        Var var;
        if (accept('x')) var = Var::X;
        else if (accept('t')) var = Var::T;
        else throw ParseError("piecewise expects x or t as its first argument", pos_);
        std::vector<NodePtr> pieces;
        std::vector<double> breaks;
        expect(',');
        pieces.push_back(expr());
        while (accept(',')) {
            const std::size_t at = pos_;
            auto b = expr();
            if (!depends(*b, Var::X) && !depends(*b, Var::T)) {
                breaks.push_back(eval_node(*b, 0.0, 0.0));
            } else {
                throw ParseError("piecewise break point must be a number", at);
            }
            expect(',');
            pieces.push_back(expr());
        }
        expect(')');
        try {
            return make_piecewise(var, std::move(breaks), std::move(pieces));
        } catch (const InputError& e) {
            throw ParseError(e.what(), start);
        }
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

ScalarExpr::ScalarExpr() : node_(make_const(0.0)) {}
ScalarExpr ScalarExpr::constant(double value) { return ScalarExpr(make_const(value)); }
ScalarExpr ScalarExpr::variable(Var var) { return ScalarExpr(make_node(var == Var::X ? Op::VarX : Op::VarT, {})); }

double ScalarExpr::operator()(double x, double t) const { return eval_node(*node_, x, t); }
std::string ScalarExpr::str() const { return print(*node_); }
bool ScalarExpr::depends_on(Var var) const { return depends(*node_, var); }

std::optional<double> ScalarExpr::constant_value() const {
    if (node_->op == Op::Const) return node_->value;
    return std::nullopt;
}

std::vector<double> ScalarExpr::breakpoints(Var var) const {
    std::vector<double> out;
    collect_breaks(*node_, var, out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

ScalarExpr ScalarExpr::substitute(Var var, double value) const { return ScalarExpr(subst(node_, var, value)); }

ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b) { return ScalarExpr(add(a.node_, b.node_)); }
ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b) { return ScalarExpr(sub(a.node_, b.node_)); }
ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b) { return ScalarExpr(mul(a.node_, b.node_)); }
ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b) { return ScalarExpr(div(a.node_, b.node_)); }
ScalarExpr operator-(const ScalarExpr& a) { return ScalarExpr(neg(a.node_)); }
ScalarExpr pow(const ScalarExpr& a, const ScalarExpr& b) { return ScalarExpr(power(a.node_, b.node_)); }

ScalarExpr apply(std::string_view function, std::vector<ScalarExpr> args) {
    const FunctionInfo* f = find_function(function);
    if (!f) throw InputError("unknown function '" + std::string(function) + "'");
    if (static_cast<int>(args.size()) != f->arity) throw InputError("wrong argument count for " + std::string(function));
    std::vector<NodePtr> kids;
    for (auto& a : args) kids.push_back(a.node_);
    return ScalarExpr(call(f->op, std::move(kids)));
}

ScalarExpr piecewise(Var var, std::vector<double> breaks, std::vector<ScalarExpr> pieces) {
    std::vector<NodePtr> kids;
    for (auto& p : pieces) kids.push_back(p.node_);
    return ScalarExpr(make_piecewise(var, std::move(breaks), std::move(kids)));
}

ScalarExpr parse_expr(std::string_view text) { return ScalarExpr(Parser(text).parse()); }

ScalarExpr differentiate(const ScalarExpr& expr, Var var) { return ScalarExpr(derive(expr.node_, var)); }

}  // namespace rdbounds
