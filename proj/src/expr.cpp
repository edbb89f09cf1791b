#include "lightlike/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lightlike::expr {

namespace {

constexpr std::array<std::string_view, 9> kFuncNames = {
    "sin", "cos", "tan", "sinh", "cosh", "tanh", "exp", "log", "sqrt"};

std::string format_number(double v) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
    return std::string(buf.data(), end);
}

double apply(Func f, double x) {
    switch (f) {
        case Func::sin: return std::sin(x);
        case Func::cos: return std::cos(x);
        case Func::tan: return std::tan(x);
        case Func::sinh: return std::sinh(x);
        case Func::cosh: return std::cosh(x);
        case Func::tanh: return std::tanh(x);
        case Func::exp: return std::exp(x);
        case Func::log: return std::log(x);
        case Func::sqrt: return std::sqrt(x);
    }
    return std::nan("");
}

char op_char(BinOp op) {
    switch (op) {
        case BinOp::add: return '+';
        case BinOp::sub: return '-';
        case BinOp::mul: return '*';
        case BinOp::div: return '/';
    }
    return '?';
}

} // namespace

std::string_view func_name(Func f) { return kFuncNames[static_cast<std::size_t>(f)]; }

bool lookup_func(std::string_view name, Func& out) {
    for (std::size_t i = 0; i < kFuncNames.size(); ++i) {
        if (kFuncNames[i] == name) {
            out = static_cast<Func>(i);
            return true;
        }
    }
    return false;
}

Expr Expr::number(double value) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::number;
    n->value = value;
    return Expr(std::move(n));
}

Expr Expr::param(int index, std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::param;
    n->index = index;
    n->name = std::move(name);
    return Expr(std::move(n));
}

Expr Expr::constant(Named which) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::constant;
    n->named = which;
    return Expr(std::move(n));
}

Expr Expr::raw_neg(const Expr& a) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::neg;
    n->lhs = a;
    return Expr(std::move(n));
}

Expr Expr::raw_binary(BinOp op, const Expr& a, const Expr& b) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::binary;
    n->op = op;
    n->lhs = a;
    n->rhs = b;
    return Expr(std::move(n));
}

Expr Expr::raw_pow(const Expr& base, double exponent) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::power;
    n->lhs = base;
    n->value = exponent;
    return Expr(std::move(n));
}

Expr Expr::call(Func f, const Expr& arg) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::call;
    n->func = f;
    n->lhs = arg;
    return Expr(std::move(n));
}

Kind Expr::kind() const { return node_->kind; }

bool Expr::is_number(double v) const { return is_number() && node_->value == v; }

double Expr::number_value() const { return node_->value; }

int Expr::param_index() const { return node_->index; }

Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_number() && b.is_number()) return Expr::number(a.number_value() + b.number_value());
    if (a.is_number(0.0)) return b;
    if (b.is_number(0.0)) return a;
    return Expr::raw_binary(BinOp::add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
    if (a.is_number() && b.is_number()) return Expr::number(a.number_value() - b.number_value());
    if (b.is_number(0.0)) return a;
    if (a.is_number(0.0)) return -b;
    return Expr::raw_binary(BinOp::sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_number() && b.is_number()) return Expr::number(a.number_value() * b.number_value());
    if (a.is_number(0.0) || b.is_number(0.0)) return Expr::number(0.0);
    if (a.is_number(1.0)) return b;
    if (b.is_number(1.0)) return a;
    if (a.is_number(-1.0)) return -b;
    if (b.is_number(-1.0)) return -a;
    return Expr::raw_binary(BinOp::mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
    if (a.is_number() && b.is_number() && b.number_value() != 0.0)
        return Expr::number(a.number_value() / b.number_value());
    if (a.is_number(0.0)) return Expr::number(0.0);
    if (b.is_number(1.0)) return a;
    return Expr::raw_binary(BinOp::div, a, b);
}

Expr operator-(const Expr& a) {
    if (a.is_number()) return Expr::number(-a.number_value());
    if (a.kind() == Kind::neg) return a.node().lhs;
    return Expr::raw_neg(a);
}

Expr Expr::pow(const Expr& base, double exponent) {
    if (exponent == 0.0) return number(1.0);
    if (exponent == 1.0) return base;
    if (base.is_number()) return number(std::pow(base.number_value(), exponent));
    return raw_pow(base, exponent);
}

bool Expr::is_constant() const {
    switch (kind()) {
        case Kind::number:
        case Kind::constant: return true;
        case Kind::param: return false;
        case Kind::neg:
        case Kind::power:
        case Kind::call: return node_->lhs.is_constant();
        case Kind::binary: return node_->lhs.is_constant() && node_->rhs.is_constant();
    }
    return false;
}

double Expr::evaluate(std::span<const double> params) const {
    const Node& n = *node_;
    switch (n.kind) {
        case Kind::number: return n.value;
        case Kind::param: return params[static_cast<std::size_t>(n.index)];
        case Kind::constant: return n.named == Named::pi ? std::numbers::pi : std::numbers::e;
        case Kind::neg: return -n.lhs.evaluate(params);
        case Kind::power: return std::pow(n.lhs.evaluate(params), n.value);
        case Kind::call: return apply(n.func, n.lhs.evaluate(params));
        case Kind::binary: {
            const double a = n.lhs.evaluate(params);
            const double b = n.rhs.evaluate(params);
            switch (n.op) {
                case BinOp::add: return a + b;
                case BinOp::sub: return a - b;
                case BinOp::mul: return a * b;
                case BinOp::div: return a / b;
            }
        }
    }
    return std::nan("");
}

std::string Expr::to_string() const {
    const Node& n = *node_;
    switch (n.kind) {
        case Kind::number:
            return n.value < 0 || std::signbit(n.value) ? "(-" + format_number(-n.value) + ")"
                                                        : format_number(n.value);
        case Kind::param: return n.name;
        case Kind::constant: return n.named == Named::pi ? "pi" : "e";
        case Kind::neg: return "(-" + n.lhs.to_string() + ")";
        case Kind::power: return "(" + n.lhs.to_string() + " ^ " + format_number(n.value) + ")";
        case Kind::call: return std::string(func_name(n.func)) + "(" + n.lhs.to_string() + ")";
        case Kind::binary:
            return "(" + n.lhs.to_string() + " " + op_char(n.op) + " " + n.rhs.to_string() + ")";
    }
    return "?";
}

bool Expr::structurally_equal(const Expr& other) const {
    const Node& a = *node_;
    const Node& b = *other.node_;
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Kind::number: return a.value == b.value;
        case Kind::param: return a.index == b.index && a.name == b.name;
        case Kind::constant: return a.named == b.named;
        case Kind::neg: return a.lhs.structurally_equal(b.lhs);
        case Kind::power: return a.value == b.value && a.lhs.structurally_equal(b.lhs);
        case Kind::call: return a.func == b.func && a.lhs.structurally_equal(b.lhs);
        case Kind::binary:
            return a.op == b.op && a.lhs.structurally_equal(b.lhs) && a.rhs.structurally_equal(b.rhs);
    }
    return false;
}

Expr differentiate(const Expr& e, int param) {
    const Node& n = e.node();
    switch (n.kind) {
        case Kind::number:
        case Kind::constant: return Expr::number(0.0);
        case Kind::param: return Expr::number(n.index == param ? 1.0 : 0.0);
        case Kind::neg: return -differentiate(n.lhs, param);
        case Kind::binary: {
            const Expr da = differentiate(n.lhs, param);
            const Expr db = differentiate(n.rhs, param);
            switch (n.op) {
                case BinOp::add: return da + db;
                case BinOp::sub: return da - db;
                case BinOp::mul: return da * n.rhs + n.lhs * db;
                case BinOp::div:
                    if (db.is_number(0.0)) return da / n.rhs;
                    return (da * n.rhs - n.lhs * db) / Expr::pow(n.rhs, 2.0);
            }
            break;
        }
        case Kind::power: {
            const Expr da = differentiate(n.lhs, param);
            if (da.is_number(0.0)) return Expr::number(0.0);
            return Expr::number(n.value) * Expr::pow(n.lhs, n.value - 1.0) * da;
        }
        case Kind::call: {
            const Expr& a = n.lhs;
            const Expr da = differentiate(a, param);
            if (da.is_number(0.0)) return Expr::number(0.0);
            Expr outer;
            switch (n.func) {
                case Func::sin: outer = Expr::call(Func::cos, a); break;
                case Func::cos: outer = -Expr::call(Func::sin, a); break;
                case Func::tan: outer = Expr::number(1.0) + Expr::pow(Expr::call(Func::tan, a), 2.0); break;
                case Func::sinh: outer = Expr::call(Func::cosh, a); break;
                case Func::cosh: outer = Expr::call(Func::sinh, a); break;
                case Func::tanh: outer = Expr::number(1.0) - Expr::pow(Expr::call(Func::tanh, a), 2.0); break;
                case Func::exp: outer = Expr::call(Func::exp, a); break;
                case Func::log: return da / a;
                case Func::sqrt: return da / (Expr::number(2.0) * Expr::call(Func::sqrt, a));
            }
            return outer * da;
        }
    }
    return Expr::number(0.0);
}

} // namespace lightlike::expr
