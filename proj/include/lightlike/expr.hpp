#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lightlike::expr {

enum class Func { sin, cos, tan, sinh, cosh, tanh, exp, log, sqrt };
enum class BinOp { add, sub, mul, div };
enum class Kind { number, param, constant, neg, binary, power, call };
enum class Named { pi, e };

struct Node;

// Immutable expression tree. Copies share structure; nodes are never mutated
// after construction, so an Expr can be evaluated from many threads at once.
class Expr {
public:
    Expr() = default;  // empty; only valid as an unused operand slot

    static Expr number(double value);
    static Expr param(int index, std::string name);
    static Expr constant(Named which);

    // Smart constructors fold literal arithmetic and drop neutral elements.
    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a);
    static Expr pow(const Expr& base, double exponent);
    static Expr call(Func f, const Expr& arg);

    // Raw constructors without folding; the parser uses these so that the
    // tree mirrors the source text.
    static Expr raw_neg(const Expr& a);
    static Expr raw_binary(BinOp op, const Expr& a, const Expr& b);
    static Expr raw_pow(const Expr& base, double exponent);

    Kind kind() const;
    bool is_number() const { return kind() == Kind::number; }
    bool is_number(double v) const;
    double number_value() const;  // number nodes only
    int param_index() const;      // param nodes only
    const Node& node() const { return *node_; }
    bool empty() const { return !node_; }

    // True when no parameter occurs in the tree.
    bool is_constant() const;

    double evaluate(std::span<const double> params) const;

    // Fully parenthesized; re-parses to a structurally identical tree.
    std::string to_string() const;

    bool structurally_equal(const Expr& other) const;

private:
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

struct Node {
    Kind kind = Kind::number;
    double value = 0.0;        // number literal or power exponent
    int index = -1;            // parameter index
    std::string name;          // parameter name
    Named named = Named::pi;
    BinOp op = BinOp::add;
    Func func = Func::sin;
    Expr lhs;                  // operand of neg/power/call, left of binary
    Expr rhs;
};

// Symbolic partial derivative with respect to parameter `param`.
Expr differentiate(const Expr& e, int param);

std::string_view func_name(Func f);
bool lookup_func(std::string_view name, Func& out);

} // namespace lightlike::expr
