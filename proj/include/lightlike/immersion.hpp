#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "lightlike/expr.hpp"
#include "lightlike/indef.hpp"

namespace lightlike {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
};

// Parsed definition of a map f: M^n -> R^{neg+pos} with an indefinite
// diagonal metric. When curvature != 0 the components are coordinates in the
// flat space enclosing the quadric g(f, f) = 1/curvature.
struct ImmersionSpec {
    Signature signature;
    double curvature = 0.0;
    std::vector<std::string> params;
    std::vector<Interval> domain;  // one per parameter, same order
    std::vector<expr::Expr> components;

    int n() const { return static_cast<int>(params.size()); }
    int ambient_dim() const { return signature.dim(); }
    int p() const { return ambient_dim() - n(); }
};

// Parses the spec-file language. Throws SyntaxError (with line/column) or
// InputError on validation failures.
ImmersionSpec parse_immersion(std::string_view text);
ImmersionSpec load_immersion(const std::string& path);

// Parses a single expression over the given parameter names.
expr::Expr parse_expression(std::string_view text, const std::vector<std::string>& params);

using Point = Eigen::VectorXd;

// Value and exact first/second partial derivatives of f at a parameter point.
struct Jet2 {
    Point point;
    Eigen::VectorXd value;
    Eigen::MatrixXd d1;                       // ambient x n, column i = df/du^i
    std::vector<std::vector<Eigen::VectorXd>> d2;  // n x n, d2[i][j] = d2f/du^i du^j
};

// ImmersionSpec with its symbolic first and second derivatives precomputed.
// Immutable; safe to share across threads.
class Immersion {
public:
    explicit Immersion(ImmersionSpec spec);

    const ImmersionSpec& spec() const { return spec_; }
    const Signature& signature() const { return spec_.signature; }
    int n() const { return spec_.n(); }
    int ambient_dim() const { return spec_.ambient_dim(); }

    bool in_domain(const Point& x, double slack = 1e-12) const;

    // f(x); throws NumericalError naming the component on non-finite values.
    Eigen::VectorXd value(const Point& x) const;
    Jet2 jet(const Point& x) const;

    const expr::Expr& first(int component, int param) const;
    const expr::Expr& second(int component, int i, int j) const;

private:
    void check_point(const Point& x) const;

    ImmersionSpec spec_;
    std::vector<std::vector<expr::Expr>> d1_;               // [component][param]
    std::vector<std::vector<std::vector<expr::Expr>>> d2_;  // [component][i][j], filled for i <= j
};

Jet2 jet(const ImmersionSpec& spec, const Point& x);

} // namespace lightlike
