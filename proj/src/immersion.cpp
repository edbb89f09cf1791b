#include "lightlike/immersion.hpp"

#include <cmath>
#include <sstream>

#include "lightlike/error.hpp"

namespace lightlike {

Immersion::Immersion(ImmersionSpec spec) : spec_(std::move(spec)) {
    const int n = spec_.n();
    d1_.resize(spec_.components.size());
    d2_.resize(spec_.components.size());
    for (std::size_t c = 0; c < spec_.components.size(); ++c) {
        d1_[c].resize(static_cast<std::size_t>(n));
        d2_[c].assign(static_cast<std::size_t>(n), std::vector<expr::Expr>(static_cast<std::size_t>(n)));
        for (int i = 0; i < n; ++i) d1_[c][static_cast<std::size_t>(i)] = expr::differentiate(spec_.components[c], i);
        // canonical order: differentiate by the lower index first, mirror to j < i
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j)
                d2_[c][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    expr::differentiate(d1_[c][static_cast<std::size_t>(i)], j);
    }
}

const expr::Expr& Immersion::first(int component, int param) const {
    return d1_[static_cast<std::size_t>(component)][static_cast<std::size_t>(param)];
}

const expr::Expr& Immersion::second(int component, int i, int j) const {
    if (j < i) std::swap(i, j);
    return d2_[static_cast<std::size_t>(component)][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
}

bool Immersion::in_domain(const Point& x, double slack) const {
    if (x.size() != n()) return false;
    for (int i = 0; i < n(); ++i) {
        const Interval& iv = spec_.domain[static_cast<std::size_t>(i)];
        const double tol = slack * std::max(1.0, iv.length());
        if (x(i) < iv.lo - tol || x(i) > iv.hi + tol) return false;
    }
    return true;
}

void Immersion::check_point(const Point& x) const {
    if (x.size() != n()) {
        std::ostringstream os;
        os << "point has " << x.size() << " coordinates, expected " << n();
        throw InputError(os.str());
    }
    if (!in_domain(x)) {
        std::ostringstream os;
        os << "point (" << x.transpose() << ") lies outside the domain box";
        throw InputError(os.str());
    }
}

namespace {

double finite_or_throw(double v, int component, const char* what, const Point& x) {
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "non-finite " << what << " of component " << component << " at (" << x.transpose() << ")";
        throw NumericalError(os.str(), "jet");
    }
    return v;
}

} // namespace

Eigen::VectorXd Immersion::value(const Point& x) const {
    check_point(x);
    const std::span<const double> args(x.data(), static_cast<std::size_t>(x.size()));
    Eigen::VectorXd out(ambient_dim());
    for (int c = 0; c < ambient_dim(); ++c)
        out(c) = finite_or_throw(spec_.components[static_cast<std::size_t>(c)].evaluate(args), c, "value", x);
    return out;
}

Jet2 Immersion::jet(const Point& x) const {
    check_point(x);
    const std::span<const double> args(x.data(), static_cast<std::size_t>(x.size()));
    const int dim = ambient_dim();
    const int np = n();
    Jet2 j;
    j.point = x;
    j.value = value(x);
    j.d1.resize(dim, np);
    j.d2.assign(static_cast<std::size_t>(np), std::vector<Eigen::VectorXd>(static_cast<std::size_t>(np)));
    for (int i = 0; i < np; ++i)
        for (int c = 0; c < dim; ++c) j.d1(c, i) = finite_or_throw(first(c, i).evaluate(args), c, "first derivative", x);
    for (int i = 0; i < np; ++i) {
        for (int k = i; k < np; ++k) {
            Eigen::VectorXd v(dim);
            for (int c = 0; c < dim; ++c) v(c) = finite_or_throw(second(c, i, k).evaluate(args), c, "second derivative", x);
            j.d2[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = v;
            j.d2[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] = v;
        }
    }
    return j;
}

Jet2 jet(const ImmersionSpec& spec, const Point& x) { return Immersion(spec).jet(x); }

} // namespace lightlike
