#pragma once

#include <cmath>
#include <string>

#include "lightlike/immersion.hpp"
#include "lightlike/indef.hpp"

namespace testing_support {

inline std::string spec_path(const std::string& name) { return std::string(LIGHTLIKE_SPECS_DIR) + "/" + name; }

inline lightlike::Immersion load(const std::string& name) {
    return lightlike::Immersion(lightlike::load_immersion(spec_path(name)));
}

inline lightlike::Point pt(double u, double v) {
    lightlike::Point x(2);
    x << u, v;
    return x;
}

inline const lightlike::Signature kSig23{2, 3};

// Closed-form frame of the sinh/cosh isotropic surface in R^5_2, written out by
// hand (independent of the library's construction).
namespace surface {
inline const double r2 = std::sqrt(2.0);

inline lightlike::Vec xi1(double) {
    lightlike::Vec v(5);
    v << 1 / r2, 1 / r2, 0, 1, 0;
    return v;
}
inline lightlike::Vec xi2(double t) {
    lightlike::Vec v(5);
    v << std::cosh(t) / r2, -std::cosh(t) / r2, std::sinh(t), 0, 1;
    return v;
}
inline lightlike::Vec w1(double t) {
    lightlike::Vec v(5);
    v << std::sinh(t) / r2, -std::sinh(t) / r2, std::cosh(t), 0, 0;
    return v;
}
inline lightlike::Vec n1(double) {
    lightlike::Vec v(5);
    v << -1 / r2, -1 / r2, 0, 1, 0;
    return 0.5 * v;
}
inline lightlike::Vec n2(double t) {
    lightlike::Vec v(5);
    v << -std::cosh(t) / r2, std::cosh(t) / r2, -std::sinh(t), 0, 1;
    return 0.5 * v;
}
inline lightlike::Vec f(double u, double t) {
    lightlike::Vec v(5);
    v << (u + std::sinh(t)) / r2, (u - std::sinh(t)) / r2, std::cosh(t), u, t;
    return v;
}
} // namespace surface

// Euclidean least-squares residual of v against span(columns), relative to max(1, |v|).
inline double ls_residual(const lightlike::Mat& columns, const lightlike::Vec& v) {
    const lightlike::Vec c = columns.colPivHouseholderQr().solve(v);
    return (columns * c - v).norm() / std::max(1.0, v.norm());
}

// Largest residual of b's columns in span(a), both ways.
inline double span_distance(const lightlike::Mat& a, const lightlike::Mat& b) {
    double worst = 0.0;
    for (Eigen::Index k = 0; k < b.cols(); ++k) worst = std::max(worst, ls_residual(a, b.col(k).normalized()));
    for (Eigen::Index k = 0; k < a.cols(); ++k) worst = std::max(worst, ls_residual(b, a.col(k).normalized()));
    return worst;
}

} // namespace testing_support
