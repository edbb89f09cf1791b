#pragma once

#include <functional>
#include <tuple>
#include <vector>

#include "lightlike/frame.hpp"

namespace lightlike {

// Dense 3-index table.
class Table3 {
public:
    Table3() = default;
    Table3(int a, int b, int c) : a_(a), b_(b), c_(c), data_(static_cast<std::size_t>(a * b * c), 0.0) {}

    double& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
    double operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }
    int extent(int axis) const { return axis == 0 ? a_ : axis == 1 ? b_ : c_; }
    double max_abs() const;
    const std::vector<double>& data() const { return data_; }

private:
    std::size_t index(int i, int j, int k) const { return static_cast<std::size_t>((i * b_ + j) * c_ + k); }
    int a_ = 0, b_ = 0, c_ = 0;
    std::vector<double> data_;
};

// Coefficients of the induced objects at one point. Tangent indices refer to
// the frame's tangent basis t = [xi | X]; transversal sections are W_alpha
// (alpha < m) and N_j (j < r).
struct FormTable {
    int n = 0, r = 0, m = 0;

    Table3 h_l;    // (k, i, j): h^l(t_i, t_j) along N_k
    Table3 h_s;    // (alpha, i, j): h^s(t_i, t_j) along W_alpha
    Table3 nabla;  // (k, i, j): tangential part of d2f/du^i du^j along t_k

    bool has_weingarten = false;
    Table3 a_w;     // (alpha, i, k): A_{W_alpha} t_i along t_k
    Table3 a_n;     // (j, i, k): A_{N_j} t_i along t_k
    Table3 conn_s;  // (i, alpha, beta): nabla^s_{t_i} W_alpha along W_beta
    Table3 conn_l;  // (i, j, k): nabla^l_{t_i} N_j along N_k
    Table3 d_l;     // (i, alpha, k): D^l(t_i, W_alpha) along N_k
    Table3 d_s;     // (i, j, alpha): D^s(t_i, N_j) along W_alpha
    Table3 gram_rate;  // (i, a, b): t_i . g(V_a, V_b) for V = [W | N]

    double step = 0.0;        // finite-difference step actually used
    bool one_sided = false;   // a boundary forced one-sided stencils
};

struct PointForms {
    PointFrame frame;
    FormTable table;
};

// h part only; flat ambient.
FormTable second_fundamental(const PointFrame& frame);

// Ambient vector h^s(t_i, t_j).
Vec h_s_vector(const FormTable& table, const PointFrame& frame, int i, int j);

inline constexpr double kFrameDerivativeStep = 1e-5;
inline constexpr double kMinFrameDerivativeStep = 1e-8;

// Adds the Weingarten parts by differentiating the frozen frame sections.
void weingarten(const FrameField& field, FormTable& table, double step = kFrameDerivativeStep);

// Both the h and the Weingarten parts at `x`.
PointForms compute_forms(const Immersion& immersion, const Point& x, const FrameOptions& opts = {},
                         double step = kFrameDerivativeStep);

// Derivative of a matrix-valued function of the parameters along parameter
// `param`: central differences with one Richardson level, or one-sided
// second-order stencils where the domain boundary is within reach.
struct StencilDerivative {
    Mat value;
    bool one_sided = false;
};

StencilDerivative parameter_derivative(const Immersion& immersion, const Point& x, int param, double h,
                                       const std::function<Mat(const Point&)>& sample);

struct MetricDefect {
    double lhs = 0.0;
    double rhs = 0.0;
    double defect = 0.0;
};

// Two-path evaluation of (nabla^t_X g)(V, V') = -(g(A_V X, V') + g(A_V' X, V)).
// `a`, `b` index the transversal sections [W | N].
MetricDefect metric_defect(const FormTable& table, const PointFrame& frame, int tangent, int a, int b);

struct MetricSummary {
    double max_metricity = 0.0;  // max |lhs|
    double max_defect = 0.0;     // max |lhs - rhs|
    double max_a_w = 0.0;
    std::vector<std::tuple<int, int, int, MetricDefect>> samples;
};

MetricSummary metric_summary(const FormTable& table, const PointFrame& frame);

struct TransversalSpace {
    Subspace t1;
    int q0 = 0;
};

TransversalSpace first_transversal(const FormTable& table, const PointFrame& frame, const Tolerances& tol = {});

// Screen-free rank of the second derivatives modulo the tangent space.
int quotient_rank(const Jet2& jet, const Tolerances& tol = {});

struct Lemma2Report {
    int dim_k = 0;
    int q0 = 0;
    int screen_dim = 0;
    double max_orthogonality = 0.0;
    bool orthogonality_ok = false;
    bool dimension_ok = false;
    bool pass = false;
};

inline constexpr double kFormTolerance = 1e-8;

Lemma2Report lemma2_check(const FormTable& table, const PointFrame& frame, const TransversalSpace& t1,
                          const Tolerances& tol = {});

struct Theorem2Report {
    int q0 = 0;
    int dim_eta = 0;          // dim of T1-perp inside the screen transversal space
    bool vacuous = false;
    bool rank_jump = false;   // q0 not constant on the 5-point stencil
    bool one_sided = false;
    double max_defect = 0.0;  // max |g(h^s(X,Y), nabla^s_Z eta)|
    bool pass = false;
};

inline constexpr double kTheorem2Tolerance = 1e-7;

Theorem2Report theorem2_check(const Immersion& immersion, const Point& base, const FrameOptions& opts = {},
                              double step = kFrameDerivativeStep);

} // namespace lightlike
