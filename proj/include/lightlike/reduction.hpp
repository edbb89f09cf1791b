#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lightlike/forms.hpp"

namespace lightlike {

inline constexpr int kScanPerParam = 7;
inline constexpr int kVerifyPerParam = 13;
inline constexpr double kGridInset = 0.01;
inline constexpr double kMaxFailureFraction = 0.2;

// Tensor grid with `per_param` uniform points per parameter; each interval is
// shrunk by inset * length at both ends. Last parameter varies fastest.
std::vector<Point> make_grid(const ImmersionSpec& spec, int per_param, double inset = kGridInset);

Point domain_center(const ImmersionSpec& spec);

struct PointReport {
    Point x;
    bool ok = false;
    std::string error;
    std::string stage;

    PointClassification cls;
    int q0 = 0;
    int quotient_rank = 0;
    double a1 = 0.0;
    double max_h = 0.0;        // largest |h^l|, |h^s| coefficient
    double max_d_l = 0.0;
    double metricity = 0.0;    // max |lhs| of the metricity identity
    double metric_defect = 0.0;
    double max_a_w = 0.0;
    bool totally_geodesic = false;
    bool one_sided = false;
    double step = 0.0;
};

struct MetricSample {
    int point = -1;
    int tangent = 0, a = 0, b = 0;
    MetricDefect value;
};

struct HypothesisReport {
    std::vector<PointReport> points;
    int failures = 0;
    bool all_isotropic = false;
    bool constant_rank = false;
    int q = -1;  // common q0 when constant_rank
    bool metric_connection = false;
    bool one_regular = false;
    double max_metricity = 0.0;
    double max_defect = 0.0;
    MetricSample worst;  // sample attaining max_metricity
};

// Per-point failures (NumericalError) are recorded and skipped; more than 20%
// failures aborts with NumericalError.
HypothesisReport scan(const Immersion& immersion, const std::vector<Point>& grid, const FrameOptions& opts = {});

struct CurvedResult {
    double c = 0.0;
    double quadric_residual = 0.0;  // max |g(f,f) - 1/c| on the verification grid
    double tangent_residual = 0.0;  // max |g(df, f)|
    double lift_residual = 0.0;     // flat T1 against the quadric T1 + span{f}
    bool lifted = false;
};

struct ReductionResult {
    Point base;
    Subspace v0;
    int dim = 0;
    int expected_dim = -1;  // n + q when the rank is constant
    double residual = 0.0;  // max containment residual on the verification grid
    bool containment = false;
    bool verdict = false;
    int verify_per_param = kVerifyPerParam;
    std::optional<CurvedResult> curved;
};

// V0 = span(df(x0)) + T1(x0); containment of f(x) - f(x0) on the verification grid.
ReductionResult reduce_flat(const Immersion& immersion, const HypothesisReport& report, const Point& x0,
                            const FrameOptions& opts = {}, int verify_per_param = kVerifyPerParam);

// Max |g(f,f) - 1/c| over the grid; throws InputError above tol.contain.
double check_quadric(const Immersion& immersion, const Tolerances& tol = {}, int per_param = kVerifyPerParam);

// Curved ambient: f is given in the enclosing flat space of the quadric
// g(x,x) = 1/c. Runs the flat pipeline with V0 enlarged by f(x0) and checks
// the lift relation at every scan point.
ReductionResult analyze_curved(const Immersion& immersion, const HypothesisReport& report, const Point& x0,
                               const FrameOptions& opts = {}, int verify_per_param = kVerifyPerParam);

struct AffineSpan {
    int dim = 0;
    Mat basis;  // ambient x dim, orthonormal (Euclidean)
    int samples = 0;
    Point base;
};

// Rank of {f(x_k) - f(x0)} over Halton samples of the domain (x0 = center).
AffineSpan affine_span_oracle(const Immersion& immersion, int samples, std::uint64_t seed = 0,
                              double tol_rank = Tolerances{}.rank);

// Human-readable notes about hypothesis/rank conflicts; empty when there are none.
std::vector<std::string> reduction_warnings(const Immersion& immersion, const HypothesisReport& report,
                                            const std::optional<ReductionResult>& reduction,
                                            const std::optional<AffineSpan>& oracle);

} // namespace lightlike
