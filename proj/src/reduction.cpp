#include "lightlike/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lightlike/error.hpp"

namespace lightlike {

namespace {

std::string fmt_point(const Point& x) {
    std::ostringstream os;
    os << "(";
    for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x(i);
    os << ")";
    return os.str();
}

double radical_inverse(std::uint64_t index, int base) {
    double inv = 1.0 / base, f = inv, out = 0.0;
    while (index > 0) {
        out += static_cast<double>(index % static_cast<std::uint64_t>(base)) * f;
        index /= static_cast<std::uint64_t>(base);
        f *= inv;
    }
    return out;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

double max_abs(const Table3& t) { return t.max_abs(); }

Mat first_transversal_basis(const Immersion& immersion, const Point& x, const FrameOptions& opts) {
    const PointFrame f = build_frame(immersion.jet(x), immersion.signature(), opts);
    return first_transversal(second_fundamental(f), f, opts.tol).t1.basis();
}

} // namespace

std::vector<Point> make_grid(const ImmersionSpec& spec, int per_param, double inset) {
    if (per_param < 1) throw InputError("grid needs at least one point per parameter");
    const int n = spec.n();
    std::vector<std::vector<double>> axes(static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l) {
        const Interval& iv = spec.domain[static_cast<std::size_t>(l)];
        const double lo = iv.lo + inset * iv.length();
        const double hi = iv.hi - inset * iv.length();
        auto& ax = axes[static_cast<std::size_t>(l)];
        if (per_param == 1) {
            ax.push_back(iv.mid());
        } else {
            for (int k = 0; k < per_param; ++k)
                ax.push_back(k == per_param - 1 ? hi : lo + (hi - lo) * k / (per_param - 1));
        }
    }
    std::vector<Point> out;
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    while (true) {
        Point x(n);
        for (int l = 0; l < n; ++l) x(l) = axes[static_cast<std::size_t>(l)][static_cast<std::size_t>(idx[static_cast<std::size_t>(l)])];
        out.push_back(std::move(x));
        int l = n - 1;
        while (l >= 0 && ++idx[static_cast<std::size_t>(l)] == per_param) idx[static_cast<std::size_t>(l--)] = 0;
        if (l < 0) break;
    }
    return out;
}

Point domain_center(const ImmersionSpec& spec) {
    Point x(spec.n());
    for (int l = 0; l < spec.n(); ++l) x(l) = spec.domain[static_cast<std::size_t>(l)].mid();
    return x;
}

HypothesisReport scan(const Immersion& immersion, const std::vector<Point>& grid, const FrameOptions& opts) {
    HypothesisReport rep;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        PointReport pr;
        pr.x = grid[k];
        try {
            const PointForms pf = compute_forms(immersion, pr.x, opts);
            const FormTable& t = pf.table;
            pr.cls = pf.frame.cls;
            pr.a1 = a1_residuals(pf.frame).max();
            pr.q0 = first_transversal(t, pf.frame, opts.tol).q0;
            pr.quotient_rank = quotient_rank(pf.frame.jet, opts.tol);
            pr.max_h = std::max(max_abs(t.h_l), max_abs(t.h_s));
            pr.max_d_l = max_abs(t.d_l);
            pr.totally_geodesic = pr.max_h <= kFormTolerance;
            pr.one_sided = t.one_sided;
            pr.step = t.step;
            const MetricSummary ms = metric_summary(t, pf.frame);
            pr.metricity = ms.max_metricity;
            pr.metric_defect = ms.max_defect;
            pr.max_a_w = ms.max_a_w;
            for (const auto& [i, a, b, d] : ms.samples) {
                if (rep.worst.point < 0 || std::abs(d.lhs) > std::abs(rep.worst.value.lhs)) {
                    rep.worst = MetricSample{static_cast<int>(k), i, a, b, d};
                }
            }
            pr.ok = true;
        } catch (const NumericalError& e) {
            pr.error = e.what();
            pr.stage = e.stage();
            ++rep.failures;
        }
        rep.points.push_back(std::move(pr));
    }
    if (grid.empty()) throw InputError("scan: empty grid");
    if (rep.failures > kMaxFailureFraction * static_cast<double>(grid.size())) {
        std::string first;
        for (const auto& p : rep.points)
            if (!p.ok) { first = p.error; break; }
        throw NumericalError("scan: " + std::to_string(rep.failures) + " of " + std::to_string(grid.size()) +
                             " points failed; first failure: " + first, "scan");
    }
    bool any = false;
    rep.all_isotropic = true;
    rep.constant_rank = true;
    for (const auto& p : rep.points) {
        if (!p.ok) continue;
        if (!any) rep.q = p.q0;
        any = true;
        rep.all_isotropic = rep.all_isotropic && p.cls.is_isotropic;
        if (p.q0 != rep.q) rep.constant_rank = false;
        rep.max_metricity = std::max(rep.max_metricity, p.metricity);
        rep.max_defect = std::max(rep.max_defect, p.metric_defect);
    }
    if (!rep.constant_rank) rep.q = -1;
    rep.metric_connection = rep.max_metricity <= opts.tol.metric;
    rep.one_regular = rep.constant_rank;
    return rep;
}

ReductionResult reduce_flat(const Immersion& immersion, const HypothesisReport& report, const Point& x0,
                            const FrameOptions& opts, int verify_per_param) {
    const Tolerances& tol = opts.tol;
    ReductionResult res;
    res.base = x0;
    res.verify_per_param = verify_per_param;
    const Jet2 j0 = immersion.jet(x0);
    const Mat t1 = first_transversal_basis(immersion, x0, opts);
    Mat gens(j0.d1.rows(), j0.d1.cols() + t1.cols());
    gens << j0.d1, t1;
    res.v0 = Subspace::span_of(gens, tol.rank);
    res.dim = res.v0.dim();
    if (res.dim != gens.cols())
        throw NumericalError("rank deficiency assembling V0 at " + fmt_point(x0) + ": dimension " +
                             std::to_string(res.dim) + ", expected " + std::to_string(gens.cols()), "reduce");
    if (report.constant_rank) res.expected_dim = immersion.n() + report.q;
    for (const Point& x : make_grid(immersion.spec(), verify_per_param, 0.0))
        res.residual = std::max(res.residual, contains(res.v0, immersion.value(x) - j0.value, tol.contain).residual);
    res.containment = res.residual <= tol.contain;
    res.verdict = res.containment && report.metric_connection && report.constant_rank && report.all_isotropic;
    return res;
}

double check_quadric(const Immersion& immersion, const Tolerances& tol, int per_param) {
    const double c = immersion.spec().curvature;
    if (c == 0.0) throw InputError("quadric check requires a nonzero curvature");
    const Signature& sig = immersion.signature();
    double worst = -1.0;
    Point at;
    for (const Point& x : make_grid(immersion.spec(), per_param, 0.0)) {
        const Vec f = immersion.value(x);
        const double r = std::abs(inner(f, f, sig) - 1.0 / c);
        if (!(r <= worst)) {
            worst = r;
            at = x;
        }
    }
    if (!(worst <= tol.contain)) {
        std::ostringstream os;
        os << "quadric constraint violated: |g(f,f) - 1/c| = " << worst << " at " << fmt_point(at)
           << " (c = " << c << ")";
        throw InputError(os.str());
    }
    return worst;
}

ReductionResult analyze_curved(const Immersion& immersion, const HypothesisReport& report, const Point& x0,
                               const FrameOptions& opts, int verify_per_param) {
    const Tolerances& tol = opts.tol;
    const double c = immersion.spec().curvature;
    const Signature& sig = immersion.signature();
    CurvedResult cr;
    cr.c = c;
    cr.quadric_residual = check_quadric(immersion, tol, verify_per_param);

    ReductionResult res;
    res.base = x0;
    res.verify_per_param = verify_per_param;
    const Jet2 j0 = immersion.jet(x0);
    const Mat t1 = first_transversal_basis(immersion, x0, opts);
    Mat gens(j0.d1.rows(), j0.d1.cols() + t1.cols() + 1);
    gens << j0.d1, t1, j0.value;
    res.v0 = Subspace::span_of(gens, tol.rank);
    res.dim = res.v0.dim();
    if (res.dim != gens.cols())
        throw NumericalError("rank deficiency assembling V0 at " + fmt_point(x0), "reduce");
    if (report.constant_rank) res.expected_dim = immersion.n() + report.q + 1;

    for (const Point& x : make_grid(immersion.spec(), verify_per_param, 0.0)) {
        const Jet2 j = immersion.jet(x);
        res.residual = std::max(res.residual, contains(res.v0, j.value, tol.contain).residual);
        for (Eigen::Index i = 0; i < j.d1.cols(); ++i)
            cr.tangent_residual = std::max(cr.tangent_residual, std::abs(inner(j.d1.col(i), j.value, sig)));
    }

    // quadric-intrinsic T1: second derivatives projected onto the quadric's tangent space
    for (const PointReport& p : report.points) {
        if (!p.ok) continue;
        const Jet2 j = immersion.jet(p.x);
        const Mat flat_t1 = first_transversal_basis(immersion, p.x, opts);
        if (flat_t1.cols() == 0) continue;
        const int n = immersion.n();
        Mat span(j.value.size(), n + n * (n + 1) / 2 + 1);
        span.leftCols(n) = j.d1;
        Eigen::Index col = n;
        for (int a = 0; a < n; ++a)
            for (int b = a; b < n; ++b) {
                const Vec& d2 = j.d2[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
                span.col(col++) = d2 - c * inner(d2, j.value, sig) * j.value;
            }
        span.col(col) = j.value;
        const Subspace target = Subspace::span_of(span, tol.rank);
        cr.lift_residual = std::max(cr.lift_residual, containment_residual(target, Subspace(flat_t1)));
    }
    cr.lifted = cr.lift_residual <= tol.contain && cr.tangent_residual <= 1e-9;
    res.containment = res.residual <= tol.contain;
    res.verdict = res.containment && report.metric_connection && report.constant_rank && report.all_isotropic &&
                  cr.lifted;
    res.curved = cr;
    return res;
}

AffineSpan affine_span_oracle(const Immersion& immersion, int samples, std::uint64_t seed, double tol_rank) {
    const ImmersionSpec& spec = immersion.spec();
    const int n = spec.n();
    if (n > static_cast<int>(std::size(kPrimes))) throw InputError("affine span oracle supports at most 16 parameters");
    AffineSpan out;
    out.samples = std::max(samples, 4 * spec.ambient_dim());
    out.base = domain_center(spec);
    const Vec f0 = immersion.value(out.base);
    Mat diffs(f0.size(), out.samples);
    for (int k = 0; k < out.samples; ++k) {
        Point x(n);
        for (int l = 0; l < n; ++l) {
            const Interval& iv = spec.domain[static_cast<std::size_t>(l)];
            x(l) = iv.lo + iv.length() * radical_inverse(seed + static_cast<std::uint64_t>(k) + 1, kPrimes[l]);
        }
        diffs.col(k) = immersion.value(x) - f0;
    }
    out.dim = numerical_rank(diffs, tol_rank);
    Eigen::JacobiSVD<Mat> svd(diffs, Eigen::ComputeThinU);
    out.basis = svd.matrixU().leftCols(out.dim);
    return out;
}

std::vector<std::string> reduction_warnings(const Immersion& immersion, const HypothesisReport& report,
                                            const std::optional<ReductionResult>& reduction,
                                            const std::optional<AffineSpan>& oracle) {
    std::vector<std::string> out;
    const int n = immersion.n();
    if (!report.all_isotropic)
        out.push_back("non-isotropic points detected (screen distribution S(TM) is nonzero); "
                      "they are classified but the reduction pipeline assumes isotropy");
    for (const auto& p : report.points)
        if (p.ok && p.cls.trivial_screen_transversal) {
            out.push_back("isotropic with n = p: the screen transversal bundle is trivial (outside the n < p setting), T1 = 0");
            break;
        }
    if (report.constant_rank) {
        const int target = n + report.q + (immersion.spec().curvature != 0.0 ? 1 : 0);
        std::vector<std::string> why;
        if (!report.metric_connection) {
            std::ostringstream os;
            os << "the transversal connection is not metric (max metricity " << report.max_metricity << ")";
            why.push_back(os.str());
        }
        if (oracle && oracle->dim > target)
            why.push_back("the affine span of f has dimension " + std::to_string(oracle->dim) + " > " +
                          std::to_string(target));
        if (reduction && !reduction->containment) {
            std::ostringstream os;
            os << "f is not contained in V0 (residual " << reduction->residual << ")";
            why.push_back(os.str());
        }
        if (!why.empty()) {
            std::string msg = "rank/reduction conflict: T1 has constant rank q = " + std::to_string(report.q) +
                              ", which by the rank criterion alone would suggest a reduction of codimension to " +
                              std::to_string(report.q) + ", but ";
            for (std::size_t k = 0; k < why.size(); ++k) msg += (k ? "; " : "") + why[k];
            msg += "; no reduction is claimed";
            out.push_back(msg);
        }
    }
    if (report.failures > 0)
        out.push_back(std::to_string(report.failures) + " grid point(s) failed and were skipped");
    return out;
}

} // namespace lightlike
