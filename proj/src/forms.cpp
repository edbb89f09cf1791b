#include "lightlike/forms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lightlike/error.hpp"

namespace lightlike {

double Table3::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

namespace {

// Tangent-frame combination of d2: sum_ab C_ai C_bj d2[a][b].
Vec tangent_second(const PointFrame& f, int i, int j) {
    const Mat& c = f.tangent_coeffs;
    const int n = static_cast<int>(c.rows());
    Vec out = Vec::Zero(f.jet.value.size());
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const double w = c(a, i) * c(b, j);
            if (w != 0.0) out += w * f.jet.d2[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        }
    return out;
}

Vec tangential_coeffs(const Decomposition& d) {
    Vec out(d.xi.size() + d.xa.size());
    out << d.xi, d.xa;
    return out;
}

Mat euclidean_projector_basis(const Mat& basis) {
    if (basis.cols() == 0) return Mat(basis.rows(), 0);
    Eigen::HouseholderQR<Mat> qr(basis);
    return qr.householderQ() * Mat::Identity(basis.rows(), basis.cols());
}

std::string where(const Point& x) {
    std::ostringstream os;
    os << "(" << x.transpose() << ")";
    return os.str();
}

} // namespace

FormTable second_fundamental(const PointFrame& f) {
    FormTable t;
    t.n = f.cls.n;
    t.r = f.r();
    t.m = f.screen_dim();
    t.h_l = Table3(t.r, t.n, t.n);
    t.h_s = Table3(t.m, t.n, t.n);
    t.nabla = Table3(t.n, t.n, t.n);
    for (int i = 0; i < t.n; ++i) {
        for (int j = 0; j < t.n; ++j) {
            const Decomposition h = decompose(tangent_second(f, i, j), f);
            for (int k = 0; k < t.r; ++k) t.h_l(k, i, j) = h.n(k);
            for (int a = 0; a < t.m; ++a) t.h_s(a, i, j) = h.w(a);
            const Decomposition d = decompose(f.jet.d2[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], f);
            const Vec tang = tangential_coeffs(d);
            for (int k = 0; k < t.n; ++k) t.nabla(k, i, j) = tang(k);
        }
    }
    return t;
}

Vec h_s_vector(const FormTable& table, const PointFrame& frame, int i, int j) {
    Vec out = Vec::Zero(frame.jet.value.size());
    for (int a = 0; a < table.m; ++a) out += table.h_s(a, i, j) * frame.w.col(a);
    return out;
}

StencilDerivative parameter_derivative(const Immersion& immersion, const Point& x, int param, double h,
                                       const std::function<Mat(const Point&)>& sample) {
    const Interval& iv = immersion.spec().domain[static_cast<std::size_t>(param)];
    auto shifted = [&](double delta) {
        Point y = x;
        y(param) += delta;
        return y;
    };
    const double xl = x(param);
    StencilDerivative out;
    if (xl - h >= iv.lo && xl + h <= iv.hi) {
        auto central = [&](double s) { return Mat((sample(shifted(s)) - sample(shifted(-s))) / (2.0 * s)); };
        out.value = (4.0 * central(0.5 * h) - central(h)) / 3.0;
        return out;
    }
    double dir = 0.0;
    if (xl + 2.0 * h <= iv.hi) dir = 1.0;
    else if (xl - 2.0 * h >= iv.lo) dir = -1.0;
    else throw NumericalError("domain interval too narrow for a derivative stencil at " + where(x), "derivative");
    out.one_sided = true;
    const Mat f0 = sample(x);
    auto one_sided = [&](double s) {
        const Mat f1 = sample(shifted(dir * s));
        const Mat f2 = sample(shifted(dir * 2.0 * s));
        return Mat(dir * (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * s));
    };
    out.value = (4.0 * one_sided(0.5 * h) - one_sided(h)) / 3.0;
    return out;
}

namespace {

struct SectionRates {
    std::vector<Mat> sections;  // per tangent direction: d/dt_i of [W | N]
    std::vector<Mat> gram;      // per tangent direction: d/dt_i of g([W|N], [W|N])
    bool one_sided = false;
};

SectionRates section_rates(const FrameField& field, double step) {
    const PointFrame& base = field.base_frame();
    const Signature& sig = base.sig;
    const int n = base.cls.n;
    const Eigen::Index dim = sig.dim();
    const Eigen::Index k = base.transversal().cols();
    auto sample = [&](const Point& y) {
        const PointFrame f = field.at(y);
        const Mat t = f.transversal();
        Mat out(dim + k, k);
        out.topRows(dim) = t;
        out.bottomRows(k) = gram(t, sig);
        return out;
    };
    std::vector<Mat> by_param;
    SectionRates rates;
    for (int l = 0; l < n; ++l) {
        StencilDerivative d = parameter_derivative(field.immersion(), field.base(), l, step, sample);
        rates.one_sided = rates.one_sided || d.one_sided;
        by_param.push_back(std::move(d.value));
    }
    const Mat& c = base.tangent_coeffs;
    for (int i = 0; i < n; ++i) {
        Mat acc = Mat::Zero(dim + k, k);
        for (int l = 0; l < n; ++l) acc += c(l, i) * by_param[static_cast<std::size_t>(l)];
        rates.sections.emplace_back(acc.topRows(dim));
        rates.gram.emplace_back(acc.bottomRows(k));
    }
    return rates;
}

} // namespace

void weingarten(const FrameField& field, FormTable& t, double step) {
    const PointFrame& f = field.base_frame();
    SectionRates rates;
    double h = step;
    while (true) {
        try {
            rates = section_rates(field, h);
            break;
        } catch (const FrozenPivotLost&) {
            h *= 0.5;
            if (h < kMinFrameDerivativeStep)
                throw NumericalError("frame is not smooth at " + where(field.base()) +
                                     ": derivative step shrank below 1e-8", "weingarten");
        }
    }
    t.step = h;
    t.one_sided = rates.one_sided;
    const int n = t.n, r = t.r, m = t.m;
    t.a_w = Table3(m, n, n);
    t.a_n = Table3(r, n, n);
    t.conn_s = Table3(n, m, m);
    t.conn_l = Table3(n, r, r);
    t.d_l = Table3(n, m, r);
    t.d_s = Table3(n, r, m);
    t.gram_rate = Table3(n, m + r, m + r);
    for (int i = 0; i < n; ++i) {
        const Mat& ds = rates.sections[static_cast<std::size_t>(i)];
        for (int a = 0; a < m + r; ++a) {
            const Decomposition d = decompose(ds.col(a), f);
            const Vec tang = tangential_coeffs(d);
            if (a < m) {
                for (int k = 0; k < n; ++k) t.a_w(a, i, k) = -tang(k);
                for (int b = 0; b < m; ++b) t.conn_s(i, a, b) = d.w(b);
                for (int k = 0; k < r; ++k) t.d_l(i, a, k) = d.n(k);
            } else {
                const int j = a - m;
                for (int k = 0; k < n; ++k) t.a_n(j, i, k) = -tang(k);
                for (int b = 0; b < m; ++b) t.d_s(i, j, b) = d.w(b);
                for (int k = 0; k < r; ++k) t.conn_l(i, j, k) = d.n(k);
            }
        }
        const Mat& g = rates.gram[static_cast<std::size_t>(i)];
        for (int a = 0; a < m + r; ++a)
            for (int b = 0; b < m + r; ++b) t.gram_rate(i, a, b) = g(a, b);
    }
    t.has_weingarten = true;
}

PointForms compute_forms(const Immersion& immersion, const Point& x, const FrameOptions& opts, double step) {
    FrameField field(immersion, x, opts);
    PointForms out{field.base_frame(), second_fundamental(field.base_frame())};
    weingarten(field, out.table, step);
    return out;
}

MetricDefect metric_defect(const FormTable& t, const PointFrame& f, int i, int a, int b) {
    if (!t.has_weingarten) throw NumericalError("metric_defect requires the Weingarten table", "metric_defect");
    const Signature& sig = f.sig;
    const int m = t.m, r = t.r, n = t.n;
    const Mat sections = f.transversal();
    auto transversal_rate = [&](int s) {
        Vec v = Vec::Zero(sig.dim());
        if (s < m) {
            for (int beta = 0; beta < m; ++beta) v += t.conn_s(i, s, beta) * f.w.col(beta);
            for (int k = 0; k < r; ++k) v += t.d_l(i, s, k) * f.nvec.col(k);
        } else {
            const int j = s - m;
            for (int beta = 0; beta < m; ++beta) v += t.d_s(i, j, beta) * f.w.col(beta);
            for (int k = 0; k < r; ++k) v += t.conn_l(i, j, k) * f.nvec.col(k);
        }
        return v;
    };
    auto shape = [&](int s) {
        Vec v = Vec::Zero(sig.dim());
        for (int k = 0; k < n; ++k)
            v += (s < m ? t.a_w(s, i, k) : t.a_n(s - m, i, k)) * f.tangent.col(k);
        return v;
    };
    const Vec va = sections.col(a);
    const Vec vb = sections.col(b);
    MetricDefect out;
    out.lhs = t.gram_rate(i, a, b) - inner(transversal_rate(a), vb, sig) - inner(va, transversal_rate(b), sig);
    out.rhs = -(inner(shape(a), vb, sig) + inner(shape(b), va, sig));
    out.defect = std::abs(out.lhs - out.rhs);
    return out;
}

MetricSummary metric_summary(const FormTable& t, const PointFrame& f) {
    MetricSummary s;
    const int k = t.m + t.r;
    for (int i = 0; i < t.n; ++i)
        for (int a = 0; a < k; ++a)
            for (int b = a; b < k; ++b) {
                const MetricDefect d = metric_defect(t, f, i, a, b);
                s.max_metricity = std::max(s.max_metricity, std::abs(d.lhs));
                s.max_defect = std::max(s.max_defect, d.defect);
                s.samples.emplace_back(i, a, b, d);
            }
    s.max_a_w = t.a_w.max_abs();
    return s;
}

TransversalSpace first_transversal(const FormTable& t, const PointFrame& f, const Tolerances& tol) {
    const Eigen::Index dim = f.jet.value.size();
    Mat cols(dim, t.n * (t.n + 1) / 2);
    Eigen::Index c = 0;
    for (int i = 0; i < t.n; ++i)
        for (int j = i; j < t.n; ++j) cols.col(c++) = h_s_vector(t, f, i, j);
    TransversalSpace out;
    out.q0 = numerical_rank(cols, tol.rank);
    if (out.q0 == 0) {
        out.t1 = Subspace(static_cast<int>(dim));
        return out;
    }
    Eigen::JacobiSVD<Mat> svd(cols, Eigen::ComputeThinU);
    out.t1 = Subspace(Mat(svd.matrixU().leftCols(out.q0)));
    return out;
}

int quotient_rank(const Jet2& jet, const Tolerances& tol) {
    const Eigen::Index n = jet.d1.cols();
    Mat stacked(jet.d1.rows(), n + n * (n + 1) / 2);
    stacked.leftCols(n) = jet.d1;
    Eigen::Index c = n;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j)
            stacked.col(c++) = jet.d2[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return numerical_rank(stacked, tol.rank) - static_cast<int>(n);
}

namespace {

// Basis (ambient) of {w in span W : g(w, t) = 0 for all t in T1}.
Mat perp_in_screen(const PointFrame& f, const TransversalSpace& t1, const Tolerances& tol) {
    if (f.screen_dim() == 0) return Mat(f.sig.dim(), 0);
    if (t1.q0 == 0) return f.w;
    const Mat rows = gram(t1.t1.basis(), f.w, f.sig);  // q0 x m
    return f.w * null_space(rows, tol.rank).basis();
}

} // namespace

Lemma2Report lemma2_check(const FormTable& t, const PointFrame& f, const TransversalSpace& t1, const Tolerances& tol) {
    if (!t.has_weingarten) throw NumericalError("lemma2_check requires the Weingarten table", "lemma2");
    Lemma2Report rep;
    rep.q0 = t1.q0;
    rep.screen_dim = t.m;
    Mat k_ambient(f.sig.dim(), 0);
    if (t.m > 0) {
        if (t.r == 0) {
            k_ambient = f.w;
        } else {
            Mat rows(t.n * t.r, t.m);
            for (int i = 0; i < t.n; ++i)
                for (int k = 0; k < t.r; ++k)
                    for (int a = 0; a < t.m; ++a) rows(i * t.r + k, a) = t.d_l(i, a, k);
            k_ambient = f.w * null_space(rows, tol.rank).basis();
        }
    }
    rep.dim_k = static_cast<int>(k_ambient.cols());
    for (Eigen::Index c = 0; c < k_ambient.cols(); ++c) {
        const Vec kv = k_ambient.col(c).normalized();
        for (int i = 0; i < t.n; ++i)
            for (int j = i; j < t.n; ++j)
                rep.max_orthogonality = std::max(rep.max_orthogonality, std::abs(inner(h_s_vector(t, f, i, j), kv, f.sig)));
    }
    rep.orthogonality_ok = rep.max_orthogonality <= kFormTolerance;
    rep.dimension_ok = rep.dim_k + rep.q0 == rep.screen_dim;
    rep.pass = rep.orthogonality_ok && rep.dimension_ok;
    return rep;
}

Theorem2Report theorem2_check(const Immersion& immersion, const Point& base, const FrameOptions& opts, double step) {
    const FrameField field(immersion, base, opts);
    const PointFrame& f0 = field.base_frame();
    const FormTable tab0 = second_fundamental(f0);
    const TransversalSpace t1 = first_transversal(tab0, f0, opts.tol);
    const int n = f0.cls.n;

    Theorem2Report rep;
    rep.q0 = t1.q0;
    Mat eta0 = perp_in_screen(f0, t1, opts.tol);
    for (Eigen::Index c = 0; c < eta0.cols(); ++c) eta0.col(c).normalize();
    rep.dim_eta = static_cast<int>(eta0.cols());
    rep.vacuous = rep.dim_eta == 0;

    bool jump = false;
    auto rank_at = [&](const PointFrame& f) { return first_transversal(second_fundamental(f), f, opts.tol).q0; };
    auto eta_at = [&](const Point& y) {
        const PointFrame f = field.at(y);
        const TransversalSpace ty = first_transversal(second_fundamental(f), f, opts.tol);
        if (ty.q0 != t1.q0) jump = true;
        const Mat q = euclidean_projector_basis(perp_in_screen(f, ty, opts.tol));
        return Mat(q * (q.transpose() * eta0));
    };

    double h = step;
    while (true) {
        try {
            jump = false;
            // 5-point stencil rank check (one-sided where the boundary intervenes)
            for (int l = 0; l < n; ++l) {
                const Interval& iv = immersion.spec().domain[static_cast<std::size_t>(l)];
                for (double s : {-h, h}) {
                    Point y = base;
                    y(l) += s;
                    if (y(l) < iv.lo || y(l) > iv.hi) y(l) = base(l) - 2.0 * s;
                    if (rank_at(field.at(y)) != t1.q0) jump = true;
                }
            }
            double worst = 0.0;
            if (!rep.vacuous) {
                std::vector<Mat> by_param;
                for (int l = 0; l < n; ++l) {
                    StencilDerivative d = parameter_derivative(immersion, base, l, h, eta_at);
                    rep.one_sided = rep.one_sided || d.one_sided;
                    by_param.push_back(std::move(d.value));
                }
                for (int z = 0; z < n; ++z) {
                    Mat rate = Mat::Zero(eta0.rows(), eta0.cols());
                    for (int l = 0; l < n; ++l) rate += f0.tangent_coeffs(l, z) * by_param[static_cast<std::size_t>(l)];
                    for (Eigen::Index e = 0; e < rate.cols(); ++e) {
                        const Decomposition d = decompose(rate.col(e), f0);
                        const Vec screen_part = f0.w * d.w;
                        for (int i = 0; i < n; ++i)
                            for (int j = i; j < n; ++j)
                                worst = std::max(worst, std::abs(inner(h_s_vector(tab0, f0, i, j), screen_part, f0.sig)));
                    }
                }
            }
            rep.max_defect = worst;
            break;
        } catch (const FrozenPivotLost&) {
            h *= 0.5;
            if (h < kMinFrameDerivativeStep)
                throw NumericalError("frame is not smooth at " + where(base) + ": derivative step shrank below 1e-8",
                                     "theorem2");
        }
    }
    rep.rank_jump = jump;
    rep.pass = !rep.rank_jump && rep.max_defect <= kTheorem2Tolerance;
    return rep;
}

} // namespace lightlike
