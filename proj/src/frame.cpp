#include "lightlike/frame.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lightlike/error.hpp"

namespace lightlike {

namespace {

Mat hcat(std::initializer_list<const Mat*> parts, Eigen::Index rows) {
    Eigen::Index cols = 0;
    for (const Mat* m : parts) cols += m->cols();
    Mat out(rows, cols);
    Eigen::Index at = 0;
    for (const Mat* m : parts) {
        if (m->cols() == 0) continue;
        out.middleCols(at, m->cols()) = *m;
        at += m->cols();
    }
    return out;
}

Mat select_columns(const Mat& m, const std::vector<int>& idx) {
    Mat out(m.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = m.col(idx[k]);
    return out;
}

int decide(PivotLog* log, int computed, bool must_match = false) {
    return log ? log->decide(computed, must_match) : computed;
}

std::string where(const Jet2& jet) {
    std::ostringstream os;
    os << "(" << jet.point.transpose() << ")";
    return os.str();
}

} // namespace

Mat PointFrame::transversal() const { return hcat({&w, &nvec}, jet.value.size()); }

Mat PointFrame::all() const { return hcat({&xi, &xa, &w, &nvec}, jet.value.size()); }

PointClassification classify(const Jet2& jet, const Signature& sig, const Tolerances& tol) {
    const int n = static_cast<int>(jet.d1.cols());
    if (jet.d1.rows() != sig.dim()) throw InputError("classify: jet dimension does not match signature");
    if (numerical_rank(jet.d1, tol.rank) < n)
        throw NumericalError("not an immersion at " + where(jet) + ": tangent vectors are linearly dependent",
                             "classify");
    PointClassification c;
    c.n = n;
    c.p = sig.dim() - n;
    c.rad_rank = n - numerical_rank(gram(jet.d1, sig), tol.rank);
    c.is_isotropic = c.rad_rank == n;
    c.is_nondegenerate = c.rad_rank == 0;
    c.screen_tangent_dim = n - c.rad_rank;
    c.trivial_screen_transversal = c.is_isotropic && c.n == c.p;
    return c;
}

PointFrame build_frame(const Jet2& jet, const Signature& sig, const FrameOptions& opts, PivotLog* log) {
    const Tolerances& tol = opts.tol;
    PointFrame f;
    f.jet = jet;
    f.sig = sig;
    f.cls = classify(jet, sig, tol);
    decide(log, f.cls.rad_rank, true);
    const int n = f.cls.n;
    const int dim = sig.dim();
    const Mat& d1 = jet.d1;

    // (1) TM-perp and the radical
    f.tm_perp = null_space((sig.diagonal().asDiagonal() * d1).transpose(), tol.rank, log);
    const Mat rad_coeffs = radical_coefficients(d1, sig, tol.rank, log);
    f.xi = d1 * rad_coeffs;
    const int r = static_cast<int>(f.xi.cols());
    if (r != f.cls.rad_rank) throw FrozenPivotLost("radical rank changed at " + where(jet));

    // (2) screen distribution S(TM)
    if (r < n) {
        const std::vector<int> pick = select_complement(f.xi, d1, n - r, tol.rank, log);
        if (static_cast<int>(pick.size()) != n - r)
            throw NumericalError("screen distribution selection failed at " + where(jet), "build_frame");
        IndefiniteBasis ob = orthonormalize_indefinite(select_columns(d1, pick), sig, tol.null, log);
        f.xa = std::move(ob.basis);
        f.xa_eps = std::move(ob.signs);
    } else {
        f.xa = Mat(dim, 0);
    }

    // (3) screen transversal bundle S(TM-perp)
    const int screen_dim = f.tm_perp.dim() - r;
    std::vector<Vec> chosen;
    if (screen_dim > 0) {
        Mat fixed = f.xi;
        int remaining = screen_dim;
        const bool seed_with_d2 =
            decide(log, opts.screen == ScreenOrder::standard && f.cls.is_isotropic ? 1 : 0) == 1;
        if (seed_with_d2) {
            // second derivatives, projected onto TM-perp (a no-op when isotropic on an open set)
            Eigen::HouseholderQR<Mat> qr(f.tm_perp.basis());
            const Mat q = qr.householderQ() * Mat::Identity(dim, f.tm_perp.dim());
            Mat d2cols(dim, n * (n + 1) / 2);
            Eigen::Index c = 0;
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    const Vec& d = jet.d2[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                    d2cols.col(c++) = q * (q.transpose() * d);
                }
            const std::vector<int> pick = select_complement(fixed, d2cols, remaining, tol.rank, log);
            for (int k : pick) chosen.emplace_back(d2cols.col(k));
            remaining -= static_cast<int>(pick.size());
            fixed.conservativeResize(Eigen::NoChange, fixed.cols() + static_cast<Eigen::Index>(pick.size()));
            for (std::size_t k = 0; k < pick.size(); ++k)
                fixed.col(r + static_cast<Eigen::Index>(k)) = d2cols.col(pick[k]);
        }
        if (remaining > 0) {
            const Mat& basis = f.tm_perp.basis();
            std::vector<int> pick;
            if (opts.screen == ScreenOrder::standard) {
                pick = select_complement(fixed, basis, remaining, tol.rank, log);
            } else {
                // first independent candidates in reverse basis order, no pivoting
                for (Eigen::Index k = basis.cols() - 1; k >= 0 && static_cast<int>(pick.size()) < remaining; --k) {
                    if (select_complement(fixed, basis.col(k), 1, tol.rank, log).empty()) continue;
                    pick.push_back(static_cast<int>(k));
                    fixed.conservativeResize(Eigen::NoChange, fixed.cols() + 1);
                    fixed.col(fixed.cols() - 1) = basis.col(k);
                }
            }
            if (static_cast<int>(pick.size()) != remaining)
                throw NumericalError("screen transversal selection failed at " + where(jet), "build_frame");
            for (int k : pick) chosen.emplace_back(basis.col(k));
        }
    }
    Mat screen(dim, static_cast<Eigen::Index>(chosen.size()));
    for (std::size_t k = 0; k < chosen.size(); ++k) screen.col(static_cast<Eigen::Index>(k)) = chosen[k];
    {
        IndefiniteBasis ob = orthonormalize_indefinite(screen, sig, tol.null, log);
        f.w = std::move(ob.basis);
        f.w_eps = std::move(ob.signs);
    }

    // (4) lightlike transversal bundle: minimal-norm solutions of g(V_i, xi_j) = delta_ij
    // inside the complement of the screens, corrected to be null
    if (r > 0) {
        const Mat screens = hcat({&f.w, &f.xa}, dim);
        const Subspace e = orthogonal_complement(Subspace(screens), sig, tol.rank, log);
        if (e.dim() != 2 * r)
            throw NumericalError("complement of the screens has dimension " + std::to_string(e.dim()) +
                                 ", expected " + std::to_string(2 * r) + " at " + where(jet), "build_frame");
        Eigen::HouseholderQR<Mat> qr(e.basis());
        const Mat q = qr.householderQ() * Mat::Identity(dim, e.dim());
        const Mat a = gram(f.xi, q, sig);  // r x 2r
        const Mat aat = a * a.transpose();
        Eigen::FullPivLU<Mat> lu(aat);
        if (!lu.isInvertible())
            throw NumericalError("lightlike transversal system is not solvable at " + where(jet), "build_frame");
        const Mat v = q * (a.transpose() * lu.inverse());
        const Mat b = gram(v, sig);
        f.nvec = v - 0.5 * f.xi * b;
    } else {
        f.nvec = Mat(dim, 0);
    }

    f.tangent = hcat({&f.xi, &f.xa}, dim);
    f.tangent_coeffs = d1.colPivHouseholderQr().solve(f.tangent);

    const double worst = a1_residuals(f).max();
    if (!(worst <= 1e-8))
        throw NumericalError("inconsistent quasi-orthonormal frame at " + where(jet) + " (residual " +
                             std::to_string(worst) + ")", "build_frame");
    return f;
}

Decomposition decompose(const Vec& v, const PointFrame& f) {
    const Signature& sig = f.sig;
    Decomposition d;
    d.xi = gram(f.nvec, v, sig);
    d.n = gram(f.xi, v, sig);
    d.w = gram(f.w, v, sig);
    for (Eigen::Index k = 0; k < d.w.size(); ++k) d.w(k) *= f.w_eps[static_cast<std::size_t>(k)];
    d.xa = gram(f.xa, v, sig);
    for (Eigen::Index k = 0; k < d.xa.size(); ++k) d.xa(k) *= f.xa_eps[static_cast<std::size_t>(k)];
    return d;
}

Vec recompose(const Decomposition& d, const PointFrame& f) {
    return f.xi * d.xi + f.xa * d.xa + f.w * d.w + f.nvec * d.n;
}

double A1Residuals::max() const {
    return std::max({xi_xi, w_w, w_xi, n_n, n_xi, n_w, n_xa, xa_xa, xa_rest});
}

A1Residuals a1_residuals(const PointFrame& f) {
    const Signature& sig = f.sig;
    auto maxabs = [](const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; };
    auto signed_identity = [](const std::vector<int>& eps) {
        Mat m = Mat::Zero(static_cast<Eigen::Index>(eps.size()), static_cast<Eigen::Index>(eps.size()));
        for (std::size_t k = 0; k < eps.size(); ++k) m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = eps[k];
        return m;
    };
    A1Residuals res;
    const Eigen::Index r = f.xi.cols();
    res.xi_xi = maxabs(gram(f.xi, sig));
    res.w_w = maxabs(gram(f.w, sig) - signed_identity(f.w_eps));
    res.w_xi = maxabs(gram(f.w, f.xi, sig));
    res.n_n = maxabs(gram(f.nvec, sig));
    res.n_xi = maxabs(gram(f.nvec, f.xi, sig) - Mat::Identity(r, r));
    res.n_w = maxabs(gram(f.nvec, f.w, sig));
    res.n_xa = maxabs(gram(f.nvec, f.xa, sig));
    res.xa_xa = maxabs(gram(f.xa, sig) - signed_identity(f.xa_eps));
    res.xa_rest = std::max(maxabs(gram(f.xa, f.xi, sig)), maxabs(gram(f.xa, f.w, sig)));
    return res;
}

FrameField::FrameField(const Immersion& immersion, Point base, FrameOptions opts)
    : immersion_(&immersion), base_(std::move(base)), opts_(opts) {
    base_frame_ = build_frame(immersion_->jet(base_), immersion_->signature(), opts_, &log_);
}

PointFrame FrameField::at(const Point& target) const {
    PivotLog replay = log_.replay();
    PointFrame f = build_frame(immersion_->jet(target), immersion_->signature(), opts_, &replay);
    if (replay.size() != log_.size()) throw FrozenPivotLost("frozen construction diverged at target point");
    return f;
}

PointFrame frame_field(const Immersion& immersion, const Point& base, const Point& target, const FrameOptions& opts) {
    if (base.size() != target.size() || (target - base).cwiseAbs().maxCoeff() > kFrameStepRadius)
        throw InputError("frame_field: target lies outside the step radius of the base point");
    return FrameField(immersion, base, opts).at(target);
}

} // namespace lightlike
