#include "lightlike/indef.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lightlike/error.hpp"

namespace lightlike {

Vec Signature::diagonal() const {
    Vec d(dim());
    for (int k = 0; k < dim(); ++k) d(k) = eps(k);
    return d;
}

PivotLog PivotLog::replay() const {
    PivotLog out;
    out.mode_ = Mode::replay;
    out.choices_ = choices_;
    out.cursor_ = 0;
    return out;
}

int PivotLog::next_stored(const char* what) {
    if (cursor_ >= choices_.size())
        throw FrozenPivotLost(std::string("frozen construction diverged: no recorded ") + what);
    return choices_[cursor_++];
}

int PivotLog::pick(std::span<const double> magnitudes, double floor) {
    if (mode_ == Mode::replay) {
        const int idx = next_stored("pivot");
        if (idx < 0 || static_cast<std::size_t>(idx) >= magnitudes.size() || !(magnitudes[idx] > floor))
            throw FrozenPivotLost("frozen pivot lost rank at target point");
        return idx;
    }
    int best = -1;
    double best_mag = -1.0;
    for (std::size_t i = 0; i < magnitudes.size(); ++i) {
        if (magnitudes[i] > best_mag) {
            best_mag = magnitudes[i];
            best = static_cast<int>(i);
        }
    }
    choices_.push_back(best);
    return best;
}

int PivotLog::decide(int computed, bool must_match) {
    if (mode_ == Mode::replay) {
        const int stored = next_stored("decision");
        if (must_match && stored != computed)
            throw FrozenPivotLost("frozen construction changed a discrete decision at target point");
        return stored;
    }
    choices_.push_back(computed);
    return computed;
}

namespace {

int record_or_replay_pick(PivotLog* log, std::span<const double> mags, double floor) {
    if (log) return log->pick(mags, floor);
    PivotLog scratch;
    return scratch.pick(mags, floor);
}

int record_or_replay_decide(PivotLog* log, int computed, bool must_match = false) {
    return log ? log->decide(computed, must_match) : computed;
}

} // namespace

Subspace Subspace::whole(int ambient_dim) { return Subspace(Mat::Identity(ambient_dim, ambient_dim)); }

Subspace Subspace::span_of(const Mat& columns, double tol_rank, PivotLog* log) {
    const Mat fixed(columns.rows(), 0);
    const std::vector<int> picked = select_complement(fixed, columns, static_cast<int>(columns.cols()), tol_rank, log);
    Mat basis(columns.rows(), static_cast<Eigen::Index>(picked.size()));
    for (std::size_t k = 0; k < picked.size(); ++k) basis.col(static_cast<Eigen::Index>(k)) = columns.col(picked[k]);
    return Subspace(std::move(basis));
}

double inner(const Vec& u, const Vec& v, const Signature& sig) {
    if (u.size() != sig.dim() || v.size() != sig.dim())
        throw InputError("inner: dimension mismatch with signature");
    double s = 0.0;
    for (int k = 0; k < sig.dim(); ++k) s += sig.eps(k) * u(k) * v(k);
    return s;
}

Mat gram(const Mat& a, const Mat& b, const Signature& sig) {
    return a.transpose() * sig.diagonal().asDiagonal() * b;
}

Mat gram(const Mat& a, const Signature& sig) { return gram(a, a, sig); }

int numerical_rank(const Mat& m, double tol_rank) {
    if (m.rows() == 0 || m.cols() == 0) return 0;
    Eigen::JacobiSVD<Mat> svd(m);
    const Vec& s = svd.singularValues();
    const double thresh = tol_rank * std::max(s.size() ? s(0) : 0.0, 1.0);
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > thresh) ++r;
    return r;
}

Subspace null_space(const Mat& rows, double tol_rank, PivotLog* log) {
    const Eigen::Index m = rows.rows();
    const Eigen::Index n = rows.cols();
    const int rank = record_or_replay_decide(log, numerical_rank(rows, tol_rank));
    Mat a = rows;
    const double scale = std::max(1.0, m && n ? rows.cwiseAbs().maxCoeff() : 0.0);
    const double floor = tol_rank * scale;

    std::vector<int> pivot_col;
    std::vector<bool> col_used(static_cast<std::size_t>(n), false);
    std::vector<double> mags(static_cast<std::size_t>(m * n));
    for (int s = 0; s < rank; ++s) {
        // column-major flattening: ties resolve to the lowest column, then row
        for (Eigen::Index c = 0; c < n; ++c)
            for (Eigen::Index r = 0; r < m; ++r)
                mags[static_cast<std::size_t>(c * m + r)] =
                    (r >= s && !col_used[static_cast<std::size_t>(c)]) ? std::abs(a(r, c)) : -1.0;
        const int flat = record_or_replay_pick(log, mags, floor);
        const Eigen::Index pc = flat / m;
        const Eigen::Index pr = flat % m;
        a.row(s).swap(a.row(pr));
        a.row(s) /= a(s, pc);
        for (Eigen::Index r = 0; r < m; ++r) {
            if (r != s && a(r, pc) != 0.0) a.row(r) -= a(r, pc) * a.row(s);
        }
        col_used[static_cast<std::size_t>(pc)] = true;
        pivot_col.push_back(static_cast<int>(pc));
    }

    Mat basis(n, n - rank);
    basis.setZero();
    Eigen::Index out = 0;
    for (Eigen::Index f = 0; f < n; ++f) {
        if (col_used[static_cast<std::size_t>(f)]) continue;
        basis(f, out) = 1.0;
        for (int s = 0; s < rank; ++s) basis(pivot_col[static_cast<std::size_t>(s)], out) = -a(s, f);
        ++out;
    }
    return Subspace(std::move(basis));
}

Subspace orthogonal_complement(const Subspace& s, const Signature& sig, double tol_rank, PivotLog* log) {
    const Mat rows = (sig.diagonal().asDiagonal() * s.basis()).transpose();
    if (rows.rows() == 0) return Subspace::whole(sig.dim());
    return null_space(rows, tol_rank, log);
}

Mat radical_coefficients(const Mat& basis, const Signature& sig, double tol_rank, PivotLog* log) {
    if (basis.cols() == 0) return Mat(0, 0);
    return null_space(gram(basis, sig), tol_rank, log).basis();
}

Subspace radical(const Subspace& s, const Signature& sig, double tol_rank, PivotLog* log) {
    if (s.dim() == 0) return Subspace(s.ambient_dim());
    return Subspace(Mat(s.basis() * radical_coefficients(s.basis(), sig, tol_rank, log)));
}

IndefiniteBasis orthonormalize_indefinite(const Mat& candidates, const Signature& sig, double tol_null,
                                          PivotLog* log) {
    std::vector<Vec> work;
    for (Eigen::Index k = 0; k < candidates.cols(); ++k) work.emplace_back(candidates.col(k));
    std::vector<int> alive(work.size());
    for (std::size_t k = 0; k < alive.size(); ++k) alive[k] = static_cast<int>(k);

    IndefiniteBasis out;
    out.basis.resize(candidates.rows(), candidates.cols());
    Eigen::Index produced = 0;
    while (!alive.empty()) {
        const std::size_t count = alive.size();
        double scale = 1.0;
        std::vector<double> norms(count);
        for (std::size_t i = 0; i < count; ++i) {
            const Vec& w = work[static_cast<std::size_t>(alive[i])];
            norms[i] = std::abs(inner(w, w, sig));
            scale = std::max(scale, w.squaredNorm());
        }
        const double floor = tol_null * scale;
        const bool has_direct = *std::max_element(norms.begin(), norms.end()) > floor;
        const int mode = record_or_replay_decide(log, has_direct ? 0 : 1, true);

        Vec chosen;
        std::size_t remove_at = 0;
        if (mode == 0) {
            const int i = record_or_replay_pick(log, norms, floor);
            remove_at = static_cast<std::size_t>(i);
            chosen = work[static_cast<std::size_t>(alive[remove_at])];
        } else {
            // every remaining direction is null; combine the pair with the
            // largest mutual pairing into a non-null vector
            std::vector<double> pair(count * count, -1.0);
            for (std::size_t a = 0; a < count; ++a)
                for (std::size_t b = a + 1; b < count; ++b)
                    pair[a * count + b] = std::abs(inner(work[static_cast<std::size_t>(alive[a])],
                                                         work[static_cast<std::size_t>(alive[b])], sig));
            const double best = *std::max_element(pair.begin(), pair.end());
            if (!(best > floor) && (!log || log->mode() == PivotLog::Mode::record))
                throw DegenerateMetricError("orthonormalize_indefinite: candidate set is degenerate "
                                            "(a null direction orthogonal to all others was found)");
            const int flat = record_or_replay_pick(log, pair, floor);
            const std::size_t a = static_cast<std::size_t>(flat) / count;
            const std::size_t b = static_cast<std::size_t>(flat) % count;
            const Vec& wa = work[static_cast<std::size_t>(alive[a])];
            const Vec& wb = work[static_cast<std::size_t>(alive[b])];
            const double sigma = inner(wa, wb, sig) > 0 ? 1.0 : -1.0;
            record_or_replay_decide(log, sigma > 0 ? 1 : -1, true);
            chosen = wa + sigma * wb;
            remove_at = a;
        }

        const double g = inner(chosen, chosen, sig);
        const int eps = g > 0 ? 1 : -1;
        record_or_replay_decide(log, eps, true);
        const Vec w = chosen / std::sqrt(std::abs(g));
        out.basis.col(produced++) = w;
        out.signs.push_back(eps);
        alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(remove_at));

        for (int idx : alive) {
            Vec& v = work[static_cast<std::size_t>(idx)];
            v -= static_cast<double>(eps) * inner(v, w, sig) * w;
        }
    }
    out.basis.conservativeResize(Eigen::NoChange, produced);
    return out;
}

namespace {

// Orthonormal (Euclidean) basis for the column span of an independent set.
Mat euclidean_basis(const Mat& basis) {
    if (basis.cols() == 0) return Mat(basis.rows(), 0);
    Eigen::HouseholderQR<Mat> qr(basis);
    return qr.householderQ() * Mat::Identity(basis.rows(), basis.cols());
}

} // namespace

Containment contains(const Subspace& s, const Vec& v, double tol_contain) {
    if (v.size() != s.ambient_dim()) throw InputError("contains: dimension mismatch");
    const Mat q = euclidean_basis(s.basis());
    const Vec r = v - q * (q.transpose() * v);
    Containment c;
    c.residual = r.norm() / std::max(1.0, v.norm());
    c.inside = c.residual <= tol_contain;
    return c;
}

double containment_residual(const Subspace& a, const Subspace& b) {
    const Mat q = euclidean_basis(a.basis());
    double worst = 0.0;
    for (int k = 0; k < b.dim(); ++k) {
        const double nv = b.basis().col(k).norm();
        if (nv == 0.0) continue;
        const Vec v = b.basis().col(k) / nv;
        worst = std::max(worst, (v - q * (q.transpose() * v)).norm());
    }
    return worst;
}

double subspace_distance(const Subspace& a, const Subspace& b) {
    return std::max(containment_residual(a, b), containment_residual(b, a));
}

Subspace sum(const Subspace& a, const Subspace& b, double tol_rank, PivotLog* log) {
    Mat cols(a.ambient_dim(), a.dim() + b.dim());
    cols << a.basis(), b.basis();
    return Subspace::span_of(cols, tol_rank, log);
}

std::vector<int> select_complement(const Mat& fixed, const Mat& candidates, int count, double tol_rank,
                                   PivotLog* log) {
    std::vector<Vec> q;  // Euclidean orthonormal basis of fixed + selected
    auto absorb = [&q](Vec v) {
        for (int pass = 0; pass < 2; ++pass)
            for (const Vec& e : q) v -= e.dot(v) * e;
        const double nv = v.norm();
        if (nv > 0.0) q.push_back(v / nv);
    };
    for (Eigen::Index k = 0; k < fixed.cols(); ++k) absorb(fixed.col(k));

    double scale = 1.0;
    for (Eigen::Index k = 0; k < candidates.cols(); ++k) scale = std::max(scale, candidates.col(k).norm());
    const double floor = tol_rank * scale;

    std::vector<int> selected;
    std::vector<double> residual(static_cast<std::size_t>(candidates.cols()));
    while (static_cast<int>(selected.size()) < count) {
        for (Eigen::Index k = 0; k < candidates.cols(); ++k) {
            if (std::find(selected.begin(), selected.end(), static_cast<int>(k)) != selected.end()) {
                residual[static_cast<std::size_t>(k)] = -1.0;
                continue;
            }
            Vec v = candidates.col(k);
            for (int pass = 0; pass < 2; ++pass)
                for (const Vec& e : q) v -= e.dot(v) * e;
            residual[static_cast<std::size_t>(k)] = v.norm();
        }
        const bool any = candidates.cols() > 0 &&
                         *std::max_element(residual.begin(), residual.end()) > floor;
        if (record_or_replay_decide(log, any ? 1 : 0) == 0) break;
        const int k = record_or_replay_pick(log, residual, floor);
        selected.push_back(k);
        absorb(candidates.col(k));
    }
    return selected;
}

} // namespace lightlike
