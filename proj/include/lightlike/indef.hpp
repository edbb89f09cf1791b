#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace lightlike {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Diagonal metric diag(-1 x neg, +1 x pos).
struct Signature {
    int neg = 0;
    int pos = 0;

    int dim() const { return neg + pos; }
    double eps(int k) const { return k < neg ? -1.0 : 1.0; }
    Vec diagonal() const;
    bool operator==(const Signature&) const = default;
};

struct Tolerances {
    double rank = 1e-9;     // relative singular-value threshold
    double null = 1e-9;     // null-norm detection
    double contain = 1e-6;  // geometric containment
    double metric = 1e-7;   // metricity of the transversal connection
};

// Records the discrete decisions (pivots, ranks, signs) taken by the
// eliminations below, and replays them later so that the same construction
// varies smoothly with its input. A default-constructed log records.
class PivotLog {
public:
    enum class Mode { record, replay };

    PivotLog() = default;

    Mode mode() const { return mode_; }

    // Copy of this log set up to replay from the start.
    PivotLog replay() const;

    // Index of the largest magnitude (lowest index on ties) when recording;
    // the stored index when replaying, which must still exceed `floor`.
    int pick(std::span<const double> magnitudes, double floor);

    // Records a discrete value, or returns the stored one when replaying.
    // With `must_match`, a replayed value differing from `computed` throws.
    int decide(int computed, bool must_match = false);

    std::size_t size() const { return choices_.size(); }

private:
    int next_stored(const char* what);

    Mode mode_ = Mode::record;
    std::vector<int> choices_;
    std::size_t cursor_ = 0;
};

// Linear subspace of R^ambient_dim stored as a basis (columns) in ambient
// coordinates.
class Subspace {
public:
    Subspace() = default;
    explicit Subspace(int ambient_dim) : ambient_dim_(ambient_dim), basis_(ambient_dim, 0) {}
    // Columns must be linearly independent.
    explicit Subspace(Mat basis) : ambient_dim_(static_cast<int>(basis.rows())), basis_(std::move(basis)) {}

    // Span of arbitrary (possibly dependent) columns; keeps a deterministic
    // independent subset chosen by largest residual norm.
    static Subspace span_of(const Mat& columns, double tol_rank, PivotLog* log = nullptr);
    static Subspace whole(int ambient_dim);

    int dim() const { return static_cast<int>(basis_.cols()); }
    int ambient_dim() const { return ambient_dim_; }
    const Mat& basis() const { return basis_; }
    Vec vector(int k) const { return basis_.col(k); }

private:
    int ambient_dim_ = 0;
    Mat basis_;
};

struct Containment {
    bool inside = false;
    double residual = 0.0;
};

double inner(const Vec& u, const Vec& v, const Signature& sig);
Mat gram(const Mat& a, const Mat& b, const Signature& sig);  // a^T G b
Mat gram(const Mat& a, const Signature& sig);

// Singular values above tol_rank * max(sigma_max, 1).
int numerical_rank(const Mat& m, double tol_rank);

// {v : rows * v = 0}; rows are the constraint covectors (one per row).
Subspace null_space(const Mat& rows, double tol_rank, PivotLog* log = nullptr);

// {v : g(v, s) = 0 for all s in S}.
Subspace orthogonal_complement(const Subspace& s, const Signature& sig, double tol_rank, PivotLog* log = nullptr);

// S intersected with its g-orthogonal complement.
Subspace radical(const Subspace& s, const Signature& sig, double tol_rank, PivotLog* log = nullptr);

// Coefficient form of radical(): columns c with basis * c spanning the radical.
Mat radical_coefficients(const Mat& basis, const Signature& sig, double tol_rank, PivotLog* log = nullptr);

struct IndefiniteBasis {
    Mat basis;              // columns w_a with g(w_a, w_b) = eps_a delta_ab
    std::vector<int> signs; // eps_a in {-1, +1}
};

// Pivoted Gram-Schmidt for the indefinite metric. Throws DegenerateMetricError
// when the restricted metric is degenerate.
IndefiniteBasis orthonormalize_indefinite(const Mat& candidates, const Signature& sig, double tol_null,
                                          PivotLog* log = nullptr);

Containment contains(const Subspace& s, const Vec& v, double tol_contain);

// Largest containment residual of b's basis vectors in a.
double containment_residual(const Subspace& a, const Subspace& b);

// Max of the two one-sided containment residuals.
double subspace_distance(const Subspace& a, const Subspace& b);

Subspace sum(const Subspace& a, const Subspace& b, double tol_rank, PivotLog* log = nullptr);

// Complement of `fixed` inside span(candidates): selects `count` candidate
// columns, in order of largest residual against fixed + already selected.
// Returns the selected column indices.
std::vector<int> select_complement(const Mat& fixed, const Mat& candidates, int count, double tol_rank,
                                   PivotLog* log = nullptr);

} // namespace lightlike
