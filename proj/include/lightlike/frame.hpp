#pragma once

#include <vector>

#include "lightlike/immersion.hpp"
#include "lightlike/indef.hpp"

namespace lightlike {

struct PointClassification {
    int n = 0;
    int p = 0;
    int rad_rank = 0;  // r = n - rank(induced metric)
    bool is_isotropic = false;
    bool is_nondegenerate = false;
    int screen_tangent_dim = 0;
    // Isotropic with n == p: the screen transversal bundle is trivial.
    bool trivial_screen_transversal = false;
};

// Candidate order for the screen transversal complement. `standard` seeds the
// complement with the second derivatives on isotropic points and then draws
// from the TM-perp basis; `reversed` draws from the TM-perp basis in reverse
// order only. Both are legal screens; the second exists to test that
// choice-invariant outputs do not depend on it.
enum class ScreenOrder { standard, reversed };

struct FrameOptions {
    Tolerances tol;
    ScreenOrder screen = ScreenOrder::standard;
};

// Quasi-orthonormal frame (xi_i, N_i, X_a, W_alpha) at one parameter point.
struct PointFrame {
    Jet2 jet;
    Signature sig;
    PointClassification cls;

    Mat xi;                  // radical basis, ambient x r
    Mat xa;                  // screen tangent basis, ambient x (n - r)
    std::vector<int> xa_eps;
    Mat w;                   // screen transversal basis, ambient x (p - r)
    std::vector<int> w_eps;
    Mat nvec;                // lightlike transversal basis, ambient x r
    Subspace tm_perp;

    Mat tangent;         // [xi | xa]
    Mat tangent_coeffs;  // n x n, tangent = jet.d1 * tangent_coeffs

    int r() const { return static_cast<int>(xi.cols()); }
    int screen_dim() const { return static_cast<int>(w.cols()); }
    Mat transversal() const;  // [W | N]
    Mat all() const;          // [xi | xa | W | N]
};

PointClassification classify(const Jet2& jet, const Signature& sig, const Tolerances& tol = {});

PointFrame build_frame(const Jet2& jet, const Signature& sig, const FrameOptions& opts = {},
                       PivotLog* log = nullptr);

struct Decomposition {
    Vec xi;
    Vec xa;
    Vec w;
    Vec n;
};

Decomposition decompose(const Vec& v, const PointFrame& frame);
Vec recompose(const Decomposition& d, const PointFrame& frame);

// Residuals of the duality relations between xi, N, W (and X when present).
struct A1Residuals {
    double xi_xi = 0.0;
    double w_w = 0.0;
    double w_xi = 0.0;
    double n_n = 0.0;
    double n_xi = 0.0;
    double n_w = 0.0;
    double n_xa = 0.0;
    double xa_xa = 0.0;
    double xa_rest = 0.0;  // X against xi and W

    double max() const;
};

A1Residuals a1_residuals(const PointFrame& frame);

// Frame construction frozen at a base point: every pivot, rank, complement
// and sign decision taken at the base is replayed at nearby points, so the
// resulting sections vary smoothly and can be differentiated.
class FrameField {
public:
    FrameField(const Immersion& immersion, Point base, FrameOptions opts = {});

    const PointFrame& base_frame() const { return base_frame_; }
    const Point& base() const { return base_; }
    const Immersion& immersion() const { return *immersion_; }
    const FrameOptions& options() const { return opts_; }

    // Throws FrozenPivotLost when the frozen decisions no longer apply.
    PointFrame at(const Point& target) const;

private:
    const Immersion* immersion_;
    Point base_;
    FrameOptions opts_;
    PivotLog log_;
    PointFrame base_frame_;
};

inline constexpr double kFrameStepRadius = 1e-3;

// One-shot frozen frame at `target`; target must lie within kFrameStepRadius
// of base in every coordinate.
PointFrame frame_field(const Immersion& immersion, const Point& base, const Point& target,
                       const FrameOptions& opts = {});

} // namespace lightlike
