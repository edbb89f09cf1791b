#include <doctest.h>

#include "lightlike/error.hpp"
#include "lightlike/reduction.hpp"
#include "support.hpp"

using namespace lightlike;
namespace sf = testing_support::surface;
using testing_support::load;
using testing_support::pt;

namespace {

const char* const kCorpus[] = {"isotropic_surface.imm", "plane.imm",        "graph_quadratic.imm",
                               "graph_uv.imm",          "graph_sinh.imm",   "spacelike_plane.imm",
                               "isotropic_surface_perturbed.imm"};

Immersion with_domain_formula(const std::string& formula, double lo = -1, double hi = 1) {
    return Immersion(parse_immersion("signature = (1, 2)\nparams = [u, v]\ndomain = { u: [" + std::to_string(lo) +
                                     ", " + std::to_string(hi) + "], v: [-1, 1] }\nmap = [u, v, " + formula + "]\n"));
}

} // namespace

TEST_CASE("make_grid: uniform with a one percent inset") {
    const ImmersionSpec s = load("isotropic_surface.imm").spec();
    const std::vector<Point> g = make_grid(s, 7);
    REQUIRE(g.size() == 49);
    CHECK(g.front()(0) == doctest::Approx(-0.98));
    CHECK(g.back()(1) == doctest::Approx(0.98));
    CHECK(g[1](1) - g[0](1) == doctest::Approx(1.96 / 6));
    CHECK(make_grid(s, 13, 0.0).back()(0) == 1.0);
}

TEST_CASE("scan: isotropic surface") {
    const Immersion imm = load("isotropic_surface.imm");
    const HypothesisReport r = scan(imm, make_grid(imm.spec(), 7));
    CHECK(r.failures == 0);
    CHECK(r.all_isotropic);
    CHECK(r.constant_rank);
    CHECK(r.q == 1);
    CHECK(r.one_regular);
    CHECK_FALSE(r.metric_connection);
    for (const PointReport& p : r.points) {
        CHECK(p.cls.rad_rank == 2);
        CHECK(p.q0 == 1);
        CHECK(p.quotient_rank == 1);
        CHECK(std::abs(p.metricity - 0.5) <= 1e-6);
        CHECK_FALSE(p.totally_geodesic);
    }
    CHECK(r.worst.a == 0);  // W1 against N2 along xi2
    CHECK(r.worst.b == 2);
    CHECK(r.worst.tangent == 1);
}

TEST_CASE("scan: null plane and graph family") {
    const Immersion plane = load("plane.imm");
    const HypothesisReport r = scan(plane, make_grid(plane.spec(), 7));
    CHECK(r.metric_connection);
    CHECK(r.q == 0);
    for (const PointReport& p : r.points) CHECK(p.totally_geodesic);

    const Immersion graph = load("graph_quadratic.imm");
    const HypothesisReport g = scan(graph, make_grid(graph.spec(), 7));
    CHECK(g.all_isotropic);
    for (const PointReport& p : g.points) CHECK(p.q0 == p.quotient_rank);
}

TEST_CASE("scan: per-point failures are skipped up to the limit") {
    // log(u + 0.9) is undefined on the first grid column only (7 of 49)
    const Immersion some = with_domain_formula("log(u + 0.9)");
    const HypothesisReport r = scan(some, make_grid(some.spec(), 7));
    CHECK(r.failures == 7);
    CHECK_FALSE(r.points[0].ok);
    CHECK(r.points[0].stage == "jet");
    CHECK(r.points[7].ok);
    // two columns (14 of 49) exceed the 20% limit
    const Immersion many = with_domain_formula("log(u + 0.5)");
    CHECK_THROWS_AS(scan(many, make_grid(many.spec(), 7)), NumericalError);
}

TEST_CASE("property: scan is deterministic") {
    const Immersion imm = load("graph_sinh.imm");
    const auto grid = make_grid(imm.spec(), 5);
    const HypothesisReport a = scan(imm, grid);
    const HypothesisReport b = scan(imm, grid);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t k = 0; k < a.points.size(); ++k) {
        CHECK(a.points[k].metricity == b.points[k].metricity);
        CHECK(a.points[k].metric_defect == b.points[k].metric_defect);
        CHECK(a.points[k].max_h == b.points[k].max_h);
        CHECK(a.points[k].q0 == b.points[k].q0);
    }
}

TEST_CASE("reduce_flat: null plane") {
    const Immersion imm = load("plane.imm");
    const HypothesisReport h = scan(imm, make_grid(imm.spec(), 7));
    const ReductionResult r = reduce_flat(imm, h, domain_center(imm.spec()));
    CHECK(r.dim == 2);
    CHECK(r.expected_dim == 2);
    CHECK(r.residual <= 1e-12);
    CHECK(r.verdict);
    Mat xi(5, 2);
    xi << 1, 0, 0, 1, 1, 0, 0, 1, 0, 0;
    CHECK(testing_support::span_distance(r.v0.basis(), xi) <= 1e-12);
}

TEST_CASE("reduce_flat: isotropic surface fails honestly") {
    const Immersion imm = load("isotropic_surface.imm");
    const HypothesisReport h = scan(imm, make_grid(imm.spec(), 7));
    const ReductionResult r = reduce_flat(imm, h, pt(0, 0));
    CHECK(r.dim == 3);
    CHECK_FALSE(r.verdict);
    // least-squares oracle at one verification-grid point
    Mat v0(5, 3);
    v0 << sf::xi1(0), sf::xi2(0), sf::w1(0);
    const double oracle = testing_support::ls_residual(v0, sf::f(0.5, 1.0) - sf::f(0, 0));
    CHECK(oracle > 1e-6);
    CHECK(r.residual >= oracle - 1e-12);
    CHECK_FALSE(r.containment);
}

TEST_CASE("reduce_flat: no single flag can be bypassed") {
    const Immersion imm = load("plane.imm");
    HypothesisReport h = scan(imm, make_grid(imm.spec(), 7));
    REQUIRE(reduce_flat(imm, h, pt(0, 0)).verdict);
    HypothesisReport a = h;
    a.metric_connection = false;
    CHECK_FALSE(reduce_flat(imm, a, pt(0, 0)).verdict);
    HypothesisReport b = h;
    b.constant_rank = false;
    CHECK_FALSE(reduce_flat(imm, b, pt(0, 0)).verdict);
    HypothesisReport c = h;
    c.all_isotropic = false;
    CHECK_FALSE(reduce_flat(imm, c, pt(0, 0)).verdict);
}

TEST_CASE("affine span oracle") {
    const Immersion surf = load("isotropic_surface.imm");
    const AffineSpan a = affine_span_oracle(surf, 40);
    CHECK(a.dim == 4);
    CHECK(a.samples == 40);
    // the relation x1 + x2 - sqrt(2) x4 = 0 annihilates the span
    Vec rel(5);
    rel << 1, 1, 0, -std::sqrt(2.0), 0;
    CHECK((rel.transpose() * a.basis).cwiseAbs().maxCoeff() <= 1e-10);
    for (double u : {-0.3, 0.8})
        for (double v : {-0.9, 0.4}) CHECK(std::abs(rel.dot(sf::f(u, v))) <= 1e-14);

    CHECK(affine_span_oracle(load("plane.imm"), 40).dim == 2);
    CHECK(affine_span_oracle(load("isotropic_surface_perturbed.imm"), 40).dim == 5);
    CHECK(affine_span_oracle(surf, 3).samples == 20);

    const AffineSpan s1 = affine_span_oracle(surf, 40, 17);
    const AffineSpan s2 = affine_span_oracle(surf, 40, 17);
    CHECK((s1.basis.array() == s2.basis.array()).all());
}

TEST_CASE("property: oracle consistency whenever the reduction passes") {
    int passed = 0;
    for (const char* name : kCorpus) {
        INFO(std::string(name));
        const Immersion imm = load(name);
        const HypothesisReport h = scan(imm, make_grid(imm.spec(), 7));
        const ReductionResult r = reduce_flat(imm, h, domain_center(imm.spec()));
        const AffineSpan o = affine_span_oracle(imm, 40);
        if (r.verdict) {
            ++passed;
            CHECK(h.metric_connection);
            CHECK(h.constant_rank);
            CHECK(r.residual <= 1e-6);
            CHECK(o.dim <= imm.n() + h.q);
            CHECK(containment_residual(r.v0, Subspace(o.basis)) <= 1e-6);
        }
    }
    CHECK(passed >= 1);
}

TEST_CASE("curved: de Sitter null line") {
    const Immersion imm = load("desitter_line.imm");
    CHECK(check_quadric(imm) <= 1e-10);
    const HypothesisReport h = scan(imm, make_grid(imm.spec(), 7));
    for (const PointReport& p : h.points) CHECK(p.totally_geodesic);
    const ReductionResult r = analyze_curved(imm, h, domain_center(imm.spec()));
    REQUIRE(r.curved);
    CHECK(r.curved->quadric_residual <= 1e-10);
    CHECK(r.curved->tangent_residual <= 1e-9);
    CHECK(r.curved->lifted);
    CHECK(r.dim == 2);
    CHECK(r.verdict);
}

TEST_CASE("curved: constraint violations are input errors") {
    CHECK_THROWS_AS(check_quadric(load("desitter_scaled.imm")), InputError);
    const Immersion plane(parse_immersion("signature = (2, 3)\ncurvature = 1\nparams = [u, v]\n"
                                          "domain = { u: [-1, 1], v: [-1, 1] }\nmap = [u, v, u, v, 2]\n"));
    CHECK_THROWS_AS(check_quadric(plane), InputError);
    CHECK_THROWS_AS(check_quadric(load("plane.imm")), InputError);  // flat spec
}

TEST_CASE("warnings: conflict surfaced for the isotropic surface only") {
    const Immersion surf = load("isotropic_surface.imm");
    const HypothesisReport h = scan(surf, make_grid(surf.spec(), 7));
    const auto w = reduction_warnings(surf, h, reduce_flat(surf, h, pt(0, 0)), affine_span_oracle(surf, 40));
    REQUIRE(w.size() == 1);
    CHECK(w[0].find("conflict") != std::string::npos);
    CHECK(w[0].find("dimension 4") != std::string::npos);

    const Immersion plane = load("plane.imm");
    const HypothesisReport p = scan(plane, make_grid(plane.spec(), 7));
    CHECK(reduction_warnings(plane, p, reduce_flat(plane, p, pt(0, 0)), affine_span_oracle(plane, 40)).empty());

    const Immersion trivial(parse_immersion("signature = (2, 2)\nparams = [u, v]\n"
                                            "domain = { u: [-1, 1], v: [-1, 1] }\nmap = [u, v, u, v]\n"));
    const HypothesisReport t = scan(trivial, make_grid(trivial.spec(), 3));
    const auto tw = reduction_warnings(trivial, t, std::nullopt, std::nullopt);
    REQUIRE(tw.size() == 1);
    CHECK(tw[0].find("n = p") != std::string::npos);
}
