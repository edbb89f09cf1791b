#include <doctest.h>

#include <cmath>
#include <random>

#include "lightlike/error.hpp"
#include "lightlike/immersion.hpp"
#include "support.hpp"

using namespace lightlike;
using expr::Expr;
using testing_support::pt;

namespace {

const std::vector<std::string> kUV = {"u", "v"};

double eval_at(const Expr& e, double u, double v) {
    const double xs[] = {u, v};
    return e.evaluate(xs);
}

const char* const kSurfaceText = R"(
signature = (2, 3)
params = [u, v]
domain = { u: [-1, 1], v: [-1, 1] }
map = [(u + sinh(v)) / sqrt(2), (u - sinh(v)) / sqrt(2), cosh(v), u, v]
)";

// Random well-defined source text over u, v with values of moderate size.
std::string random_expr(std::mt19937& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 11);
    std::uniform_real_distribution<double> num(0.25, 3.0);
    auto sub = [&] { return random_expr(rng, depth - 1); };
    char buf[32];
    switch (pick(rng)) {
    case 0: return "u";
    case 1: return "v";
    case 2: std::snprintf(buf, sizeof buf, "%.3f", num(rng)); return buf;
    case 3: return "(" + sub() + " + " + sub() + ")";
    case 4: return "(" + sub() + " - " + sub() + ")";
    case 5: return "(" + sub() + " * " + sub() + ")";
    case 6: return "(" + sub() + ") / (2 + cos(" + sub() + "))";
    case 7: return "sin(" + sub() + ")";
    case 8: return "exp(0.5 * sin(" + sub() + "))";
    case 9: return "log(1 + (" + sub() + ")^2)";
    case 10: return "sqrt(1.5 + cos(" + sub() + "))";
    default: return "-(" + sub() + ")^" + std::to_string(1 + static_cast<int>(rng() % 3));
    }
}

} // namespace

TEST_CASE("parser: sinh/cosh surface spec") {
    const ImmersionSpec s = parse_immersion(kSurfaceText);
    CHECK(s.n() == 2);
    CHECK(s.p() == 3);
    CHECK(s.signature == Signature{2, 3});
    CHECK(s.curvature == 0.0);
    REQUIRE(s.components.size() == 5);
    CHECK(s.domain[1].lo == -1.0);
    CHECK(s.domain[1].hi == 1.0);
}

TEST_CASE("parser: flat plane spec") {
    const ImmersionSpec s = parse_immersion(
        "signature = (1, 2)\nparams = [u, v]\ndomain = { u: [0, 1], v: [0, 2] }\nmap = [u, v, 0]\n");
    CHECK(s.n() == 2);
    CHECK(s.p() == 1);
    CHECK(s.components[2].is_number(0.0));
}

TEST_CASE("parser: statement order and comments are free") {
    const ImmersionSpec s = parse_immersion(
        "# leading comment\nmap = [t, t, 1, 0]  # components\ncurvature = 1\nparams = [t]\n"
        "domain = { t: [-pi/4, 2*e] }\nsignature = (1, 3)\n");
    CHECK(s.curvature == 1.0);
    CHECK(s.domain[0].lo == doctest::Approx(-M_PI / 4));
    CHECK(s.domain[0].hi == doctest::Approx(2 * M_E));
}

TEST_CASE("parser: errors") {
    SUBCASE("component count mismatch") {
        CHECK_THROWS_AS(parse_immersion("signature = (2, 3)\nparams = [u, v]\n"
                                        "domain = { u: [0, 1], v: [0, 1] }\nmap = [u, v, u, v]\n"),
                        InputError);
    }
    SUBCASE("unknown identifier carries its position") {
        try {
            parse_immersion("signature = (1, 2)\nparams = [u, v]\ndomain = { u: [0, 1], v: [0, 1] }\n"
                            "map = [u, w, 0]\n");
            FAIL("expected SyntaxError");
        } catch (const SyntaxError& e) {
            CHECK(e.line() == 4);
            CHECK(e.column() == 11);
        }
    }
    SUBCASE("empty domain interval") {
        CHECK_THROWS_AS(parse_immersion("signature = (1, 2)\nparams = [u, v]\n"
                                        "domain = { u: [1, 1], v: [0, 1] }\nmap = [u, v, 0]\n"),
                        InputError);
    }
    SUBCASE("missing domain entry") {
        CHECK_THROWS_AS(parse_immersion("signature = (1, 2)\nparams = [u, v]\n"
                                        "domain = { u: [0, 1] }\nmap = [u, v, 0]\n"),
                        InputError);
    }
    SUBCASE("syntax") {
        CHECK_THROWS_AS(parse_expression("u + * v", kUV), SyntaxError);
        CHECK_THROWS_AS(parse_expression("sin u", kUV), SyntaxError);
        CHECK_THROWS_AS(parse_expression("(u + v", kUV), SyntaxError);
        CHECK_THROWS_AS(parse_expression("u ^ v", kUV), SyntaxError);
        CHECK_THROWS_AS(parse_expression("foo(u)", kUV), SyntaxError);
    }
    SUBCASE("dimension rules") {
        CHECK_THROWS_AS(parse_immersion("signature = (1, 1)\nparams = [u, v]\n"
                                        "domain = { u: [0, 1], v: [0, 1] }\nmap = [u, v]\n"),
                        InputError);
    }
}

TEST_CASE("parser: unary minus binds looser than ^") {
    const Expr e = parse_expression("-u^2", kUV);
    CHECK(eval_at(e, 3.0, 0.0) == -9.0);
    CHECK(eval_at(parse_expression("(-u)^2", kUV), 3.0, 0.0) == 9.0);
    CHECK(eval_at(parse_expression("u^-1", kUV), 4.0, 0.0) == 0.25);
    CHECK(eval_at(parse_expression("2 - -u", kUV), 1.0, 0.0) == 3.0);
}

TEST_CASE("differentiate: table derivatives and folding") {
    const Expr sv = parse_expression("sinh(v)", kUV);
    CHECK(differentiate(sv, 1).structurally_equal(parse_expression("cosh(v)", kUV)));
    CHECK(differentiate(sv, 0).is_number(0.0));

    const Expr x1 = parse_expression("(u + sinh(v)) / sqrt(2)", kUV);
    const Expr d = differentiate(x1, 0);
    CHECK(d.to_string() == "(1 / sqrt(2))");
    CHECK(eval_at(d, 0.3, -0.2) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-15));

    // 0*x -> 0, x+0 -> x, 1*x -> x
    CHECK((Expr::number(0.0) * parse_expression("u", kUV)).is_number(0.0));
    CHECK((parse_expression("u", kUV) + Expr::number(0.0)).structurally_equal(parse_expression("u", kUV)));
    CHECK((Expr::number(1.0) * parse_expression("v", kUV)).structurally_equal(parse_expression("v", kUV)));
}

TEST_CASE("differentiate: cosh'(0) = 0 against a central difference") {
    const Expr c = parse_expression("cosh(v)", kUV);
    const double h = 1e-6;
    const double fd = (eval_at(c, 0, h) - eval_at(c, 0, -h)) / (2 * h);
    const double exact = eval_at(differentiate(c, 1), 0, 0);
    CHECK(exact == 0.0);
    CHECK(std::abs(exact - fd) <= 1e-9);
}

TEST_CASE("jet: sinh/cosh surface at the origin") {
    const Immersion imm(parse_immersion(kSurfaceText));
    const Jet2 j = imm.jet(pt(0, 0));
    const double r = 1 / std::sqrt(2.0);
    Vec value(5), d1u(5), d1v(5), w(5);
    value << 0, 0, 1, 0, 0;
    d1u << r, r, 0, 1, 0;
    d1v << r, -r, 0, 0, 1;
    w << 0, 0, 1, 0, 0;
    CHECK((j.value - value).norm() <= 1e-15);
    CHECK((j.d1.col(0) - d1u).norm() <= 1e-15);
    CHECK((j.d1.col(1) - d1v).norm() <= 1e-15);
    CHECK((j.d2[1][1] - w).norm() <= 1e-15);
    CHECK(j.d2[0][0].norm() == 0.0);
    CHECK(j.d2[0][1].norm() == 0.0);
    CHECK(j.d2[1][0].norm() == 0.0);
}

TEST_CASE("jet: linear maps have vanishing second derivatives") {
    const Immersion imm = testing_support::load("plane.imm");
    for (double u : {-0.7, 0.1, 0.9})
        for (double v : {-0.4, 0.6}) {
            const Jet2 j = imm.jet(pt(u, v));
            for (const auto& row : j.d2)
                for (const auto& d : row) CHECK(d.norm() == 0.0);
        }
}

TEST_CASE("jet: non-finite values name the component") {
    const Immersion imm(parse_immersion("signature = (1, 2)\nparams = [u, v]\n"
                                        "domain = { u: [-1, 1], v: [-1, 1] }\nmap = [u, v, log(u)]\n"));
    try {
        imm.jet(pt(-0.5, 0.0));
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("component 2") != std::string::npos);
    }
    CHECK_THROWS_AS(imm.jet(pt(2.0, 0.0)), InputError);
}

TEST_CASE("property: symbolic derivatives agree with central differences") {
    std::mt19937 rng(20261015);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const std::string text = random_expr(rng, 3);
        const Expr e = parse_expression(text, kUV);
        for (int param = 0; param < 2; ++param) {
            const Expr d = differentiate(e, param);
            const double u = coord(rng), v = coord(rng), h = 1e-6;
            const double f0 = eval_at(e, u, v);
            if (!std::isfinite(f0) || std::abs(f0) > 1e3) continue;
            const double fp = param == 0 ? eval_at(e, u + h, v) : eval_at(e, u, v + h);
            const double fm = param == 0 ? eval_at(e, u - h, v) : eval_at(e, u, v - h);
            const double fd = (fp - fm) / (2 * h);
            const double exact = eval_at(d, u, v);
            const double scale = std::max({1.0, std::abs(f0), std::abs(exact)});
            INFO(text);
            CHECK(std::abs(exact - fd) <= 1e-7 * scale);
            ++checked;
        }
    }
    CHECK(checked > 400);
}

TEST_CASE("property: print then reparse gives the same tree") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        const Expr e = parse_expression(random_expr(rng, 4), kUV);
        const Expr again = parse_expression(e.to_string(), kUV);
        INFO(e.to_string());
        CHECK(e.structurally_equal(again));
        CHECK(again.to_string() == e.to_string());
    }
    for (const char* t : {"-u^2", "u^-1.5", "2 - -u", "pi * e", "1e-3 * u", "tan(u) / tanh(v)"}) {
        const Expr e = parse_expression(t, kUV);
        CHECK(e.structurally_equal(parse_expression(e.to_string(), kUV)));
    }
}

TEST_CASE("property: second derivatives are bit-exactly symmetric") {
    for (const char* name : {"isotropic_surface.imm", "graph_sinh.imm", "graph_uv.imm", "isotropic_surface_perturbed.imm"}) {
        const Immersion imm = testing_support::load(name);
        for (double u : {-0.9, 0.0, 0.55})
            for (double v : {-0.3, 0.8}) {
                const Jet2 j = imm.jet(pt(u, v));
                CHECK((j.d2[0][1].array() == j.d2[1][0].array()).all());
            }
    }
}
