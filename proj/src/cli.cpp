#include "lightlike/cli.hpp"

#include <charconv>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lightlike/error.hpp"
#include "lightlike/forms.hpp"
#include "lightlike/reduction.hpp"

namespace lightlike::cli {

using nlohmann::json;

namespace {

json vec_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json cols_json(const Mat& m) {
    json a = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) a.push_back(vec_json(m.col(c)));
    return a;
}

json table_json(const Table3& t) {
    json a = json::array();
    for (int i = 0; i < t.extent(0); ++i) {
        json b = json::array();
        for (int j = 0; j < t.extent(1); ++j) {
            json c = json::array();
            for (int k = 0; k < t.extent(2); ++k) c.push_back(t(i, j, k));
            b.push_back(std::move(c));
        }
        a.push_back(std::move(b));
    }
    return a;
}

std::string section_label(int s, int m) {
    return s < m ? "W" + std::to_string(s + 1) : "N" + std::to_string(s - m + 1);
}

std::string tangent_label(int i, int r) {
    return i < r ? "xi" + std::to_string(i + 1) : "X" + std::to_string(i - r + 1);
}

json spec_json(const RunConfig& cfg, const ImmersionSpec& s) {
    json domain = json::object();
    for (std::size_t l = 0; l < s.params.size(); ++l) domain[s.params[l]] = {s.domain[l].lo, s.domain[l].hi};
    json map = json::array();
    for (const auto& c : s.components) map.push_back(c.to_string());
    return {{"path", cfg.spec_path},
            {"signature", {s.signature.neg, s.signature.pos}},
            {"curvature", s.curvature},
            {"params", s.params},
            {"domain", domain},
            {"map", map},
            {"n", s.n()},
            {"p", s.p()},
            {"global_hypotheses", "ambient completeness and simple connectivity are assumed, not verified"}};
}

json config_json(const RunConfig& cfg) {
    json j = {{"command", command_name(cfg.command)},
              {"grid_per_param", cfg.grid_per_param},
              {"seed", cfg.seed},
              {"output", cfg.output == Output::json ? "json" : "text"},
              {"screen", cfg.screen == ScreenOrder::standard ? "standard" : "reversed"},
              {"tolerances",
               {{"rank", cfg.tol.rank},
                {"null", cfg.tol.null},
                {"contain", cfg.tol.contain},
                {"metric", cfg.tol.metric},
                {"forms", kFormTolerance},
                {"theorem2", kTheorem2Tolerance}}},
              {"grid",
               {{"per_param", cfg.grid_per_param},
                {"inset_fraction", kGridInset},
                {"verify_per_param", kVerifyPerParam},
                {"fd_step", kFrameDerivativeStep},
                {"fd_min_step", kMinFrameDerivativeStep}}}};
    j["point"] = cfg.point ? json(*cfg.point) : json(nullptr);
    return j;
}

json classification_json(const Point& x, const PointClassification& c) {
    return {{"point", vec_json(x)},
            {"n", c.n},
            {"p", c.p},
            {"r", c.rad_rank},
            {"isotropic", c.is_isotropic},
            {"nondegenerate", c.is_nondegenerate},
            {"screen_tangent_dim", c.screen_tangent_dim},
            {"screen_transversal_dim", c.p - c.rad_rank},
            {"trivial_screen_transversal", c.trivial_screen_transversal}};
}

json frame_json(const PointFrame& f) {
    const A1Residuals a = a1_residuals(f);
    return {{"point", vec_json(f.jet.point)},
            {"xi", cols_json(f.xi)},
            {"xa", cols_json(f.xa)},
            {"xa_signs", f.xa_eps},
            {"w", cols_json(f.w)},
            {"w_signs", f.w_eps},
            {"n", cols_json(f.nvec)},
            {"a1",
             {{"xi_xi", a.xi_xi},
              {"w_w", a.w_w},
              {"w_xi", a.w_xi},
              {"n_n", a.n_n},
              {"n_xi", a.n_xi},
              {"n_w", a.n_w},
              {"n_xa", a.n_xa},
              {"xa_xa", a.xa_xa},
              {"xa_rest", a.xa_rest},
              {"max", a.max()}}}};
}

json forms_json(const FormTable& t) {
    json j = {{"h_l", table_json(t.h_l)}, {"h_s", table_json(t.h_s)}, {"nabla", table_json(t.nabla)}};
    if (t.has_weingarten) {
        j["a_w"] = table_json(t.a_w);
        j["a_n"] = table_json(t.a_n);
        j["conn_s"] = table_json(t.conn_s);
        j["conn_l"] = table_json(t.conn_l);
        j["d_l"] = table_json(t.d_l);
        j["d_s"] = table_json(t.d_s);
        j["step"] = t.step;
        j["one_sided"] = t.one_sided;
    }
    return j;
}

json eq13_json(const FormTable& t, const PointFrame& f, const Tolerances& tol) {
    const MetricSummary s = metric_summary(t, f);
    json samples = json::array();
    for (const auto& [i, a, b, d] : s.samples)
        samples.push_back({{"x", tangent_label(i, t.r)},
                           {"v", section_label(a, t.m)},
                           {"v_prime", section_label(b, t.m)},
                           {"lhs", d.lhs},
                           {"rhs", d.rhs},
                           {"defect", d.defect}});
    return {{"max_metricity", s.max_metricity},
            {"max_defect", s.max_defect},
            {"max_a_w", s.max_a_w},
            {"metric", s.max_metricity <= tol.metric},
            {"samples", samples}};
}

json lemma2_json(const Lemma2Report& l) {
    return {{"dim_k", l.dim_k},
            {"q0", l.q0},
            {"screen_transversal_dim", l.screen_dim},
            {"max_orthogonality", l.max_orthogonality},
            {"orthogonality_ok", l.orthogonality_ok},
            {"dimension_ok", l.dimension_ok},
            {"pass", l.pass}};
}

json theorem2_json(const Theorem2Report& t) {
    return {{"q0", t.q0},
            {"dim_eta", t.dim_eta},
            {"vacuous", t.vacuous},
            {"rank_jump", t.rank_jump},
            {"one_sided", t.one_sided},
            {"max_defect", t.max_defect},
            {"pass", t.pass}};
}

Point resolve_point(const RunConfig& cfg, const Immersion& imm, bool required) {
    if (!cfg.point) {
        if (required) throw InputError(command_name(cfg.command) + " requires --point");
        return domain_center(imm.spec());
    }
    if (static_cast<int>(cfg.point->size()) != imm.n())
        throw InputError("--point has " + std::to_string(cfg.point->size()) + " coordinates, expected " +
                         std::to_string(imm.n()));
    Point x = Eigen::Map<const Vec>(cfg.point->data(), static_cast<Eigen::Index>(cfg.point->size()));
    if (!imm.in_domain(x)) throw InputError("--point lies outside the domain box");
    return x;
}

void add_point_analysis(json& rep, const Immersion& imm, const Point& x, const FrameOptions& opts, bool theorem2) {
    const PointForms pf = compute_forms(imm, x, opts);
    const TransversalSpace t1 = first_transversal(pf.table, pf.frame, opts.tol);
    rep["classification"] = json::array({classification_json(x, pf.frame.cls)});
    rep["frames"] = frame_json(pf.frame);
    rep["forms"] = forms_json(pf.table);
    rep["t1"] = {{"rank_per_point", json::array({t1.q0})},
                 {"constant_rank", true},
                 {"q", t1.q0},
                 {"basis", cols_json(t1.t1.basis())},
                 {"quotient_rank", quotient_rank(pf.frame.jet, opts.tol)}};
    rep["eq13"] = eq13_json(pf.table, pf.frame, opts.tol);
    rep["lemma2"] = lemma2_json(lemma2_check(pf.table, pf.frame, t1, opts.tol));
    if (theorem2) rep["theorem2"] = theorem2_json(theorem2_check(imm, x, opts));
}

json scan_json(json& rep, const HypothesisReport& h, int per_param) {
    json cls = json::array(), ranks = json::array(), points = json::array();
    for (const PointReport& p : h.points) {
        if (!p.ok) {
            ranks.push_back(nullptr);
            rep["errors"].push_back(
                {{"kind", "numerical"}, {"stage", p.stage}, {"point", vec_json(p.x)}, {"message", p.error}});
            continue;
        }
        cls.push_back(classification_json(p.x, p.cls));
        ranks.push_back(p.q0);
        points.push_back({{"point", vec_json(p.x)},
                          {"r", p.cls.rad_rank},
                          {"isotropic", p.cls.is_isotropic},
                          {"q0", p.q0},
                          {"quotient_rank", p.quotient_rank},
                          {"a1_max", p.a1},
                          {"max_h", p.max_h},
                          {"max_d_l", p.max_d_l},
                          {"metricity", p.metricity},
                          {"metric_defect", p.metric_defect},
                          {"max_a_w", p.max_a_w},
                          {"totally_geodesic", p.totally_geodesic},
                          {"one_sided", p.one_sided},
                          {"fd_step", p.step}});
    }
    rep["classification"] = cls;
    rep["t1"] = {{"rank_per_point", ranks},
                 {"constant_rank", h.constant_rank},
                 {"q", h.constant_rank ? json(h.q) : json(nullptr)}};
    json eq13 = {{"max_metricity", h.max_metricity}, {"max_defect", h.max_defect}, {"samples", json::array()}};
    if (h.worst.point >= 0) {
        const PointReport& p = h.points[static_cast<std::size_t>(h.worst.point)];
        const int m = p.cls.p - p.cls.rad_rank;
        eq13["samples"].push_back({{"point", vec_json(p.x)},
                                   {"x", tangent_label(h.worst.tangent, p.cls.rad_rank)},
                                   {"v", section_label(h.worst.a, m)},
                                   {"v_prime", section_label(h.worst.b, m)},
                                   {"lhs", h.worst.value.lhs},
                                   {"rhs", h.worst.value.rhs},
                                   {"defect", h.worst.value.defect}});
    }
    rep["eq13"] = eq13;
    rep["hypotheses"] = {{"all_isotropic", h.all_isotropic},
                         {"constant_rank", h.constant_rank},
                         {"q", h.constant_rank ? json(h.q) : json(nullptr)},
                         {"metric_connection", h.metric_connection},
                         {"one_regular", h.one_regular},
                         {"failures", h.failures},
                         {"grid_points", h.points.size()},
                         {"grid_per_param", per_param}};
    return points;
}

json oracle_json(const AffineSpan& a, std::uint64_t seed) {
    return {{"affine_dim", a.dim}, {"samples", a.samples}, {"seed", seed}, {"base", vec_json(a.base)},
            {"basis", cols_json(a.basis)}};
}

json reduction_json(const ReductionResult& r) {
    json j = {{"base", vec_json(r.base)},
              {"dim", r.dim},
              {"expected_dim", r.expected_dim >= 0 ? json(r.expected_dim) : json(nullptr)},
              {"v0", cols_json(r.v0.basis())},
              {"residual", r.residual},
              {"containment", r.containment},
              {"verdict", r.verdict ? "pass" : "fail"},
              {"verify_per_param", r.verify_per_param}};
    if (r.curved) {
        j["curved"] = {{"c", r.curved->c},
                       {"quadric_residual", r.curved->quadric_residual},
                       {"tangent_residual", r.curved->tangent_residual},
                       {"lift_residual", r.curved->lift_residual},
                       {"lifted", r.curved->lifted}};
    }
    return j;
}

void render(std::ostringstream& os, const json& j, int indent) {
    const std::string pad(static_cast<std::size_t>(indent), ' ');
    for (auto it = j.begin(); it != j.end(); ++it) {
        const json& v = it.value();
        const bool nested_obj = v.is_object() && !v.empty();
        const bool obj_array = v.is_array() && !v.empty() && v.front().is_object();
        const bool str_array = v.is_array() && !v.empty() && v.front().is_string();
        if (nested_obj) {
            os << pad << it.key() << ":\n";
            render(os, v, indent + 2);
        } else if (obj_array) {
            os << pad << it.key() << ":\n";
            for (const json& item : v) {
                os << pad << "  -\n";
                render(os, item, indent + 4);
            }
        } else if (str_array) {
            os << pad << it.key() << ":\n";
            for (const json& item : v) os << pad << "  - " << item.get<std::string>() << "\n";
        } else if (v.is_string()) {
            os << pad << it.key() << ": " << v.get<std::string>() << "\n";
        } else {
            os << pad << it.key() << ": " << v.dump() << "\n";
        }
    }
}

bool parse_point(const std::string& text, std::vector<double>& out) {
    out.clear();
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find(',', pos);
        if (end == std::string::npos) end = text.size();
        std::string item = text.substr(pos, end - pos);
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) return false;
        item = item.substr(b, e - b + 1);
        if (!item.empty() && item[0] == '+') item.erase(0, 1);
        double v = 0.0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (res.ec != std::errc() || res.ptr != item.data() + item.size()) return false;
        out.push_back(v);
        pos = end + 1;
    }
    return !out.empty();
}

} // namespace

std::string command_name(Command c) {
    switch (c) {
    case Command::frames: return "frames";
    case Command::forms: return "forms";
    case Command::check: return "check";
    case Command::reduce: return "reduce";
    case Command::scan: return "scan";
    case Command::oracle: return "oracle";
    }
    return "?";
}

json build_report(const RunConfig& cfg) {
    if (cfg.grid_per_param < 3) throw InputError("--grid must be at least 3");
    const Immersion imm(load_immersion(cfg.spec_path));
    const FrameOptions opts{cfg.tol, cfg.screen};
    json rep = {{"version", kVersion},
                {"spec", spec_json(cfg, imm.spec())},
                {"config", config_json(cfg)},
                {"warnings", json::array()},
                {"errors", json::array()}};
    const bool curved = imm.spec().curvature != 0.0;

    switch (cfg.command) {
    case Command::frames: {
        const Point x = resolve_point(cfg, imm, true);
        const PointFrame f = build_frame(imm.jet(x), imm.signature(), opts);
        rep["classification"] = json::array({classification_json(x, f.cls)});
        rep["frames"] = frame_json(f);
        break;
    }
    case Command::forms:
        add_point_analysis(rep, imm, resolve_point(cfg, imm, true), opts, false);
        break;
    case Command::check:
        add_point_analysis(rep, imm, resolve_point(cfg, imm, false), opts, true);
        rep.erase("frames");
        rep.erase("forms");
        break;
    case Command::scan:
    case Command::reduce: {
        if (curved && cfg.command == Command::reduce) check_quadric(imm, cfg.tol);
        const HypothesisReport h = scan(imm, make_grid(imm.spec(), cfg.grid_per_param), opts);
        rep["points"] = scan_json(rep, h, cfg.grid_per_param);
        std::optional<ReductionResult> red;
        std::optional<AffineSpan> orc;
        if (cfg.command == Command::reduce) {
            const Point x0 = resolve_point(cfg, imm, false);
            red = curved ? analyze_curved(imm, h, x0, opts) : reduce_flat(imm, h, x0, opts);
            orc = affine_span_oracle(imm, cfg.samples, cfg.seed, cfg.tol.rank);
            rep["reduction"] = reduction_json(*red);
            rep["oracle"] = oracle_json(*orc, cfg.seed);
        }
        for (auto& w : reduction_warnings(imm, h, red, orc)) rep["warnings"].push_back(w);
        break;
    }
    case Command::oracle:
        rep["oracle"] = oracle_json(affine_span_oracle(imm, cfg.samples, cfg.seed, cfg.tol.rank), cfg.seed);
        break;
    }
    return rep;
}

std::string render_text(const json& report) {
    // summary sections first, bulky per-point data last
    static const char* const order[] = {"version",  "spec",   "config", "hypotheses", "t1",      "eq13",
                                        "lemma2",   "theorem2", "reduction", "oracle", "warnings", "errors",
                                        "classification", "frames", "forms", "points"};
    std::ostringstream os;
    json rest = report;
    for (const char* key : order) {
        if (!report.contains(key)) continue;
        render(os, json{{key, report.at(key)}}, 0);
        rest.erase(key);
    }
    render(os, rest, 0);
    return os.str();
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    auto fail = [&](const char* kind, const std::string& stage, const std::string& msg, int code) {
        if (cfg.output == Output::json) {
            json rep = {{"version", kVersion},
                        {"config", config_json(cfg)},
                        {"warnings", json::array()},
                        {"errors", json::array({{{"kind", kind}, {"stage", stage}, {"message", msg}}})}};
            out << rep.dump(2) << "\n";
        }
        err << "error (" << kind << (stage.empty() ? "" : ", " + stage) << "): " << msg << "\n";
        return code;
    };
    try {
        const json rep = build_report(cfg);
        if (cfg.output == Output::json) out << rep.dump(2) << "\n";
        else out << render_text(rep);
        return kOk;
    } catch (const InputError& e) {
        return fail("input", "", e.what(), kInputError);
    } catch (const NumericalError& e) {
        return fail("numerical", e.stage(), e.what(), kNumericalError);
    } catch (const std::exception& e) {
        return fail("numerical", "internal", e.what(), kNumericalError);
    }
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Analyze lightlike and isotropic submanifolds of semi-Euclidean spaces", "lightlike"};
    app.set_version_flag("--version", kVersion);
    RunConfig cfg;
    std::string command, point, screen = "standard";
    const std::map<std::string, Command> commands = {{"frames", Command::frames}, {"forms", Command::forms},
                                                     {"check", Command::check},   {"reduce", Command::reduce},
                                                     {"scan", Command::scan},     {"oracle", Command::oracle}};
    app.add_option("command", command, "frames | forms | check | reduce | scan | oracle")
        ->required()
        ->check(CLI::IsMember({"frames", "forms", "check", "reduce", "scan", "oracle"}));
    app.add_option("spec", cfg.spec_path, "immersion spec file")->required();
    app.add_option("--grid", cfg.grid_per_param, "grid points per parameter (>= 3)");
    app.add_option("--point", point, "parameter point, comma separated (e.g. --point=0,0.5)");
    app.add_option("--tol-rank", cfg.tol.rank, "relative singular value threshold");
    app.add_option("--tol-null", cfg.tol.null, "null vector threshold");
    app.add_option("--tol-contain", cfg.tol.contain, "containment residual threshold");
    app.add_option("--tol-metric", cfg.tol.metric, "metricity threshold");
    app.add_option("--seed", cfg.seed, "quasi-random sampling offset");
    app.add_option("--samples", cfg.samples, "affine span oracle sample count");
    app.add_option("--screen", screen, "screen candidate order")->check(CLI::IsMember({"standard", "reversed"}));
    bool as_json = false;
    app.add_flag("--json", as_json, "emit JSON");

    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error (input): " << e.what() << "\n";
        return kInputError;
    }
    cfg.command = commands.at(command);
    cfg.output = as_json ? Output::json : Output::text;
    cfg.screen = screen == "reversed" ? ScreenOrder::reversed : ScreenOrder::standard;
    if (!point.empty()) {
        std::vector<double> p;
        if (!parse_point(point, p)) {
            err << "error (input): cannot parse --point '" << point << "'\n";
            return kInputError;
        }
        cfg.point = std::move(p);
    }
    return run(cfg, out, err);
}

} // namespace lightlike::cli
