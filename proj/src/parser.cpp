#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "lightlike/error.hpp"
#include "lightlike/immersion.hpp"

namespace lightlike {

namespace {

using expr::Expr;

enum class Tok { ident, number, punct, end };

struct Token {
    Tok type = Tok::end;
    std::string text;
    double number = 0.0;
    int line = 1;
    int column = 1;
};

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    int line = 1;
    int col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t k) {
        for (std::size_t j = 0; j < k; ++j, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < src.size()) {
        const char c = src[i];
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        Token t;
        t.line = line;
        t.column = col;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            t.type = Tok::ident;
            t.text = std::string(src.substr(i, j - i));
            advance(j - i);
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            if (j < src.size() && src[j] == '.') {
                ++j;
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            }
            // exponent only when digits follow, so "2e" stays number then constant e
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
                    while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
                    j = k;
                }
            }
            t.type = Tok::number;
            t.text = std::string(src.substr(i, j - i));
            const auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
            if (res.ec != std::errc{} || res.ptr != t.text.data() + t.text.size())
                throw SyntaxError("malformed number '" + t.text + "'", line, col);
            advance(j - i);
        } else if (std::string_view("()[]{},:=+-*/^").find(c) != std::string_view::npos) {
            t.type = Tok::punct;
            t.text = std::string(1, c);
            advance(1);
        } else {
            throw SyntaxError(std::string("unexpected character '") + c + "'", line, col);
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.type = Tok::end;
    end.line = line;
    end.column = col;
    out.push_back(end);
    return out;
}

bool is_reserved(const std::string& name) {
    expr::Func f;
    return name == "pi" || name == "e" || expr::lookup_func(name, f);
}

class Parser {
public:
    Parser(const std::vector<Token>& toks, std::size_t begin, std::size_t end,
           const std::vector<std::string>& params)
        : toks_(toks), pos_(begin), end_(end), params_(params) {}

    const Token& peek() const { return pos_ < end_ ? toks_[pos_] : toks_[end_]; }
    bool at_end() const { return pos_ >= end_; }

    bool accept(const char* punct) {
        if (!at_end() && peek().type == Tok::punct && peek().text == punct) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(const char* punct) {
        if (!accept(punct)) fail(std::string("expected '") + punct + "'");
    }

    [[noreturn]] void fail(const std::string& msg) const {
        const Token& t = peek();
        const std::string found = t.type == Tok::end || at_end() ? "end of statement" : "'" + t.text + "'";
        throw SyntaxError(msg + ", found " + found, t.line, t.column);
    }

    Expr expression() {
        Expr lhs = term();
        while (true) {
            if (accept("+")) {
                lhs = Expr::raw_binary(expr::BinOp::add, lhs, term());
            } else if (accept("-")) {
                lhs = Expr::raw_binary(expr::BinOp::sub, lhs, term());
            } else {
                return lhs;
            }
        }
    }

    double signed_number() {
        double sign = 1.0;
        if (accept("-")) sign = -1.0;
        else accept("+");
        if (at_end() || peek().type != Tok::number) fail("expected number");
        return sign * toks_[pos_++].number;
    }

    int integer() {
        const Token& t = peek();
        if (at_end() || t.type != Tok::number || t.number != std::floor(t.number) || t.number < 0)
            fail("expected non-negative integer");
        ++pos_;
        return static_cast<int>(t.number);
    }

    std::string identifier() {
        if (at_end() || peek().type != Tok::ident) fail("expected identifier");
        return toks_[pos_++].text;
    }

    // Expression that must not reference parameters.
    double constant_expression() {
        const Token start = peek();
        Expr e = expression();
        if (!e.is_constant()) throw SyntaxError("expected a constant expression", start.line, start.column);
        return e.evaluate({});
    }

    std::size_t position() const { return pos_; }

private:
    Expr term() {
        Expr lhs = factor();
        while (true) {
            if (accept("*")) {
                lhs = Expr::raw_binary(expr::BinOp::mul, lhs, factor());
            } else if (accept("/")) {
                lhs = Expr::raw_binary(expr::BinOp::div, lhs, factor());
            } else {
                return lhs;
            }
        }
    }

    Expr factor() {
        if (accept("-")) return Expr::raw_neg(factor());
        Expr b = base();
        if (accept("^")) return Expr::raw_pow(b, signed_number());
        return b;
    }

    Expr base() {
        if (at_end()) fail("expected expression");
        const Token& t = peek();
        if (t.type == Tok::number) {
            ++pos_;
            return Expr::number(t.number);
        }
        if (accept("(")) {
            Expr inner = expression();
            expect(")");
            return inner;
        }
        if (t.type == Tok::ident) {
            ++pos_;
            expr::Func f;
            if (expr::lookup_func(t.text, f)) {
                expect("(");
                Expr arg = expression();
                expect(")");
                return Expr::call(f, arg);
            }
            if (t.text == "pi") return Expr::constant(expr::Named::pi);
            if (t.text == "e") return Expr::constant(expr::Named::e);
            const auto it = std::find(params_.begin(), params_.end(), t.text);
            if (it == params_.end()) throw SyntaxError("unknown identifier '" + t.text + "'", t.line, t.column);
            return Expr::param(static_cast<int>(it - params_.begin()), t.text);
        }
        fail("expected expression");
    }

    const std::vector<Token>& toks_;
    std::size_t pos_;
    std::size_t end_;
    const std::vector<std::string>& params_;
};

struct Statement {
    const Token* key = nullptr;
    std::size_t begin = 0;  // first value token
    std::size_t end = 0;    // one past last value token
};

} // namespace

ImmersionSpec parse_immersion(std::string_view text) {
    const std::vector<Token> toks = tokenize(text);
    const std::size_t last = toks.size() - 1;  // index of end token

    std::map<std::string, Statement> stmts;
    std::size_t i = 0;
    while (i < last) {
        const Token& key = toks[i];
        if (key.type != Tok::ident) throw SyntaxError("expected statement key, found '" + key.text + "'", key.line, key.column);
        if (i + 1 >= last || toks[i + 1].text != "=")
            throw SyntaxError("expected '=' after '" + key.text + "'", toks[i + 1].line, toks[i + 1].column);
        static const std::vector<std::string> known = {"signature", "curvature", "params", "domain", "map"};
        if (std::find(known.begin(), known.end(), key.text) == known.end())
            throw SyntaxError("unknown statement '" + key.text + "'", key.line, key.column);
        if (stmts.count(key.text)) throw SyntaxError("duplicate statement '" + key.text + "'", key.line, key.column);
        std::size_t j = i + 2;
        int depth = 0;
        while (j < last) {
            const Token& t = toks[j];
            if (depth == 0 && t.type == Tok::ident && j + 1 < last && toks[j + 1].text == "=") break;
            if (t.type == Tok::punct) {
                if (t.text == "(" || t.text == "[" || t.text == "{") ++depth;
                if (t.text == ")" || t.text == "]" || t.text == "}") --depth;
            }
            ++j;
        }
        if (j == i + 2) throw SyntaxError("missing value for '" + key.text + "'", key.line, key.column);
        stmts[key.text] = Statement{&key, i + 2, j};
        i = j;
    }

    for (const char* required : {"signature", "params", "domain", "map"}) {
        if (!stmts.count(required)) throw InputError(std::string("missing required statement '") + required + "'");
    }

    ImmersionSpec spec;
    const std::vector<std::string> no_params;
    auto finish = [](Parser& p) {
        if (!p.at_end()) p.fail("unexpected token");
    };

    {
        const Statement& s = stmts["signature"];
        Parser p(toks, s.begin, s.end, no_params);
        p.expect("(");
        spec.signature.neg = p.integer();
        p.expect(",");
        spec.signature.pos = p.integer();
        p.expect(")");
        finish(p);
    }
    if (stmts.count("curvature")) {
        const Statement& s = stmts["curvature"];
        Parser p(toks, s.begin, s.end, no_params);
        spec.curvature = p.constant_expression();
        finish(p);
    }
    {
        const Statement& s = stmts["params"];
        Parser p(toks, s.begin, s.end, no_params);
        p.expect("[");
        if (!p.accept("]")) {
            do {
                const Token& t = p.peek();
                std::string name = p.identifier();
                if (is_reserved(name)) throw SyntaxError("parameter name '" + name + "' is reserved", t.line, t.column);
                if (std::find(spec.params.begin(), spec.params.end(), name) != spec.params.end())
                    throw SyntaxError("duplicate parameter '" + name + "'", t.line, t.column);
                spec.params.push_back(std::move(name));
            } while (p.accept(","));
            p.expect("]");
        }
        finish(p);
    }
    spec.domain.assign(spec.params.size(), Interval{});
    {
        const Statement& s = stmts["domain"];
        Parser p(toks, s.begin, s.end, no_params);
        std::vector<bool> seen(spec.params.size(), false);
        p.expect("{");
        if (!p.accept("}")) {
            do {
                const Token& t = p.peek();
                const std::string name = p.identifier();
                const auto it = std::find(spec.params.begin(), spec.params.end(), name);
                if (it == spec.params.end()) throw SyntaxError("unknown identifier '" + name + "'", t.line, t.column);
                const auto k = static_cast<std::size_t>(it - spec.params.begin());
                if (seen[k]) throw SyntaxError("duplicate domain entry '" + name + "'", t.line, t.column);
                seen[k] = true;
                p.expect(":");
                p.expect("[");
                const double lo = p.constant_expression();
                p.expect(",");
                const double hi = p.constant_expression();
                p.expect("]");
                if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
                    throw SyntaxError("empty domain interval for '" + name + "'", t.line, t.column);
                spec.domain[k] = Interval{lo, hi};
            } while (p.accept(","));
            p.expect("}");
        }
        finish(p);
        for (std::size_t k = 0; k < seen.size(); ++k) {
            if (!seen[k]) throw InputError("empty domain: no interval given for parameter '" + spec.params[k] + "'");
        }
    }
    {
        const Statement& s = stmts["map"];
        Parser p(toks, s.begin, s.end, spec.params);
        p.expect("[");
        if (!p.accept("]")) {
            do {
                spec.components.push_back(p.expression());
            } while (p.accept(","));
            p.expect("]");
        }
        finish(p);
    }

    const int n = spec.n();
    const int dim = spec.signature.dim();
    if (n < 1) throw InputError("at least one parameter is required");
    if (dim < 2) throw InputError("ambient dimension neg + pos must be at least 2");
    if (n >= dim) throw InputError("parameter count must be smaller than the ambient dimension");
    if (static_cast<int>(spec.components.size()) != dim) {
        std::ostringstream os;
        os << "component count mismatch: map has " << spec.components.size() << " components but signature ("
           << spec.signature.neg << ", " << spec.signature.pos << ") requires " << dim;
        throw InputError(os.str());
    }
    if (!std::isfinite(spec.curvature)) throw InputError("curvature must be finite");
    return spec;
}

ImmersionSpec load_immersion(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read spec file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_immersion(ss.str());
}

expr::Expr parse_expression(std::string_view text, const std::vector<std::string>& params) {
    const std::vector<Token> toks = tokenize(text);
    Parser p(toks, 0, toks.size() - 1, params);
    Expr e = p.expression();
    if (!p.at_end()) p.fail("unexpected token");
    return e;
}

} // namespace lightlike
