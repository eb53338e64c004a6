#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "cofi/core/error.hpp"
#include "cofi/logic/ast.hpp"

namespace cofi::logic {

// Constitution source grammar:
//
//   program    := { statement }
//   statement  := ':-' directive '.' | clause
//   directive  := 'domain' '(' VAR ',' '[' const { ',' const } ']' ')'
//               | 'query' '(' atom ')'
//   clause     := NUMBER '::' atom [ ':-' body ] '.'
//               | atom '~' dist [ ':-' body ] '.'
//               | atom [ ':-' body ] '.'
//   dist       := 'normal' '(' NUMBER ',' NUMBER ')' | 'bernoulli' '(' NUMBER ')'
//   body       := literal { ',' literal }
//   literal    := '\+' atom
//               | atom [ cmp NUMBER | 'between' '[' NUMBER ',' NUMBER ']' ]
//   cmp        := '<' | '<=' | '=<' | '>' | '>='
//   atom       := IDENT [ '(' term { ',' term } ')' ]
//   term       := VAR | IDENT | NUMBER | QUOTED
//
// '%' starts a comment running to the end of the line.

namespace detail {

enum class Tok {
    Ident, Var, Number, Quoted,
    LParen, RParen, LBracket, RBracket, Comma, Dot,
    ColonColon, If, Tilde, Not,
    Lt, Le, Gt, Ge,
    End,
};

struct Token {
    Tok kind;
    std::string text;
    SourcePos pos;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            const SourcePos pos{line_, col_};
            if (i_ >= src_.size()) {
                out.push_back({Tok::End, "", pos});
                return out;
            }
            const char c = src_[i_];
            if (std::isdigit(static_cast<unsigned char>(c))) {
                out.push_back({Tok::Number, number(), pos});
            } else if (std::islower(static_cast<unsigned char>(c))) {
                out.push_back({Tok::Ident, word(), pos});
            } else if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
                out.push_back({Tok::Var, word(), pos});
            } else if (c == '\'' || c == '"') {
                out.push_back({Tok::Quoted, quoted(c), pos});
            } else {
                out.push_back(punct(pos));
            }
        }
    }

private:
    void advance() {
        if (src_[i_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++i_;
    }

    void skip_space() {
        while (i_ < src_.size()) {
            if (src_[i_] == '%') {
                while (i_ < src_.size() && src_[i_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(src_[i_]))) {
                advance();
            } else {
                break;
            }
        }
    }

    bool digit_at(std::size_t k) const {
        return k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]));
    }

    std::string number() {
        const std::size_t start = i_;
        while (digit_at(i_)) advance();
        if (i_ + 1 < src_.size() && src_[i_] == '.' && digit_at(i_ + 1)) {
            advance();
            while (digit_at(i_)) advance();
        }
        if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E')) {
            std::size_t k = i_ + 1;
            if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
            if (digit_at(k)) {
                while (i_ < k) advance();
                while (digit_at(i_)) advance();
            }
        }
        return std::string(src_.substr(start, i_ - start));
    }

    std::string word() {
        const std::size_t start = i_;
        while (i_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_'))
            advance();
        return std::string(src_.substr(start, i_ - start));
    }

    std::string quoted(char q) {
        const SourcePos pos{line_, col_};
        advance();
        std::string out;
        while (i_ < src_.size() && src_[i_] != q) {
            if (src_[i_] == '\n') break;
            out += src_[i_];
            advance();
        }
        if (i_ >= src_.size() || src_[i_] != q)
            throw ParseError("unterminated quoted constant", pos.line, pos.column);
        advance();
        return out;
    }

    Token punct(SourcePos pos) {
        auto take = [&](Tok k, int n) {
            std::string t(src_.substr(i_, static_cast<std::size_t>(n)));
            for (int j = 0; j < n; ++j) advance();
            return Token{k, t, pos};
        };
        auto next_is = [&](std::string_view s) { return src_.substr(i_, s.size()) == s; };
        if (next_is("::")) return take(Tok::ColonColon, 2);
        if (next_is(":-")) return take(Tok::If, 2);
        if (next_is("\\+")) return take(Tok::Not, 2);
        if (next_is("<=")) return take(Tok::Le, 2);
        if (next_is("=<")) return take(Tok::Le, 2);
        if (next_is(">=")) return take(Tok::Ge, 2);
        switch (src_[i_]) {
            case '(': return take(Tok::LParen, 1);
            case ')': return take(Tok::RParen, 1);
            case '[': return take(Tok::LBracket, 1);
            case ']': return take(Tok::RBracket, 1);
            case ',': return take(Tok::Comma, 1);
            case '.': return take(Tok::Dot, 1);
            case '~': return take(Tok::Tilde, 1);
            case '<': return take(Tok::Lt, 1);
            case '>': return take(Tok::Gt, 1);
            case '-':
                // Negative numbers are lexed as a single Number token.
                if (digit_at(i_ + 1)) {
                    advance();
                    return {Tok::Number, "-" + number(), pos};
                }
                break;
            default: break;
        }
        throw ParseError(std::string("unexpected character '") + src_[i_] + "'", pos.line, pos.column);
    }

    std::string_view src_;
    std::size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    Program program() {
        Program p;
        bool have_query = false;
        while (peek().kind != Tok::End) {
            if (peek().kind == Tok::If) {
                next();
                directive(p, have_query);
            } else {
                p.clauses.push_back(clause());
            }
        }
        return p;
    }

private:
    const Token& peek(std::size_t k = 0) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
    const Token& next() { return toks_[std::min(i_++, toks_.size() - 1)]; }

    [[noreturn]] void fail(const std::string& msg, const Token& at) const {
        throw ParseError(msg + (at.kind == Tok::End ? " at end of input" : " near '" + at.text + "'"),
                         at.pos.line, at.pos.column);
    }

    const Token& expect(Tok k, const char* what) {
        if (peek().kind != k) fail(std::string("expected ") + what, peek());
        return next();
    }

    double number_value(const Token& t) const {
        double v = 0.0;
        const char* b = t.text.data();
        const char* e = b + t.text.size();
        auto [ptr, ec] = std::from_chars(b, e, v);
        if (ec != std::errc() || ptr != e || !std::isfinite(v)) fail("invalid number", t);
        return v;
    }

    double number() { return number_value(expect(Tok::Number, "a number")); }

    void directive(Program& p, bool& have_query) {
        const Token& name = expect(Tok::Ident, "directive name");
        expect(Tok::LParen, "'('");
        if (name.text == "domain") {
            const Token& var = expect(Tok::Var, "a variable");
            expect(Tok::Comma, "','");
            expect(Tok::LBracket, "'['");
            auto& dom = p.domains[var.text];
            for (;;) {
                const Term t = term();
                if (t.is_variable()) fail("domain members must be constants", toks_[i_ - 1]);
                if (std::find(dom.begin(), dom.end(), t.name) == dom.end()) dom.push_back(t.name);
                if (peek().kind == Tok::Comma) {
                    next();
                    continue;
                }
                break;
            }
            expect(Tok::RBracket, "']'");
        } else if (name.text == "query") {
            if (have_query) fail("duplicate query directive", name);
            p.query = atom();
            have_query = true;
        } else {
            fail("unknown directive '" + name.text + "'", name);
        }
        expect(Tok::RParen, "')'");
        expect(Tok::Dot, "'.'");
    }

    Clause clause() {
        if (peek().kind == Tok::Number) {
            const Token& pt = next();
            const double prob = number_value(pt);
            if (prob < 0.0 || prob > 1.0) fail("probability outside [0, 1]", pt);
            expect(Tok::ColonColon, "'::'");
            CategoricalClause c{prob, atom(), {}};
            c.body = opt_body();
            expect(Tok::Dot, "'.'");
            return c;
        }
        Atom head = atom();
        if (peek().kind == Tok::Tilde) {
            next();
            ContinuousClause c{std::move(head), distribution(), {}};
            c.body = opt_body();
            expect(Tok::Dot, "'.'");
            return c;
        }
        CategoricalClause c{1.0, std::move(head), {}};
        c.body = opt_body();
        expect(Tok::Dot, "'.'");
        return c;
    }

    Distribution distribution() {
        const Token& name = expect(Tok::Ident, "a distribution");
        expect(Tok::LParen, "'('");
        Distribution d;
        if (name.text == "normal") {
            const double m = number();
            expect(Tok::Comma, "','");
            const Token& st = peek();
            const double s = number();
            if (!(s > 0.0)) fail("normal standard deviation must be positive", st);
            d = Normal{m, s};
        } else if (name.text == "bernoulli") {
            const Token& pt = peek();
            const double p = number();
            if (p < 0.0 || p > 1.0) fail("probability outside [0, 1]", pt);
            d = Bernoulli{p};
        } else {
            fail("unknown distribution '" + name.text + "'", name);
        }
        expect(Tok::RParen, "')'");
        return d;
    }

    std::vector<Literal> opt_body() {
        std::vector<Literal> body;
        if (peek().kind != Tok::If) return body;
        next();
        body.push_back(literal());
        while (peek().kind == Tok::Comma) {
            next();
            body.push_back(literal());
        }
        return body;
    }

    Literal literal() {
        if (peek().kind == Tok::Not) {
            next();
            return AtomLiteral{atom(), true};
        }
        Atom a = atom();
        auto cmp = [&](CmpOp op) {
            next();
            return Comparison{std::move(a), op, number(), 0.0};
        };
        switch (peek().kind) {
            case Tok::Lt: return cmp(CmpOp::Less);
            case Tok::Le: return cmp(CmpOp::LessEq);
            case Tok::Gt: return cmp(CmpOp::Greater);
            case Tok::Ge: return cmp(CmpOp::GreaterEq);
            default: break;
        }
        if (peek().kind == Tok::Ident && peek().text == "between") {
            next();
            expect(Tok::LBracket, "'['");
            const double lo = number();
            expect(Tok::Comma, "','");
            const Token& ht = peek();
            const double hi = number();
            expect(Tok::RBracket, "']'");
            if (!(lo <= hi)) fail("between bounds must satisfy lo <= hi", ht);
            return Comparison{std::move(a), CmpOp::Between, lo, hi};
        }
        return AtomLiteral{std::move(a), false};
    }

    Atom atom() {
        const Token& name = expect(Tok::Ident, "an atom");
        Atom a{name.text, {}, name.pos};
        if (peek().kind == Tok::LParen) {
            next();
            a.args.push_back(term());
            while (peek().kind == Tok::Comma) {
                next();
                a.args.push_back(term());
            }
            expect(Tok::RParen, "')'");
        }
        return a;
    }

    Term term() {
        const Token& t = next();
        switch (t.kind) {
            case Tok::Var: return Term::variable(t.text);
            case Tok::Ident:
            case Tok::Number:
            case Tok::Quoted: return Term::constant(t.text);
            default: fail("expected a term", t);
        }
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
};

}  // namespace detail

/// Parses constitution source text.
inline Program parse(std::string_view text) {
    return detail::Parser(detail::Lexer(text).run()).program();
}

}  // namespace cofi::logic
