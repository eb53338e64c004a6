#pragma once

#include <cctype>
#include <charconv>
#include <string>
#include <variant>

#include "cofi/logic/ast.hpp"

namespace cofi::logic {

/// Shortest decimal text that parses back to the same double.
inline std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, ptr);
    // Keep the text inside the DSL's number syntax: "1e-05" is fine, "inf" is not.
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
}

namespace detail {

inline bool plain_constant(const std::string& s) {
    if (s.empty()) return false;
    const auto c0 = static_cast<unsigned char>(s[0]);
    if (std::islower(c0)) {
        for (char c : s)
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
        return true;
    }
    // Numeric constants are kept verbatim from the source.
    if (std::isdigit(c0) || (s[0] == '-' && s.size() > 1)) {
        double v;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        return ec == std::errc() && ptr == s.data() + s.size();
    }
    return false;
}

inline std::string term_text(const Term& t) {
    if (t.is_variable() || plain_constant(t.name)) return t.name;
    return "'" + t.name + "'";
}

inline std::string atom_text(const Atom& a) {
    std::string s = a.predicate;
    if (a.args.empty()) return s;
    s += '(';
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) s += ", ";
        s += term_text(a.args[i]);
    }
    return s + ')';
}

inline std::string literal_text(const Literal& l) {
    if (const auto* al = std::get_if<AtomLiteral>(&l))
        return (al->negated ? "\\+ " : "") + atom_text(al->atom);
    const auto& c = std::get<Comparison>(l);
    const std::string lhs = atom_text(c.lhs);
    switch (c.op) {
        case CmpOp::Less: return lhs + " < " + format_number(c.lo);
        case CmpOp::LessEq: return lhs + " <= " + format_number(c.lo);
        case CmpOp::Greater: return lhs + " > " + format_number(c.lo);
        case CmpOp::GreaterEq: return lhs + " >= " + format_number(c.lo);
        case CmpOp::Between:
            return lhs + " between [" + format_number(c.lo) + ", " + format_number(c.hi) + "]";
    }
    return lhs;
}

inline std::string body_text(const std::vector<Literal>& body) {
    if (body.empty()) return "";
    std::string s = " :- ";
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (i) s += ", ";
        s += literal_text(body[i]);
    }
    return s;
}

}  // namespace detail

inline std::string to_string(const Clause& clause) {
    if (const auto* c = std::get_if<CategoricalClause>(&clause)) {
        const std::string prefix = c->prob == 1.0 ? "" : format_number(c->prob) + " :: ";
        return prefix + detail::atom_text(c->head) + detail::body_text(c->body) + ".";
    }
    const auto& c = std::get<ContinuousClause>(clause);
    std::string dist;
    if (const auto* n = std::get_if<Normal>(&c.dist))
        dist = "normal(" + format_number(n->mean) + ", " + format_number(n->std) + ")";
    else
        dist = "bernoulli(" + format_number(std::get<Bernoulli>(c.dist).p) + ")";
    return detail::atom_text(c.head) + " ~ " + dist + detail::body_text(c.body) + ".";
}

/// Normative formatting: domain directives (sorted by variable), a query
/// directive when the query is not the default, then one clause per line.
inline std::string pretty_print(const Program& p) {
    std::string out;
    for (const auto& [var, consts] : p.domains) {
        out += ":- domain(" + var + ", [";
        for (std::size_t i = 0; i < consts.size(); ++i) {
            if (i) out += ", ";
            out += detail::term_text(Term::constant(consts[i]));
        }
        out += "]).\n";
    }
    if (!(p.query == default_query())) out += ":- query(" + detail::atom_text(p.query) + ").\n";
    for (const auto& c : p.clauses) out += to_string(c) + "\n";
    return out;
}

}  // namespace cofi::logic
