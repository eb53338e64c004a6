#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace cofi::logic {

struct SourcePos {
    int line = 0;
    int column = 0;
};

/// Constant or variable. Variables start with an uppercase letter or '_';
/// numeric constants keep their source spelling.
struct Term {
    enum class Kind { Constant, Variable };
    Kind kind = Kind::Constant;
    std::string name;

    static Term constant(std::string n) { return {Kind::Constant, std::move(n)}; }
    static Term variable(std::string n) { return {Kind::Variable, std::move(n)}; }
    bool is_variable() const noexcept { return kind == Kind::Variable; }

    friend bool operator==(const Term&, const Term&) = default;
};

struct Atom {
    std::string predicate;
    std::vector<Term> args;
    SourcePos pos{};

    bool is_ground() const noexcept {
        for (const auto& t : args)
            if (t.is_variable()) return false;
        return true;
    }

    /// Structural equality; source positions are ignored.
    friend bool operator==(const Atom& a, const Atom& b) {
        return a.predicate == b.predicate && a.args == b.args;
    }
};

/// Canonical text of an atom, e.g. "distance(x,road)". Used as the ground
/// atom key throughout inference.
inline std::string atom_key(const Atom& a) {
    std::string s = a.predicate;
    if (a.args.empty()) return s;
    s += '(';
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) s += ',';
        s += a.args[i].name;
    }
    s += ')';
    return s;
}

struct AtomLiteral {
    Atom atom;
    bool negated = false;
    friend bool operator==(const AtomLiteral&, const AtomLiteral&) = default;
};

enum class CmpOp { Less, LessEq, Greater, GreaterEq, Between };

/// Threshold test on a continuous atom: `lhs op lo`, or `lhs between [lo, hi]`.
struct Comparison {
    Atom lhs;
    CmpOp op = CmpOp::Greater;
    double lo = 0.0;
    double hi = 0.0;
    friend bool operator==(const Comparison&, const Comparison&) = default;
};

using Literal = std::variant<AtomLiteral, Comparison>;

struct Normal {
    double mean = 0.0;
    double std = 1.0;
    friend bool operator==(const Normal&, const Normal&) = default;
};

struct Bernoulli {
    double p = 0.5;
    friend bool operator==(const Bernoulli&, const Bernoulli&) = default;
};

using Distribution = std::variant<Normal, Bernoulli>;

/// `p :: head :- body.`  A plain rule or fact has p = 1.
struct CategoricalClause {
    double prob = 1.0;
    Atom head;
    std::vector<Literal> body;
    friend bool operator==(const CategoricalClause&, const CategoricalClause&) = default;
};

/// `head ~ dist :- body.`
struct ContinuousClause {
    Atom head;
    Distribution dist;
    std::vector<Literal> body;
    friend bool operator==(const ContinuousClause&, const ContinuousClause&) = default;
};

using Clause = std::variant<CategoricalClause, ContinuousClause>;

inline const Atom& head_of(const Clause& c) {
    return std::visit([](const auto& cl) -> const Atom& { return cl.head; }, c);
}

inline const std::vector<Literal>& body_of(const Clause& c) {
    return std::visit([](const auto& cl) -> const std::vector<Literal>& { return cl.body; }, c);
}

inline Atom default_query() {
    return {"constitution", {Term::variable("X"), Term::variable("Z")}, {}};
}

/// A constitution: clauses, the query atom and finite variable domains.
/// Domains are keyed by variable name and apply in every clause.
struct Program {
    std::vector<Clause> clauses;
    Atom query = default_query();
    std::map<std::string, std::vector<std::string>> domains;

    friend bool operator==(const Program&, const Program&) = default;
};

/// Concatenation of sub-programs (background, perception, environment).
/// Later domain declarations for the same variable extend earlier ones.
inline Program merge(Program base, const Program& extra) {
    base.clauses.insert(base.clauses.end(), extra.clauses.begin(), extra.clauses.end());
    for (const auto& [var, consts] : extra.domains) {
        auto& d = base.domains[var];
        for (const auto& c : consts)
            if (std::find(d.begin(), d.end(), c) == d.end()) d.push_back(c);
    }
    if (!(extra.query == default_query())) base.query = extra.query;
    return base;
}

}  // namespace cofi::logic
