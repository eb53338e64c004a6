#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "cofi/core/error.hpp"
#include "cofi/core/normal.hpp"
#include "cofi/logic/ast.hpp"

namespace cofi::logic {

struct GroundLiteral {
    int atom = -1;
    bool negated = false;
    friend bool operator==(const GroundLiteral&, const GroundLiteral&) = default;
};

struct GroundRule {
    int head = -1;
    std::vector<GroundLiteral> body;
};

/// Independent Bernoulli choice. The atom is defined by this fact alone.
struct ProbabilisticFact {
    int atom = -1;
    double p = 0.0;
};

/// Propositional program: independent probabilistic facts plus deterministic
/// rules over ground atoms, restricted to what the query depends on.
///
/// Atoms named with a leading '#' are auxiliary (hidden choices of
/// probabilistic rules, comparison intervals) and never occur in source text.
struct GroundProgram {
    std::vector<std::string> atoms;
    std::vector<ProbabilisticFact> facts;
    std::vector<GroundRule> rules;
    /// Derived (non-fact) atoms in dependency order.
    std::vector<int> derived_order;
    int query = -1;

    int find(const std::string& key) const {
        auto it = std::find(atoms.begin(), atoms.end(), key);
        return it == atoms.end() ? -1 : static_cast<int>(it - atoms.begin());
    }
};

/// P(lo_bound < X <= hi_bound) style probability of a comparison on Normal(mean, std).
inline double comparison_probability(const Normal& d, CmpOp op, double lo, double hi = 0.0) {
    switch (op) {
        case CmpOp::Less:
        case CmpOp::LessEq: return normal_cdf(lo, d.mean, d.std);
        case CmpOp::Greater:
        case CmpOp::GreaterEq: return 1.0 - normal_cdf(lo, d.mean, d.std);
        case CmpOp::Between: return normal_cdf(hi, d.mean, d.std) - normal_cdf(lo, d.mean, d.std);
    }
    return 0.0;
}

namespace detail {

using Subst = std::map<std::string, std::string>;

inline Atom substitute(const Atom& a, const Subst& s) {
    Atom out = a;
    for (auto& t : out.args)
        if (t.is_variable()) t = Term::constant(s.at(t.name));
    return out;
}

inline Literal substitute(const Literal& l, const Subst& s) {
    if (const auto* al = std::get_if<AtomLiteral>(&l)) return AtomLiteral{substitute(al->atom, s), al->negated};
    auto c = std::get<Comparison>(l);
    c.lhs = substitute(c.lhs, s);
    return c;
}

inline void collect_vars(const Atom& a, std::set<std::string>& out) {
    for (const auto& t : a.args)
        if (t.is_variable()) out.insert(t.name);
}

inline std::string where(const Atom& a) {
    return "line " + std::to_string(a.pos.line) + " ('" + atom_key(a) + "')";
}

/// Expands a clause over the cartesian product of its variables' domains.
inline std::vector<Clause> instantiate(const Clause& c, const Program& p) {
    std::set<std::string> vars;
    collect_vars(head_of(c), vars);
    for (const auto& l : body_of(c)) {
        if (const auto* al = std::get_if<AtomLiteral>(&l)) collect_vars(al->atom, vars);
        else collect_vars(std::get<Comparison>(l).lhs, vars);
    }
    std::vector<std::pair<std::string, const std::vector<std::string>*>> doms;
    for (const auto& v : vars) {
        auto it = p.domains.find(v);
        if (it == p.domains.end() || it->second.empty())
            throw UnsupportedProgramError("unbound variable sort: " + v + " in clause at " +
                                          where(head_of(c)));
        doms.emplace_back(v, &it->second);
    }
    std::vector<Clause> out;
    Subst s;
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (k == doms.size()) {
            Clause g = c;
            std::visit(
                [&](auto& cl) {
                    cl.head = substitute(cl.head, s);
                    for (auto& l : cl.body) l = substitute(l, s);
                },
                g);
            out.push_back(std::move(g));
            return;
        }
        for (const auto& value : *doms[k].second) {
            s[doms[k].first] = value;
            rec(k + 1);
        }
    };
    rec(0);
    return out;
}

}  // namespace detail

/// Grounds `program` for its query atom (which must be ground).
///
/// Continuous atoms may only be used in comparisons; all comparisons on one
/// continuous atom are compiled together into an exclusive choice over the
/// intervals between their thresholds, encoded as a chain of independent
/// Bernoulli facts. Only clauses the query depends on are kept.
inline GroundProgram ground(const Program& program) {
    if (!program.query.is_ground())
        throw UnsupportedProgramError("query '" + atom_key(program.query) + "' is not ground");
    {
        bool defined = false;
        for (const auto& c : program.clauses) defined |= head_of(c).predicate == program.query.predicate;
        if (!defined)
            throw UnsupportedProgramError("query predicate '" + program.query.predicate + "' is not defined");
    }

    // Ground clauses indexed by head key.
    std::unordered_map<std::string, std::vector<Clause>> by_head;
    for (const auto& c : program.clauses)
        for (auto& g : detail::instantiate(c, program)) by_head[atom_key(head_of(g))].push_back(std::move(g));

    GroundProgram gp;
    std::unordered_map<std::string, int> ids;
    auto intern = [&](const std::string& key) {
        auto [it, fresh] = ids.emplace(key, static_cast<int>(gp.atoms.size()));
        if (fresh) gp.atoms.push_back(key);
        return it->second;
    };
    std::vector<std::vector<int>> deps;  // atom -> atoms its definition uses
    auto dep = [&](int a, int b) {
        if (deps.size() <= static_cast<std::size_t>(std::max(a, b))) deps.resize(static_cast<std::size_t>(std::max(a, b)) + 1);
        deps[static_cast<std::size_t>(a)].push_back(b);
    };
    auto add_rule = [&](int head, std::vector<GroundLiteral> body) {
        for (const auto& l : body) dep(head, l.atom);
        gp.rules.push_back({head, std::move(body)});
    };
    std::set<int> fact_atoms;
    auto add_fact = [&](int atom, double p) {
        gp.facts.push_back({atom, p});
        fact_atoms.insert(atom);
    };

    // Atoms reachable from the query through clause bodies.
    std::set<std::string> reachable;
    {
        std::vector<std::string> todo{atom_key(program.query)};
        while (!todo.empty()) {
            auto key = std::move(todo.back());
            todo.pop_back();
            if (!reachable.insert(key).second) continue;
            auto it = by_head.find(key);
            if (it == by_head.end()) continue;
            for (const auto& c : it->second)
                for (const auto& l : body_of(c)) {
                    if (const auto* al = std::get_if<AtomLiteral>(&l)) todo.push_back(atom_key(al->atom));
                    else todo.push_back(atom_key(std::get<Comparison>(l).lhs));
                }
        }
    }

    // Thresholds used against each continuous atom.
    std::map<std::string, std::vector<double>> thresholds;
    for (const auto& key : reachable)
        if (auto it = by_head.find(key); it != by_head.end())
            for (const auto& c : it->second)
            for (const auto& l : body_of(c))
                if (const auto* cmp = std::get_if<Comparison>(&l)) {
                    auto& t = thresholds[atom_key(cmp->lhs)];
                    t.push_back(cmp->lo);
                    if (cmp->op == CmpOp::Between) t.push_back(cmp->hi);
                }
    for (auto& [_, t] : thresholds) {
        std::sort(t.begin(), t.end());
        t.erase(std::unique(t.begin(), t.end()), t.end());
    }

    std::set<std::string> visited;
    std::map<std::string, int> comparison_atoms;
    int hidden = 0;

    std::function<std::vector<GroundLiteral>(const std::vector<Literal>&)> lower_body;

    // Interval atoms "#iv(k,atom)" for a continuous atom, created once.
    std::map<std::string, std::vector<int>> interval_atoms;
    auto intervals_for = [&](const std::string& key, const Normal& d) -> const std::vector<int>& {
        auto it = interval_atoms.find(key);
        if (it != interval_atoms.end()) return it->second;
        const auto& t = thresholds[key];
        std::vector<int> iv;
        std::vector<GroundLiteral> none_before;
        double remaining = 1.0, prev_cdf = 0.0;
        for (std::size_t k = 0; k <= t.size(); ++k) {
            const int atom = intern("#iv(" + std::to_string(k) + "," + key + ")");
            iv.push_back(atom);
            if (k == t.size()) {
                add_rule(atom, none_before);
                break;
            }
            const double cdf = normal_cdf(t[k], d.mean, d.std);
            const double mass = std::max(0.0, cdf - prev_cdf);
            prev_cdf = cdf;
            const double p = remaining > 0.0 ? std::clamp(mass / remaining, 0.0, 1.0) : 0.0;
            remaining = std::max(0.0, remaining - mass);
            const int choice = intern("#ivc(" + std::to_string(k) + "," + key + ")");
            add_fact(choice, p);
            auto body = none_before;
            body.push_back({choice, false});
            add_rule(atom, std::move(body));
            none_before.push_back({choice, true});
        }
        return interval_atoms.emplace(key, std::move(iv)).first->second;
    };

    std::function<void(const std::string&)> define;

    auto lower_comparison = [&](const Comparison& cmp) -> int {
        const std::string key = atom_key(cmp.lhs);
        std::string cmp_key = "#cmp(" + key + ",";
        switch (cmp.op) {
            case CmpOp::Less: case CmpOp::LessEq: cmp_key += "lt," + std::to_string(cmp.lo); break;
            case CmpOp::Greater: case CmpOp::GreaterEq: cmp_key += "gt," + std::to_string(cmp.lo); break;
            case CmpOp::Between:
                cmp_key += "in," + std::to_string(cmp.lo) + "," + std::to_string(cmp.hi);
                break;
        }
        cmp_key += ")";
        if (auto it = comparison_atoms.find(cmp_key); it != comparison_atoms.end()) return it->second;

        auto hit = by_head.find(key);
        const ContinuousClause* source = nullptr;
        if (hit != by_head.end())
            for (const auto& c : hit->second) {
                if (const auto* cc = std::get_if<ContinuousClause>(&c)) {
                    if (source)
                        throw UnsupportedProgramError("continuous atom '" + key + "' has more than one distribution clause");
                    source = cc;
                } else {
                    throw UnsupportedProgramError("atom '" + key + "' mixes categorical and continuous clauses");
                }
            }
        if (!source)
            throw UnsupportedProgramError("comparison on '" + key + "' at " + detail::where(cmp.lhs) +
                                          " which has no continuous clause");
        const auto* normal = std::get_if<Normal>(&source->dist);
        if (!normal)
            throw UnsupportedProgramError("comparison on '" + key + "' which is not normally distributed");

        const int atom = intern(cmp_key);
        comparison_atoms.emplace(cmp_key, atom);
        const auto& t = thresholds[key];
        const auto& iv = intervals_for(key, *normal);
        // Interval k spans (t[k-1], t[k]].
        auto lower_index = [&](double x) {
            return static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), x) - t.begin());
        };
        std::size_t first = 0, last = t.size();
        switch (cmp.op) {
            case CmpOp::Less: case CmpOp::LessEq: last = lower_index(cmp.lo); break;
            case CmpOp::Greater: case CmpOp::GreaterEq: first = lower_index(cmp.lo) + 1; break;
            case CmpOp::Between:
                first = lower_index(cmp.lo) + 1;
                last = lower_index(cmp.hi);
                break;
        }
        const auto source_body = lower_body(source->body);
        for (std::size_t k = first; k <= last && k < iv.size(); ++k) {
            auto body = source_body;
            body.push_back({iv[k], false});
            add_rule(atom, std::move(body));
        }
        return atom;
    };

    lower_body = [&](const std::vector<Literal>& body) {
        std::vector<GroundLiteral> out;
        for (const auto& l : body) {
            if (const auto* al = std::get_if<AtomLiteral>(&l)) {
                const std::string key = atom_key(al->atom);
                out.push_back({intern(key), al->negated});
                define(key);
            } else {
                out.push_back({lower_comparison(std::get<Comparison>(l)), false});
            }
        }
        return out;
    };

    define = [&](const std::string& key) {
        if (!visited.insert(key).second) return;
        const int head = intern(key);
        auto it = by_head.find(key);
        if (it == by_head.end()) return;  // no clause: always false
        const auto& clauses = it->second;
        const bool single_fact = clauses.size() == 1 &&
                                 std::holds_alternative<CategoricalClause>(clauses[0]) &&
                                 body_of(clauses[0]).empty();
        for (const auto& c : clauses) {
            if (std::holds_alternative<ContinuousClause>(c)) {
                const auto& cc = std::get<ContinuousClause>(c);
                if (const auto* b = std::get_if<Bernoulli>(&cc.dist)) {
                    const int choice = intern("#h" + std::to_string(hidden++) + "(" + key + ")");
                    add_fact(choice, b->p);
                    auto body = lower_body(cc.body);
                    body.push_back({choice, false});
                    add_rule(head, std::move(body));
                    continue;
                }
                throw UnsupportedProgramError("continuous atom '" + key +
                                              "' used as a plain literal; compare it against a threshold");
            }
            const auto& cat = std::get<CategoricalClause>(c);
            if (cat.prob == 0.0) continue;
            if (single_fact && cat.prob < 1.0) {
                add_fact(head, cat.prob);
                continue;
            }
            auto body = lower_body(cat.body);
            if (cat.prob < 1.0) {
                const int choice = intern("#h" + std::to_string(hidden++) + "(" + key + ")");
                add_fact(choice, cat.prob);
                body.push_back({choice, false});
            }
            add_rule(head, std::move(body));
        }
    };

    const std::string qkey = atom_key(program.query);
    gp.query = intern(qkey);
    define(qkey);

    // Dependency order over derived atoms; any cycle is rejected.
    deps.resize(gp.atoms.size());
    std::vector<int> state(gp.atoms.size(), 0);
    std::function<void(int)> visit = [&](int a) {
        auto& s = state[static_cast<std::size_t>(a)];
        if (s == 2) return;
        if (s == 1) throw UnsupportedProgramError("cyclic dependency through '" + gp.atoms[static_cast<std::size_t>(a)] + "'");
        s = 1;
        for (int b : deps[static_cast<std::size_t>(a)]) visit(b);
        s = 2;
        if (!fact_atoms.count(a)) gp.derived_order.push_back(a);
    };
    for (int a = 0; a < static_cast<int>(gp.atoms.size()); ++a) visit(a);
    return gp;
}

}  // namespace cofi::logic
