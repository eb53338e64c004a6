#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "cofi/core/error.hpp"
#include "cofi/logic/ast.hpp"
#include "cofi/logic/ground.hpp"

namespace cofi::logic {

struct InferenceOptions {
    /// Largest number of probabilistic facts accepted for enumeration.
    std::size_t max_probabilistic_atoms = 24;
};

namespace detail {

enum class Tri : std::uint8_t { False = 0, True = 1, Unknown = 2 };

inline Tri tri_not(Tri v) {
    return v == Tri::Unknown ? Tri::Unknown : (v == Tri::True ? Tri::False : Tri::True);
}

/// Weighted model counting by enumeration of fact assignments.
///
/// Facts are assigned one at a time; after each assignment the rules are
/// evaluated in three-valued (Kleene) logic in dependency order. Because the
/// program is acyclic, any atom that evaluates to true or false under a
/// partial assignment keeps that value in every completion, so the branch can
/// stop as soon as the query is decided. Sub-results are memoized on the
/// residual program: the status of every derived atom plus the values of the
/// assigned facts still read by an undecided rule.
class ModelCounter {
public:
    explicit ModelCounter(const GroundProgram& gp) : gp_(gp), value_(gp.atoms.size(), Tri::False) {
        rules_of_.resize(gp.atoms.size());
        for (std::size_t r = 0; r < gp.rules.size(); ++r)
            rules_of_[static_cast<std::size_t>(gp.rules[r].head)].push_back(r);
        readers_.resize(gp.atoms.size());
        for (std::size_t r = 0; r < gp.rules.size(); ++r)
            for (const auto& l : gp.rules[r].body) readers_[static_cast<std::size_t>(l.atom)].push_back(r);
        fact_index_.assign(gp.atoms.size(), -1);
        for (std::size_t f = 0; f < gp.facts.size(); ++f) {
            fact_index_[static_cast<std::size_t>(gp.facts[f].atom)] = static_cast<int>(f);
            value_[static_cast<std::size_t>(gp.facts[f].atom)] = Tri::Unknown;
        }
    }

    double probability(int query) {
        query_ = query;
        memo_.clear();
        return solve(0);
    }

private:
    Tri eval_rule(std::size_t r) const {
        Tri acc = Tri::True;
        for (const auto& l : gp_.rules[r].body) {
            Tri v = value_[static_cast<std::size_t>(l.atom)];
            if (l.negated) v = tri_not(v);
            if (v == Tri::False) return Tri::False;
            if (v == Tri::Unknown) acc = Tri::Unknown;
        }
        return acc;
    }

    void propagate() {
        for (int a : gp_.derived_order) {
            Tri acc = Tri::False;
            for (auto r : rules_of_[static_cast<std::size_t>(a)]) {
                const Tri v = eval_rule(r);
                if (v == Tri::True) {
                    acc = Tri::True;
                    break;
                }
                if (v == Tri::Unknown) acc = Tri::Unknown;
            }
            value_[static_cast<std::size_t>(a)] = acc;
        }
    }

    bool live_rule(std::size_t r) const {
        return value_[static_cast<std::size_t>(gp_.rules[r].head)] == Tri::Unknown &&
               eval_rule(r) == Tri::Unknown;
    }

    bool read_by_live_rule(int atom) const {
        for (auto r : readers_[static_cast<std::size_t>(atom)])
            if (live_rule(r)) return true;
        return false;
    }

    std::string residual_key(std::size_t depth) const {
        std::string key(reinterpret_cast<const char*>(&depth), sizeof depth);
        for (int a : gp_.derived_order) key.push_back(static_cast<char>(value_[static_cast<std::size_t>(a)]));
        for (std::size_t f = 0; f < depth; ++f) {
            const int atom = gp_.facts[f].atom;
            key.push_back(read_by_live_rule(atom) ? static_cast<char>(value_[static_cast<std::size_t>(atom)])
                                                  : '-');
        }
        return key;
    }

    double solve(std::size_t depth) {
        propagate();
        const Tri q = value_[static_cast<std::size_t>(query_)];
        if (q == Tri::True) return 1.0;
        if (q == Tri::False) return 0.0;
        if (depth == gp_.facts.size())
            throw InvariantViolation("query undecided under a total assignment");

        const int atom = gp_.facts[depth].atom;
        auto& slot = value_[static_cast<std::size_t>(atom)];
        // A fact no undecided rule reads cannot change the outcome.
        if (atom != query_ && !read_by_live_rule(atom)) {
            slot = Tri::False;
            const double r = solve(depth + 1);
            slot = Tri::Unknown;
            return r;
        }

        std::string key = residual_key(depth);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;

        const double p = gp_.facts[depth].p;
        slot = Tri::True;
        const double r1 = p > 0.0 ? solve(depth + 1) : 0.0;
        slot = Tri::False;
        const double r0 = p < 1.0 ? solve(depth + 1) : 0.0;
        slot = Tri::Unknown;
        propagate();
        const double r = p * r1 + (1.0 - p) * r0;
        memo_.emplace(std::move(key), r);
        return r;
    }

    const GroundProgram& gp_;
    std::vector<Tri> value_;
    std::vector<std::vector<std::size_t>> rules_of_;
    std::vector<std::vector<std::size_t>> readers_;
    std::vector<int> fact_index_;
    std::unordered_map<std::string, double> memo_;
    int query_ = -1;
};

}  // namespace detail

/// P(query) = sum over models of the product of fact probabilities.
inline double query_probability(const GroundProgram& gp, const std::string& query_key,
                                const InferenceOptions& opts = {}) {
    const int q = gp.find(query_key);
    if (q < 0) throw ArgumentError("query atom '" + query_key + "' is not part of the ground program");
    if (gp.facts.size() > opts.max_probabilistic_atoms)
        throw CapacityError("ground program has " + std::to_string(gp.facts.size()) +
                            " probabilistic atoms (limit " + std::to_string(opts.max_probabilistic_atoms) +
                            "); factor the constitution into smaller queries");
    detail::ModelCounter mc(gp);
    return mc.probability(q);
}

inline double query_probability(const GroundProgram& gp, const Atom& query,
                                const InferenceOptions& opts = {}) {
    if (!query.is_ground()) throw ArgumentError("query '" + atom_key(query) + "' is not ground");
    return query_probability(gp, atom_key(query), opts);
}

/// Probability of the program's own query.
inline double query_probability(const GroundProgram& gp, const InferenceOptions& opts = {}) {
    return query_probability(gp, gp.atoms.at(static_cast<std::size_t>(gp.query)), opts);
}

}  // namespace cofi::logic
