#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "cofi/core/error.hpp"
#include "cofi/geo/starmap.hpp"
#include "cofi/logic/ast.hpp"
#include "cofi/logic/ground.hpp"
#include "cofi/logic/wmc.hpp"

namespace cofi::logic {

struct EnvironmentOptions {
    /// Constant standing for the state position.
    std::string state_constant = "x";
    /// Constant standing for the measured position.
    std::string measurement_constant = "z";
    /// Lower bound on Normal standard deviations read from StaR layers (meters).
    double sigma_floor = 1e-3;
    InferenceOptions inference{};
};

namespace detail {

inline std::optional<geo::RelationKind> environment_relation(const Atom& a) {
    if (a.args.size() != 2) return std::nullopt;
    if (a.predicate == "over") return geo::RelationKind::Over;
    if (a.predicate == "distance") return geo::RelationKind::Distance;
    if (a.predicate == "depth") return geo::RelationKind::Depth;
    return std::nullopt;
}

inline bool unifies(const Atom& pattern, const Atom& ground) {
    if (pattern.predicate != ground.predicate || pattern.args.size() != ground.args.size()) return false;
    for (std::size_t i = 0; i < pattern.args.size(); ++i)
        if (!pattern.args[i].is_variable() && pattern.args[i].name != ground.args[i].name) return false;
    return true;
}

}  // namespace detail

/// Relations and tags the program's environment atoms refer to, i.e. the
/// StaR Map layers binding it needs. Variable tags expand over their domain.
inline std::vector<geo::RelationSpec> environment_relations(const Program& program) {
    std::set<std::pair<geo::RelationKind, std::string>> out;
    for (const auto& c : program.clauses)
        for (const auto& l : body_of(c)) {
            const Atom& a = std::holds_alternative<AtomLiteral>(l) ? std::get<AtomLiteral>(l).atom
                                                                   : std::get<Comparison>(l).lhs;
            const auto rel = detail::environment_relation(a);
            if (!rel) continue;
            const auto& tag = a.args[1];
            if (!tag.is_variable()) {
                out.emplace(*rel, tag.name);
                continue;
            }
            auto it = program.domains.find(tag.name);
            if (it == program.domains.end())
                throw UnsupportedProgramError("unbound variable sort: " + tag.name + " in '" + atom_key(a) + "'");
            for (const auto& t : it->second) out.emplace(*rel, t);
        }
    std::vector<geo::RelationSpec> specs;
    for (const auto& [rel, tag] : out) specs.push_back({rel, tag});
    return specs;
}

/// Appends the environment sub-program for one (state, measurement) pair.
///
/// Every over/distance/depth(L, tag) atom used in a clause body becomes a fact
/// whose parameters are the StaR layer moments interpolated at the location
/// L stands for: the state for `x` (and the query's first variable), the
/// measurement for `z` (and the query's second variable). Over atoms become
/// Bernoulli facts with the clamped mean; distance and depth atoms become
/// Normal(mean, max(std, sigma_floor)). Atoms the program already defines are
/// left alone. The query's variables are bound to the two constants.
inline Program bind_environment(Program program, const std::vector<geo::StaRMapLayer>& layers,
                                const Vec2& state, const Vec2& measurement,
                                const EnvironmentOptions& opts = {}) {
    const std::string& xs = opts.state_constant;
    const std::string& zs = opts.measurement_constant;

    // Query variables, positionally: first -> state, second -> measurement.
    std::vector<std::string> bound_vars;
    for (auto& t : program.query.args) {
        if (!t.is_variable()) continue;
        const std::string name = t.name;
        if (bound_vars.size() >= 2)
            throw ConfigError("query '" + atom_key(program.query) + "' has more than two variables");
        const std::string& c = bound_vars.empty() ? xs : zs;
        bound_vars.push_back(name);
        t = Term::constant(c);
    }
    for (std::size_t i = 0; i < bound_vars.size(); ++i)
        program.domains[bound_vars[i]] = {i == 0 ? xs : zs};

    auto locations_of = [&](const Term& t, const Atom& where) -> std::vector<std::string> {
        if (!t.is_variable()) {
            if (t.name != xs && t.name != zs)
                throw ConfigError("environment atom '" + atom_key(where) + "' must be located at '" + xs +
                                  "' or '" + zs + "'");
            return {t.name};
        }
        auto it = program.domains.find(t.name);
        if (it == program.domains.end()) return {xs, zs};
        std::vector<std::string> out;
        for (const auto& c : it->second)
            if (c == xs || c == zs) out.push_back(c);
        return out;
    };
    auto tags_of = [&](const Term& t, const Atom& where) -> std::vector<std::string> {
        if (!t.is_variable()) return {t.name};
        auto it = program.domains.find(t.name);
        if (it == program.domains.end())
            throw UnsupportedProgramError("unbound variable sort: " + t.name + " in '" + atom_key(where) + "'");
        return it->second;
    };

    std::set<std::tuple<geo::RelationKind, std::string, std::string>> needed;  // rel, location, tag
    std::vector<Atom> used;
    for (const auto& c : program.clauses)
        for (const auto& l : body_of(c)) {
            const Atom& a = std::holds_alternative<AtomLiteral>(l) ? std::get<AtomLiteral>(l).atom
                                                                   : std::get<Comparison>(l).lhs;
            if (detail::environment_relation(a)) used.push_back(a);
        }
    for (const auto& a : used) {
        const auto rel = *detail::environment_relation(a);
        for (const auto& loc : locations_of(a.args[0], a))
            for (const auto& tag : tags_of(a.args[1], a)) needed.emplace(rel, loc, tag);
    }

    std::vector<Clause> env;
    for (const auto& [rel, loc, tag] : needed) {
        Atom atom{std::string(geo::to_string(rel)), {Term::constant(loc), Term::constant(tag)}, {}};
        bool defined = false;
        for (const auto& c : program.clauses) defined |= detail::unifies(head_of(c), atom);
        if (defined) continue;
        const auto* layer = geo::find_layer(layers, rel, tag);
        if (!layer) throw ConfigError("no StaR Map layer for environment atom '" + atom_key(atom) + "'");
        const auto m = geo::interpolate(*layer, loc == xs ? state : measurement);
        if (rel == geo::RelationKind::Over)
            env.push_back(CategoricalClause{std::clamp(m.mean, 0.0, 1.0), atom, {}});
        else
            env.push_back(ContinuousClause{atom, Normal{m.mean, std::max(m.std, opts.sigma_floor)}, {}});
    }
    program.clauses.insert(program.clauses.end(), env.begin(), env.end());
    return program;
}

/// P(C | x, z): bind the environment, ground, and count weighted models.
inline double constitution_probability(const Program& program,
                                       const std::vector<geo::StaRMapLayer>& layers,
                                       const Vec2& state, const Vec2& measurement,
                                       const EnvironmentOptions& opts = {}) {
    const Program bound = bind_environment(program, layers, state, measurement, opts);
    const GroundProgram gp = ground(bound);
    const double p = query_probability(gp, opts.inference);
    if (!(p >= -1e-12 && p <= 1.0 + 1e-12))
        throw InvariantViolation("constitution probability " + std::to_string(p) + " outside [0, 1]");
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace cofi::logic
