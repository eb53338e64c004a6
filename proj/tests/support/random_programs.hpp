#pragma once

// Random stratified propositional programs and a brute-force model
// enumeration oracle that shares no code with the library.

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace cofi::test_support {

struct RandomRule {
    int head = 0;
    double prob = 1.0;
    // Literal encoding: value < 0 means negated; |value|-1 indexes atoms,
    // facts first, then derived atoms.
    std::vector<int> body;
};

struct RandomProgram {
    int facts = 0;
    int derived = 0;
    std::vector<double> fact_prob;
    std::vector<RandomRule> rules;
    std::string text;

    std::string atom_name(int index) const {
        return index < facts ? "f" + std::to_string(index) : "d" + std::to_string(index - facts);
    }
    std::string query() const { return "d" + std::to_string(derived - 1); }
};

inline RandomProgram random_program(std::uint64_t seed, int max_choices = 10, int max_rules = 10) {
    std::mt19937_64 rng(seed);
    auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };
    RandomProgram rp;
    rp.facts = uni(1, std::min(7, max_choices));
    rp.derived = uni(1, 5);
    int choices = rp.facts;
    for (int i = 0; i < rp.facts; ++i) rp.fact_prob.push_back(uni(1, 999) / 1000.0);

    const int n_rules = uni(1, max_rules);
    for (int r = 0; r < n_rules; ++r) {
        RandomRule rule;
        // The first rule defines the query so it is never undefined.
        rule.head = r == 0 ? rp.derived - 1 : uni(0, rp.derived - 1);
        if (choices < max_choices && coin(0.3)) {
            rule.prob = uni(1, 999) / 1000.0;
            ++choices;
        }
        const int available = rp.facts + rule.head;  // facts plus lower derived atoms
        const int len = uni(1, 3);
        for (int k = 0; k < len; ++k) {
            const int atom = uni(0, available - 1);
            rule.body.push_back(coin(0.3) ? -(atom + 1) : atom + 1);
        }
        rp.rules.push_back(rule);
    }

    std::ostringstream os;
    os << ":- query(" << rp.query() << ").\n";
    for (int i = 0; i < rp.facts; ++i) os << rp.fact_prob[static_cast<std::size_t>(i)] << " :: f" << i << ".\n";
    for (const auto& rule : rp.rules) {
        if (rule.prob < 1.0) os << rule.prob << " :: ";
        os << "d" << rule.head << " :- ";
        for (std::size_t k = 0; k < rule.body.size(); ++k) {
            if (k) os << ", ";
            const int lit = rule.body[k];
            if (lit < 0) os << "\\+ ";
            os << rp.atom_name(std::abs(lit) - 1);
        }
        os << ".\n";
    }
    rp.text = os.str();
    return rp;
}

/// Sums the weight of every assignment of facts and probabilistic-rule
/// choices under which the query holds.
inline double brute_force_probability(const RandomProgram& rp) {
    std::vector<double> choice_prob(rp.fact_prob);
    std::vector<int> rule_choice(rp.rules.size(), -1);
    for (std::size_t r = 0; r < rp.rules.size(); ++r)
        if (rp.rules[r].prob < 1.0) {
            rule_choice[r] = static_cast<int>(choice_prob.size());
            choice_prob.push_back(rp.rules[r].prob);
        }
    const std::size_t k = choice_prob.size();
    double total = 0.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
        double w = 1.0;
        for (std::size_t i = 0; i < k; ++i) w *= (mask >> i & 1) ? choice_prob[i] : 1.0 - choice_prob[i];
        std::vector<bool> value(static_cast<std::size_t>(rp.facts + rp.derived), false);
        for (int i = 0; i < rp.facts; ++i) value[static_cast<std::size_t>(i)] = mask >> i & 1;
        for (int d = 0; d < rp.derived; ++d) {
            bool v = false;
            for (std::size_t r = 0; r < rp.rules.size(); ++r) {
                const auto& rule = rp.rules[r];
                if (rule.head != d) continue;
                if (rule_choice[r] >= 0 && !(mask >> rule_choice[r] & 1)) continue;
                bool body = true;
                for (int lit : rule.body) {
                    const bool a = value[static_cast<std::size_t>(std::abs(lit) - 1)];
                    body = body && (lit < 0 ? !a : a);
                }
                v = v || body;
            }
            value[static_cast<std::size_t>(rp.facts + d)] = v;
        }
        if (value.back()) total += w;
    }
    return total;
}

}  // namespace cofi::test_support
