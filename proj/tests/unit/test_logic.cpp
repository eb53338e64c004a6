#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cofi/logic/environment.hpp"
#include "cofi/logic/field.hpp"
#include "cofi/logic/parser.hpp"
#include "cofi/logic/printer.hpp"
#include "support/random_programs.hpp"

using namespace cofi;
using namespace cofi::logic;

namespace {

double prob(const std::string& text, const std::string& query) {
    auto p = parse(text);
    p.query = std::get<CategoricalClause>(parse(query + ".").clauses[0]).head;
    return query_probability(ground(p));
}

// Composite Simpson quadrature of the Normal density; an oracle independent of erfc.
double normal_mass(double mean, double std, double lo, double hi, int n = 200000) {
    auto f = [&](double x) {
        const double z = (x - mean) / std;
        return std::exp(-0.5 * z * z) / (std * std::sqrt(2.0 * M_PI));
    };
    const double h = (hi - lo) / n;
    double s = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) s += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace

TEST(Parser, CategoricalFact) {
    const auto p = parse("0.95 :: over(x, park).");
    ASSERT_EQ(p.clauses.size(), 1u);
    const auto& c = std::get<CategoricalClause>(p.clauses[0]);
    EXPECT_DOUBLE_EQ(c.prob, 0.95);
    EXPECT_EQ(atom_key(c.head), "over(x,park)");
    EXPECT_TRUE(c.body.empty());
    EXPECT_EQ(p.query, default_query());
}

TEST(Parser, ContinuousFact) {
    const auto p = parse("distance(x, road) ~ normal(100, 1).");
    const auto& c = std::get<ContinuousClause>(p.clauses[0]);
    const auto& n = std::get<Normal>(c.dist);
    EXPECT_EQ(n.mean, 100.0);
    EXPECT_EQ(n.std, 1.0);
}

TEST(Parser, RoundTripSimpleRule) {
    const auto p = parse("1.0 :: a :- b, \\+ c.");
    EXPECT_EQ(parse(pretty_print(p)), p);
    const auto& c = std::get<CategoricalClause>(p.clauses[0]);
    EXPECT_TRUE(std::get<AtomLiteral>(c.body[1]).negated);
}

TEST(Parser, RoundTripFullSyntax) {
    const std::string src = R"(
% header comment
:- domain(T, [land, water, 'New York']).
:- query(safe(x, z)).
0.9 :: safe(X, Z) :- over(X, water), \+ over(Z, land), distance(X, land) > 50.
safe(X, Z) :- depth(X, water) between [2.5, 1e3], distance(X, T) =< -4.
speed(x) ~ normal(3.5, 0.25).
flag ~ bernoulli(0.125) :- speed(x) >= 3.
)";
    const auto p = parse(src);
    EXPECT_EQ(p.clauses.size(), 4u);
    EXPECT_EQ(p.domains.at("T").size(), 3u);
    EXPECT_EQ(atom_key(p.query), "safe(x,z)");
    const auto printed = pretty_print(p);
    EXPECT_EQ(parse(printed), p);
    EXPECT_EQ(pretty_print(parse(printed)), printed);
}

TEST(Parser, RandomProgramsRoundTrip) {
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto p = parse(test_support::random_program(s).text);
        EXPECT_EQ(parse(pretty_print(p)), p) << pretty_print(p);
    }
}

TEST(Parser, ErrorsCarryLineAndColumn) {
    try {
        parse("a.\nb :- c,\n  .");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
        EXPECT_EQ(e.column(), 3);
    }
    EXPECT_THROW(parse("1.5 :: a."), ParseError);
    EXPECT_THROW(parse("-0.1 :: a."), ParseError);
    EXPECT_THROW(parse("a ~ normal(0, 0)."), ParseError);
    EXPECT_THROW(parse("a :- b between [3, 1]."), ParseError);
    EXPECT_THROW(parse("a"), ParseError);
}

TEST(Comparison, CompiledProbabilities) {
    const Normal d{100, 1};
    EXPECT_NEAR(comparison_probability(d, CmpOp::Greater, 100), 0.5, 1e-12);
    EXPECT_NEAR(comparison_probability(d, CmpOp::Between, 99, 101), 0.682689492137086, 1e-12);
    EXPECT_NEAR(comparison_probability({10, 2}, CmpOp::Greater, 5), 0.993790334674224, 1e-12);
}

TEST(Comparison, GroundedQueriesMatchQuadrature) {
    const std::string env = "distance(x, road) ~ normal(100, 1).\n";
    EXPECT_NEAR(prob(env + "q :- distance(x, road) > 100.", "q"), 0.5, 1e-9);
    EXPECT_NEAR(prob(env + "q :- distance(x, road) between [99, 101].", "q"), normal_mass(100, 1, 99, 101), 1e-7);
    EXPECT_NEAR(prob("depth(x, w) ~ normal(10, 2).\nq :- depth(x, w) > 5.", "q"),
                1.0 - normal_mass(10, 2, -10, 5), 1e-7);
}

TEST(Comparison, SeveralThresholdsOnOneAtomAreExclusive) {
    const std::string env = "distance(x, road) ~ normal(100, 1).\n";
    // Both literals constrain the same draw.
    EXPECT_NEAR(prob(env + "q :- distance(x, road) > 99, distance(x, road) < 101.", "q"),
                normal_mass(100, 1, 99, 101), 1e-7);
    EXPECT_NEAR(prob(env + "q :- distance(x, road) > 101.\nq :- distance(x, road) < 99.", "q"),
                1.0 - normal_mass(100, 1, 99, 101), 1e-7);
    EXPECT_NEAR(prob(env + "q :- distance(x, road) > 101, distance(x, road) < 99.", "q"), 0.0, 1e-12);
    EXPECT_NEAR(prob(env + "q :- distance(x, road) > 100.\nq :- \\+ r.\nr :- distance(x, road) > 98.", "q"),
                0.5 + normal_mass(100, 1, 80, 98), 1e-7);
}

TEST(Comparison, ConditionalDistribution) {
    const std::string src = "0.5 :: c.\nd ~ normal(0, 1) :- c.\nq :- d > 0.";
    EXPECT_NEAR(prob(src, "q"), 0.25, 1e-12);
}

TEST(Wmc, SpecExamples) {
    EXPECT_NEAR(prob("0.95 :: a.", "a"), 0.95, 1e-12);
    EXPECT_NEAR(prob("0.5 :: a. 0.4 :: b. q :- a, b.", "q"), 0.20, 1e-12);
    EXPECT_NEAR(prob("0.3 :: a. 0.6 :: b. q :- a. q :- b.", "q"), 0.72, 1e-12);
}

TEST(Wmc, ProbabilisticRulesAndNegation) {
    EXPECT_NEAR(prob("0.4 :: a. 0.5 :: q :- a.", "q"), 0.2, 1e-12);
    EXPECT_NEAR(prob("0.4 :: a. q :- \\+ a.", "q"), 0.6, 1e-12);
    EXPECT_NEAR(prob("0.3 :: a. 0.3 :: a.", "a"), 1 - 0.7 * 0.7, 1e-12);
    EXPECT_NEAR(prob("0.0 :: a. q :- \\+ a.", "q"), 1.0, 1e-12);
    EXPECT_NEAR(prob("q :- missing.", "q"), 0.0, 1e-12);
}

TEST(Wmc, NormalizationOfTautology) {
    EXPECT_NEAR(prob("0.37 :: a. 0.2 :: b. q :- a. q :- \\+ a, b. q :- \\+ a, \\+ b.", "q"), 1.0, 1e-9);
}

TEST(Wmc, MatchesBruteForceOnRandomPrograms) {
    for (std::uint64_t s = 0; s < 200; ++s) {
        const auto rp = test_support::random_program(1000 + s);
        const auto gp = ground(parse(rp.text));
        EXPECT_NEAR(query_probability(gp), test_support::brute_force_probability(rp), 1e-9) << rp.text;
    }
}

TEST(Wmc, DeterministicUnderClauseOrder) {
    std::mt19937_64 rng(4);
    for (std::uint64_t s = 0; s < 30; ++s) {
        auto p = parse(test_support::random_program(500 + s).text);
        const double a = query_probability(ground(p));
        std::shuffle(p.clauses.begin(), p.clauses.end(), rng);
        EXPECT_NEAR(query_probability(ground(p)), a, 1e-12);
        EXPECT_EQ(query_probability(ground(p)), query_probability(ground(p)));
    }
}

TEST(Wmc, MonotoneInPositiveFacts) {
    const std::string rules = "q :- a, b. q :- c. r :- a, c. q :- r, b.\n";
    double last = -1;
    for (double pa = 0.0; pa <= 1.0; pa += 0.1) {
        const double v = prob(rules + std::to_string(pa) + " :: a. 0.3 :: b. 0.6 :: c.", "q");
        EXPECT_GE(v, last - 1e-12);
        last = v;
    }
}

TEST(Wmc, CapacityLimit) {
    std::string src = "q :- ";
    for (int i = 0; i < 25; ++i) src += (i ? ", a" : "a") + std::to_string(i);
    src += ".\n";
    for (int i = 0; i < 25; ++i) src += "0.5 :: a" + std::to_string(i) + ".\n";
    auto p = parse(src);
    p.query = std::get<CategoricalClause>(p.clauses[0]).head;
    EXPECT_THROW(query_probability(ground(p)), CapacityError);
    EXPECT_NEAR(query_probability(ground(p), InferenceOptions{32}), std::pow(0.5, 25), 1e-15);
}

TEST(Ground, Errors) {
    auto cyclic = parse("a :- b. b :- a. :- query(a).");
    EXPECT_THROW(ground(cyclic), UnsupportedProgramError);
    auto unbound = parse("q :- over(x, T). 1.0 :: over(x, land). :- query(q).");
    EXPECT_THROW(ground(unbound), UnsupportedProgramError);
    auto undefined = parse("a. :- query(b).");
    EXPECT_THROW(ground(undefined), UnsupportedProgramError);
    auto plain_continuous = parse("d ~ normal(0, 1). q :- d. :- query(q).");
    EXPECT_THROW(ground(plain_continuous), UnsupportedProgramError);
}

TEST(Ground, DomainsExpandVariables) {
    auto p = parse(R"(
:- domain(T, [land, water]).
0.5 :: over(x, land).
0.2 :: over(x, water).
q :- over(x, T).
:- query(q).
)");
    EXPECT_NEAR(query_probability(ground(p)), 1 - 0.5 * 0.8, 1e-12);
}

TEST(Ground, IgnoresClausesTheQueryDoesNotUse) {
    std::string src = ":- query(q).\nq :- a.\n0.5 :: a.\n";
    for (int i = 0; i < 40; ++i) src += "0.5 :: u" + std::to_string(i) + ".\n";
    const auto gp = ground(parse(src));
    EXPECT_EQ(gp.facts.size(), 1u);
    EXPECT_NEAR(query_probability(gp), 0.5, 1e-12);
}

namespace {

geo::StaRMapLayer layer(geo::RelationKind rel, const std::string& tag, double mean, double std) {
    const geo::GridSpec g{{0, 0, 100, 100}, 2, 2};
    return {rel, tag, g, std::vector<double>(4, mean), std::vector<double>(4, std), std::vector<geo::CellFlag>(4), 10};
}

}  // namespace

TEST(Environment, OverLayerBecomesCategoricalFact) {
    const auto p = parse("constitution(X, Z) :- over(X, land).");
    const auto bound = bind_environment(p, {layer(geo::RelationKind::Over, "land", 1.0, 0.0)}, {50, 50}, {50, 50});
    EXPECT_NE(pretty_print(bound).find("over(x, land).\n"), std::string::npos);
    EXPECT_EQ(atom_key(bound.query), "constitution(x,z)");
}

TEST(Environment, DistanceLayerBecomesNormalWithFloor) {
    const auto p = parse("constitution(X, Z) :- distance(X, road) > 100.");
    auto bound = bind_environment(p, {layer(geo::RelationKind::Distance, "road", 100, 1)}, {10, 10}, {10, 10});
    EXPECT_NE(pretty_print(bound).find("distance(x, road) ~ normal(100.0, 1.0)."), std::string::npos);
    bound = bind_environment(p, {layer(geo::RelationKind::Distance, "road", 100, 0)}, {10, 10}, {10, 10});
    const auto& c = std::get<ContinuousClause>(bound.clauses.back());
    EXPECT_EQ(std::get<Normal>(c.dist).std, 1e-3);
}

TEST(Environment, MissingLayerAndOutOfBounds) {
    const auto p = parse("constitution(X, Z) :- over(X, land).");
    EXPECT_THROW(bind_environment(p, {}, {1, 1}, {1, 1}), ConfigError);
    EXPECT_THROW(bind_environment(p, {layer(geo::RelationKind::Over, "land", 1, 0)}, {101, 1}, {1, 1}),
                 OutOfBoundsError);
}

TEST(Environment, MeasurementLocation) {
    const geo::GridSpec g{{0, 0, 100, 100}, 2, 2};
    geo::StaRMapLayer over{geo::RelationKind::Over, "land", g, {0, 1, 0, 1}, {0, 0, 0, 0},
                           std::vector<geo::CellFlag>(4), 10};
    const auto p = parse("constitution(X, Z) :- over(Z, land).");
    EXPECT_EQ(constitution_probability(p, {over}, {25, 25}, {75, 25}), 1.0);
    EXPECT_EQ(constitution_probability(p, {over}, {75, 25}, {25, 25}), 0.0);
}

TEST(Environment, ConstantConstitution) {
    const auto p = parse("1.0 :: constitution(X, Z).");
    EXPECT_EQ(constitution_probability(p, {}, {0, 0}, {5, 5}), 1.0);
}

TEST(Environment, PassThroughOfOverMean) {
    const geo::GridSpec g{{0, 0, 100, 100}, 3, 3};
    geo::StaRMapLayer over{geo::RelationKind::Over, "park", g, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9},
                           std::vector<double>(9, 0.1), std::vector<geo::CellFlag>(9), 10};
    const auto p = parse("constitution(X, Z) :- over(X, park).");
    for (const Vec2& x : {Vec2(17, 17), Vec2(40, 60), Vec2(83, 20)})
        EXPECT_NEAR(constitution_probability(p, {over}, x, x), geo::interpolate(over, x).mean, 1e-12);
}

TEST(Field, ConstantAndCellCenterExactness) {
    const geo::GridSpec g{{0, 0, 100, 100}, 4, 5};
    const auto ones = precompute_field(parse("1.0 :: constitution(X, Z)."), {}, g);
    for (double v : ones.values) EXPECT_EQ(v, 1.0);

    geo::StaRMapLayer d{geo::RelationKind::Distance, "road", g, {}, {}, std::vector<geo::CellFlag>(g.size()), 10};
    for (std::size_t i = 0; i < g.size(); ++i) d.mean.push_back(10.0 * i), d.std.push_back(1.0 + i);
    const auto p2 = parse("0.9 :: constitution(X, Z) :- distance(X, road) < 60.\n"
                          "0.2 :: constitution(X, Z) :- distance(X, road) > 120.");
    const auto f = precompute_field(p2, {d}, g);
    for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) {
            const Vec2 x = g.cell_center(r, c);
            EXPECT_EQ(f.values[g.index(r, c)], constitution_probability(p2, {d}, x, x));
            EXPECT_EQ(f.at(x), f.values[g.index(r, c)]);
        }
}

TEST(Field, JsonRoundTrip) {
    const geo::GridSpec g{{0, 0, 10, 10}, 2, 3};
    ConstitutionField f{g, {0, 0.25, 0.5, 0.75, 1, 0.125}, std::vector<geo::CellFlag>(6)};
    const auto back = field_from_json(json::parse(field_to_json(f).dump()));
    EXPECT_EQ(back.values, f.values);
    EXPECT_EQ(back.grid.rows, 2);
    auto bad = field_to_json(f);
    bad["values"][0] = 1.5;
    EXPECT_THROW(field_from_json(bad), FormatError);
}
