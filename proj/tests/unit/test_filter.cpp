#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "cofi/filter/tracker.hpp"
#include "cofi/logic/parser.hpp"

using namespace cofi;
using namespace cofi::filter;

namespace {

ParticleBelief belief_of(std::vector<State> particles, std::vector<double> weights, std::uint64_t seed = 1) {
    return {std::move(particles), std::move(weights), Rng(seed)};
}

ParticleBelief random_belief(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-100, 100);
    std::vector<State> ps;
    std::vector<double> ws;
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ps.push_back({{u(rng), u(rng)}, {u(rng) / 10, u(rng) / 10}});
        ws.push_back(std::exp(u(rng) / 20));
        s += ws.back();
    }
    for (auto& w : ws) w /= s;
    return belief_of(ps, ws, seed);
}

class GridEvaluator final : public ConstitutionEvaluator {
public:
    double probability(const Vec2& x, const Vec2&) const override { return x.x() > 0 ? 0.8 : 0.2; }
};

}  // namespace

TEST(Predict, NoiselessConstantVelocity) {
    auto b = belief_of({{{0, 0}, {1, 2}}}, {1.0});
    predict(b, {1.0, Eigen::Matrix4d::Zero()});
    EXPECT_EQ(b.particles[0].p, Vec2(1, 2));
    EXPECT_EQ(b.particles[0].v, Vec2(1, 2));
}

TEST(Predict, ZeroStepIsIdentity) {
    auto b = random_belief(50, 3);
    const auto before = b.particles;
    const auto w = b.weights;
    predict(b, {0.0, Eigen::Matrix4d::Zero()});
    EXPECT_EQ(b.particles, before);
    EXPECT_EQ(b.weights, w);
}

TEST(Predict, PositionCovarianceMatchesQ) {
    const double sigma2 = 4.0;
    const std::size_t n = 100000;
    auto b = belief_of(std::vector<State>(n), std::vector<double>(n, 1.0 / n), 9);
    predict(b, {1.0, Eigen::Matrix4d::Identity() * sigma2});
    Eigen::Matrix2d c = Eigen::Matrix2d::Zero();
    Vec2 m = Vec2::Zero();
    for (const auto& s : b.particles) m += s.p / n;
    for (const auto& s : b.particles) c += (s.p - m) * (s.p - m).transpose() / (n - 1);
    EXPECT_NEAR(c(0, 0), sigma2, 0.05 * sigma2);
    EXPECT_NEAR(c(1, 1), sigma2, 0.05 * sigma2);
    EXPECT_NEAR(c(0, 1), 0.0, 0.05 * sigma2);
}

TEST(Predict, WhiteAccelerationQ) {
    const auto m = ProcessModel::white_acceleration(2.0, 0.5);
    EXPECT_DOUBLE_EQ(m.Q(0, 0), 16.0 / 4 * 0.25);
    EXPECT_DOUBLE_EQ(m.Q(0, 2), 8.0 / 2 * 0.25);
    EXPECT_DOUBLE_EQ(m.Q(2, 2), 4.0 * 0.25);
    EXPECT_EQ(m.Q(0, 1), 0.0);
    EXPECT_NO_THROW(m.validate());
    ProcessModel bad{1.0, Eigen::Matrix4d::Identity() * -1.0};
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(MeasurementUpdate, SymmetricParticles) {
    auto b = belief_of({{{-1, 0}, {}}, {{1, 0}, {}}}, {0.5, 0.5});
    update_measurement(b, {0, 0}, MeasurementModel::isotropic(1.0));
    EXPECT_DOUBLE_EQ(b.weights[0], 0.5);
    EXPECT_DOUBLE_EQ(b.weights[1], 0.5);
}

TEST(MeasurementUpdate, ThreeSigmaRatio) {
    const double sigma = 7.0;
    auto b = belief_of({{{0, 0}, {}}, {{3 * sigma, 0}, {}}}, {0.5, 0.5});
    update_measurement(b, {0, 0}, MeasurementModel::isotropic(sigma));
    EXPECT_NEAR(b.weights[0] / b.weights[1], std::exp(4.5), 1e-9 * std::exp(4.5));
}

TEST(MeasurementUpdate, FlatLikelihoodKeepsPrior) {
    auto b = random_belief(100, 4);
    for (auto& st : b.particles) st.p /= 100.0;  // within 1 m of the measurement
    const auto prior = b.weights;
    update_measurement(b, {0, 0}, {Eigen::Matrix2d::Identity() * 1e6});
    for (std::size_t i = 0; i < prior.size(); ++i) EXPECT_NEAR(b.weights[i], prior[i], 1e-6);
}

TEST(MeasurementUpdate, LogNormalizer) {
    auto b = belief_of({{{0, 0}, {}}, {{3, 4}, {}}}, {0.25, 0.75});
    const double ln = update_measurement(b, {0, 0}, MeasurementModel::isotropic(2.0));
    const double pdf0 = 1.0 / (2 * M_PI * 4.0), pdf1 = pdf0 * std::exp(-25.0 / 8.0);
    EXPECT_NEAR(std::exp(ln), 0.25 * pdf0 + 0.75 * pdf1, 1e-15);
}

TEST(MeasurementUpdate, FarMeasurementStillNormalizes) {
    auto b = random_belief(20, 5);
    EXPECT_NO_THROW(update_measurement(b, {1e7, 1e7}, MeasurementModel::isotropic(1.0)));
    EXPECT_NO_THROW(check_simplex(b));
}

TEST(ConstitutionUpdate, TauZeroLeavesWeightsUntouched) {
    auto b = random_belief(100, 6);
    const auto w = b.weights;
    GridEvaluator e;
    const auto r = update_constitution(b, {0, 0}, e, 0.0);
    EXPECT_EQ(b.weights, w);
    EXPECT_FALSE(r.mean_probability.has_value());
}

TEST(ConstitutionUpdate, FullTrustUsesProbabilities) {
    auto b = belief_of({{{1, 0}, {}}, {{-1, 0}, {}}}, {0.5, 0.5});
    GridEvaluator e;
    const auto r = update_constitution(b, {0, 0}, e, 1.0);
    EXPECT_NEAR(b.weights[0], 0.8, 1e-15);
    EXPECT_NEAR(b.weights[1], 0.2, 1e-15);
    EXPECT_NEAR(*r.mean_probability, 0.5, 1e-15);
}

TEST(ConstitutionUpdate, ConstantFactorIsExactNoOp) {
    auto b = random_belief(100, 7);
    const auto w = b.weights;
    update_constitution(b, {0, 0}, ConstantEvaluator(0.0), 0.5);
    EXPECT_EQ(b.weights, w);
}

TEST(ConstitutionUpdate, ZeroMassIsDegenerate) {
    auto b = random_belief(10, 8);
    EXPECT_THROW(update_constitution(b, {0, 0}, ConstantEvaluator(0.0), 1.0), DegenerateUpdateError);
    EXPECT_THROW(update_constitution(b, {0, 0}, ConstantEvaluator(0.5), 1.5), ArgumentError);
}

TEST(ConstitutionUpdate, ScaleInvariance) {
    class Scaled final : public ConstitutionEvaluator {
    public:
        explicit Scaled(double k) : k_(k) {}
        double probability(const Vec2& x, const Vec2&) const override {
            return k_ * (0.5 + 0.5 * std::tanh(x.x() / 50));
        }

    private:
        double k_;
    };
    auto a = random_belief(200, 9), b = a;
    update_constitution(a, {0, 0}, Scaled(1.0), 1.0);
    update_constitution(b, {0, 0}, Scaled(0.25), 1.0);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.weights[i], b.weights[i], 1e-14);
}

TEST(Resample, UniformWeightsDoNotTrigger) {
    auto b = random_belief(100, 10);
    std::fill(b.weights.begin(), b.weights.end(), 0.01);
    EXPECT_NEAR(effective_sample_size(b.weights), 100.0, 1e-9);
    EXPECT_FALSE(maybe_resample(b));
}

TEST(Resample, PointMassCollapses) {
    auto b = random_belief(50, 11);
    std::fill(b.weights.begin(), b.weights.end(), 0.0);
    b.weights[17] = 1.0;
    const State target = b.particles[17];
    EXPECT_TRUE(maybe_resample(b));
    for (const auto& s : b.particles) EXPECT_EQ(s, target);
    for (double w : b.weights) EXPECT_EQ(w, 1.0 / 50);
}

TEST(Resample, FrequenciesMatchWeights) {
    const std::vector<double> w{0.5, 0.3, 0.2};
    Rng rng(12);
    const std::size_t draws = 100000;
    std::vector<double> freq(3, 0.0);
    for (std::size_t j : systematic_indices(w, draws, rng)) freq[j] += 1.0 / draws;
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(freq[k], w[k], 0.005);
}

TEST(Resample, RepeatedSmallResamplesAreUnbiased) {
    // 10^5 draws in total from many resamples of a three-particle belief.
    std::vector<double> freq(3, 0.0);
    auto b = belief_of({{{0, 0}, {}}, {{1, 0}, {}}, {{2, 0}, {}}}, {0.5, 0.3, 0.2}, 13);
    const int reps = 33334;
    for (int r = 0; r < reps; ++r) {
        b.particles = {{{0, 0}, {}}, {{1, 0}, {}}, {{2, 0}, {}}};
        b.weights = {0.5, 0.3, 0.2};
        resample(b);
        for (const auto& s : b.particles) freq[static_cast<std::size_t>(s.p.x())] += 1.0 / (3.0 * reps);
    }
    EXPECT_NEAR(freq[0], 0.5, 0.005);
    EXPECT_NEAR(freq[1], 0.3, 0.005);
    EXPECT_NEAR(freq[2], 0.2, 0.005);
}

TEST(Estimate, Basics) {
    auto one = belief_of({{{3, 4}, {1, 1}}}, {1.0});
    const auto e1 = estimate(one);
    EXPECT_EQ(e1.mean.p, Vec2(3, 4));
    EXPECT_TRUE(e1.cov.isZero(0.0));
    auto two = belief_of({{{0, 0}, {}}, {{2, 0}, {}}}, {0.5, 0.5});
    EXPECT_EQ(estimate(two).mean.p, Vec2(1, 0));
    EXPECT_DOUBLE_EQ(estimate(two).cov(0, 0), 1.0);
}

TEST(Estimate, MatchesTwoPassOracle) {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto b = random_belief(300, 100 + s);
        // Oracle: accumulate in long double, one component at a time.
        long double m[4] = {0, 0, 0, 0};
        auto comp = [&](std::size_t i, int k) -> long double {
            const auto& st = b.particles[i];
            return k == 0 ? st.p.x() : k == 1 ? st.p.y() : k == 2 ? st.v.x() : st.v.y();
        };
        for (std::size_t i = 0; i < b.size(); ++i)
            for (int k = 0; k < 4; ++k) m[k] += b.weights[i] * comp(i, k);
        const auto e = estimate(b);
        EXPECT_NEAR(e.mean.p.x(), static_cast<double>(m[0]), 1e-12);
        EXPECT_NEAR(e.mean.v.y(), static_cast<double>(m[3]), 1e-12);
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) {
                long double v = 0;
                for (std::size_t i = 0; i < b.size(); ++i) v += b.weights[i] * (comp(i, r) - m[r]) * (comp(i, c) - m[c]);
                EXPECT_NEAR(e.cov(r, c), static_cast<double>(v), 1e-12 * std::max(1.0L, std::abs(v)));
            }
    }
}

TEST(SampleSet, ConstantConstitution) {
    const auto b = random_belief(100, 13);
    Rng rng(1);
    for (double p : {1.0, 0.37}) {
        const auto set = sample_constitution_set(b, MeasurementModel::isotropic(5.0), ConstantEvaluator(p), 100, rng);
        ASSERT_EQ(set.values.size(), 100u);
        for (double v : set.values) EXPECT_EQ(v, p);
    }
}

namespace {

double integrate(const BoundedKde& k, int points = 10001) {
    // Composite Simpson on [0, 1].
    const int n = points - 1;
    const double h = 1.0 / n;
    double s = k(0.0) + k(1.0);
    for (int i = 1; i < n; ++i) s += k(i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace

TEST(Kde, IntegratesToOne) {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 10; ++t) {
        std::vector<double> xs(2 + t * 10);
        for (auto& x : xs) x = t % 2 ? u(rng) * u(rng) : 1.0 - u(rng) * 0.05;
        EXPECT_NEAR(integrate(BoundedKde(xs)), 1.0, 1e-3);
    }
}

TEST(Kde, SpikeIsSymmetric) {
    const BoundedKde k(std::vector<double>(20, 0.5));
    EXPECT_EQ(k.bandwidth(), kBandwidthFloor);
    for (double d : {0.0005, 0.001, 0.003, 0.2})
        EXPECT_NEAR(k(0.5 - d), k(0.5 + d), 1e-9 * k(0.5));
}

TEST(Kde, UniformGridIsFlat) {
    std::vector<double> xs;
    for (int i = 0; i <= 100; ++i) xs.push_back(i / 100.0);
    const BoundedKde k(xs, 0.1);
    for (double u = 0; u <= 1.0; u += 0.05) EXPECT_NEAR(k(u), 1.0, 0.1);
}

TEST(Kde, TwoClustersAreBimodal) {
    std::vector<double> xs(50, 0.1);
    xs.insert(xs.end(), 50, 0.9);
    const BoundedKde k(xs, 0.05);
    // Local maxima on a fine grid.
    std::vector<double> modes;
    const int n = 1000;
    for (int i = 1; i < n; ++i) {
        const double u = static_cast<double>(i) / n;
        if (k(u) > k(u - 1.0 / n) && k(u) >= k(u + 1.0 / n)) modes.push_back(u);
    }
    ASSERT_EQ(modes.size(), 2u);
    EXPECT_NEAR(modes[0], 0.1, 0.05);
    EXPECT_NEAR(modes[1], 0.9, 0.05);
}

TEST(Kde, RejectsBadInput) {
    EXPECT_THROW(BoundedKde({0.5}), ArgumentError);
    EXPECT_THROW(BoundedKde({0.5, 1.5}), ArgumentError);
}

namespace {

struct Line {
    std::vector<double> t;
    std::vector<Vec2> truth;
};

Line straight_line(std::size_t n, double dt) {
    Line l;
    for (std::size_t k = 0; k < n; ++k) {
        l.t.push_back(k * dt);
        l.truth.push_back({3.0 * k * dt, 1.0 * k * dt});
    }
    return l;
}

FilterConfig small_config() {
    FilterConfig c;
    c.particles = 300;
    c.measurement = MeasurementModel::isotropic(20.0);
    c.constitution_samples = 0;
    return c;
}

}  // namespace

TEST(Tracker, TauZeroMatchesNoConstitutionBitForBit) {
    const auto line = straight_line(120, 5.0);
    const auto cfg = small_config();
    const auto z = simulate_measurements(line.truth, cfg.measurement, 77);
    GridEvaluator e;
    const auto a = run_filter(line.t, z, cfg, nullptr, 0.0, 5);
    const auto b = run_filter(line.t, z, cfg, &e, 0.0, 5);
    ASSERT_EQ(a.steps.size(), b.steps.size());
    for (std::size_t k = 0; k < a.steps.size(); ++k) {
        EXPECT_EQ(a.steps[k].estimate.mean, b.steps[k].estimate.mean);
        EXPECT_EQ(a.steps[k].estimate.cov, b.steps[k].estimate.cov);
        EXPECT_EQ(step_to_json(a.steps[k], k).dump(), step_to_json(b.steps[k], k).dump());
    }
}

TEST(Tracker, FollowsStraightLine) {
    const auto line = straight_line(200, 5.0);
    const auto cfg = small_config();
    const auto z = simulate_measurements(line.truth, cfg.measurement, 78);
    const auto run = run_filter(line.t, z, cfg, nullptr, 0.0, 6);
    double err = 0, raw = 0;
    for (std::size_t k = 50; k < z.size(); ++k) {
        err += (run.steps[k].estimate.mean.p - line.truth[k]).norm();
        raw += (z[k] - line.truth[k]).norm();
    }
    EXPECT_LT(err, raw);
}

TEST(Tracker, WeightsStayOnSimplexAndDegeneracyReinitializes) {
    const auto line = straight_line(60, 5.0);
    auto cfg = small_config();
    auto z = simulate_measurements(line.truth, cfg.measurement, 79);
    GridEvaluator e;
    const auto run = run_filter(line.t, z, cfg, &e, 1.0, 7);
    EXPECT_EQ(run.reinitializations, 0u);
    const ConstantEvaluator never(0.0);
    const auto zero = run_filter(line.t, z, cfg, &never, 1.0, 7);
    EXPECT_EQ(zero.reinitializations, z.size());
    for (const auto& s : zero.steps) EXPECT_TRUE(s.reinitialized);
}

TEST(Tracker, SampleSetIsReported) {
    const auto line = straight_line(5, 5.0);
    auto cfg = small_config();
    cfg.constitution_samples = 50;
    const auto z = simulate_measurements(line.truth, cfg.measurement, 80);
    GridEvaluator e;
    const auto run = run_filter(line.t, z, cfg, &e, 0.5, 8);
    for (const auto& s : run.steps) {
        ASSERT_TRUE(s.sample_set.has_value());
        EXPECT_EQ(s.sample_set->n, 50u);
        EXPECT_TRUE(s.sample_set->mean >= 0.2 - 1e-12 && s.sample_set->mean <= 0.8 + 1e-12);
    }
}

TEST(Tracker, ConfigJson) {
    const auto c = filter_config_from_json(json::parse(
        R"({"particles": 100, "measurement_std": 10, "tau": "trust-table", "mode": "direct"})"));
    EXPECT_EQ(c.particles, 100u);
    EXPECT_DOUBLE_EQ(c.measurement.R(1, 1), 100.0);
    EXPECT_TRUE(std::holds_alternative<TauFromTable>(c.tau));
    EXPECT_EQ(c.mode, ConstitutionMode::Direct);
    EXPECT_THROW(filter_config_from_json(json::parse(R"({"tau": 2})")), ConfigError);
    EXPECT_THROW(filter_config_from_json(json::parse(R"({"particle": 10})")), FormatError);
    EXPECT_THROW(filter_config_from_json(json::parse(R"({"R": [[1, 2], [2, 1]]})")), ConfigError);
}

TEST(Evaluators, FieldClampsAndDirectMatchesField) {
    const geo::GridSpec g{{0, 0, 100, 100}, 5, 5};
    geo::StaRMapLayer over{geo::RelationKind::Over, "land", g, {}, std::vector<double>(25, 0.0),
                           std::vector<geo::CellFlag>(25), 10};
    for (int i = 0; i < 25; ++i) over.mean.push_back((i % 5) / 4.0);
    const auto program = logic::parse("0.9 :: constitution(X, Z) :- over(X, land).");
    const auto field = logic::precompute_field(program, {over}, g);
    const FieldEvaluator fe(field);
    const DirectEvaluator de(program, {over});
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c) {
            const Vec2 x = g.cell_center(r, c);
            EXPECT_EQ(fe.probability(x, x), de.probability(x, x));
        }
    EXPECT_EQ(fe.probability({-50, 50}, {}), fe.probability({0, 50}, {}));
    EXPECT_EQ(de.probability({500, 50}, {500, 50}), de.probability({100, 50}, {100, 50}));
}
