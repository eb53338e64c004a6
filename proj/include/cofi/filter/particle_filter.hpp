#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cofi/core/error.hpp"
#include "cofi/core/rng.hpp"
#include "cofi/core/types.hpp"
#include "cofi/filter/evaluator.hpp"

namespace cofi::filter {

/// Position (m) and velocity (m/s) in the local frame.
struct State {
    Vec2 p = Vec2::Zero();
    Vec2 v = Vec2::Zero();

    Eigen::Vector4d stacked() const { return {p.x(), p.y(), v.x(), v.y()}; }
    friend bool operator==(const State& a, const State& b) { return a.p == b.p && a.v == b.v; }
};

/// Symmetric square root of a PSD matrix (tiny negative eigenvalues are zeroed).
template <int N>
Eigen::Matrix<double, N, N> psd_factor(const Eigen::Matrix<double, N, N>& m, const std::string& what) {
    using Mat = Eigen::Matrix<double, N, N>;
    if (!m.allFinite()) throw ConfigError(what + " has non-finite entries");
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
        throw ConfigError(what + " is not symmetric");
    if (m.isZero(0.0)) return Mat::Zero();
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    const double tol = 1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() < -tol) throw ConfigError(what + " is not positive semidefinite");
    return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

/// Constant-velocity transition with additive Gaussian noise Q over
/// (px, py, vx, vy).
struct ProcessModel {
    double dt = 1.0;
    Eigen::Matrix4d Q = Eigen::Matrix4d::Zero();

    /// Discretized continuous white-noise acceleration with spectral level sigma_a^2.
    static ProcessModel white_acceleration(double dt, double sigma_a) {
        const double q = sigma_a * sigma_a;
        const double a = std::pow(dt, 4) / 4.0 * q, b = std::pow(dt, 3) / 2.0 * q, c = dt * dt * q;
        ProcessModel m{dt, Eigen::Matrix4d::Zero()};
        m.Q << a, 0, b, 0,
               0, a, 0, b,
               b, 0, c, 0,
               0, b, 0, c;
        return m;
    }

    void validate() const {
        if (!(dt >= 0.0) || !std::isfinite(dt)) throw ConfigError("process dt must be finite and >= 0");
        (void)psd_factor<4>(Q, "process noise Q");
    }
};

/// z = H x + e with H selecting the position.
struct MeasurementModel {
    Eigen::Matrix2d R = Eigen::Matrix2d::Identity();

    static MeasurementModel isotropic(double sigma) {
        return {Eigen::Matrix2d::Identity() * sigma * sigma};
    }

    void validate() const {
        if (!R.allFinite() || (R - R.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw ConfigError("measurement noise R must be finite and symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(R);
        if (!(es.eigenvalues().minCoeff() > 0.0)) throw ConfigError("measurement noise R must be positive definite");
    }
};

/// Weighted particle set with its own random stream.
struct ParticleBelief {
    std::vector<State> particles;
    std::vector<double> weights;
    Rng rng;

    std::size_t size() const noexcept { return particles.size(); }
};

inline void check_simplex(const ParticleBelief& b, double tol = 1e-9) {
    if (b.weights.size() != b.particles.size())
        throw InvariantViolation("weight and particle counts differ");
    double s = 0.0;
    for (double w : b.weights) {
        if (!(w >= 0.0)) throw InvariantViolation("negative or NaN particle weight");
        s += w;
    }
    if (std::abs(s - 1.0) > tol) throw InvariantViolation("weights sum to " + std::to_string(s));
}

/// Redraws every particle around `center` and resets to uniform weights,
/// continuing the belief's random stream.
inline void reinitialize(ParticleBelief& b, const Vec2& center, const Eigen::Matrix2d& cov, double velocity_std) {
    const Eigen::Matrix2d L = psd_factor<2>(cov, "initial covariance");
    const std::size_t n = b.weights.size();
    std::normal_distribution<double> g;
    b.particles.resize(n);
    for (auto& s : b.particles) {
        const double e0 = g(b.rng), e1 = g(b.rng), e2 = g(b.rng), e3 = g(b.rng);
        s.p = center + L * Vec2(e0, e1);
        s.v = Vec2(e2, e3) * velocity_std;
    }
    std::fill(b.weights.begin(), b.weights.end(), 1.0 / static_cast<double>(n));
}

/// Particles drawn from N(center, cov) in position and N(0, velocity_std^2 I)
/// in velocity, uniformly weighted.
inline ParticleBelief initialize_belief(std::size_t n, const Vec2& center, const Eigen::Matrix2d& cov,
                                        double velocity_std, std::uint64_t seed) {
    if (n == 0) throw ConfigError("particle count must be positive");
    if (!(velocity_std >= 0.0)) throw ConfigError("initial velocity std must be >= 0");
    ParticleBelief b{{}, std::vector<double>(n, 1.0 / static_cast<double>(n)), Rng(seed)};
    reinitialize(b, center, cov, velocity_std);
    return b;
}

/// p' = p + v dt, v' = v, plus Gaussian noise from Q. Weights are untouched.
inline void predict(ParticleBelief& b, const ProcessModel& process) {
    const Eigen::Matrix4d L = psd_factor<4>(process.Q, "process noise Q");
    const bool noiseless = L.isZero(0.0);
    std::normal_distribution<double> g;
    for (auto& s : b.particles) {
        const double e0 = g(b.rng), e1 = g(b.rng), e2 = g(b.rng), e3 = g(b.rng);
        s.p += s.v * process.dt;
        if (!noiseless) {
            const Eigen::Vector4d n = L * Eigen::Vector4d(e0, e1, e2, e3);
            s.p += n.head<2>();
            s.v += n.tail<2>();
        }
        if (!s.p.allFinite() || !s.v.allFinite()) throw InvariantViolation("non-finite particle after predict");
    }
}

inline double effective_sample_size(const std::vector<double>& w) {
    double s = 0.0;
    for (double x : w) s += x * x;
    return s > 0.0 ? 1.0 / s : 0.0;
}

/// Multiplies weights by N(z; p, R) in log space and renormalizes. Returns the
/// log of the normalization constant sum_i w_i N(z; p_i, R).
inline double update_measurement(ParticleBelief& b, const Vec2& z, const MeasurementModel& m) {
    if (!z.allFinite()) throw ArgumentError("measurement is not finite");
    const Eigen::Matrix2d info = m.R.inverse();
    std::vector<double> ll(b.size());
    double max_ll = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < b.size(); ++i) {
        const Vec2 d = z - b.particles[i].p;
        ll[i] = b.weights[i] > 0.0 ? -0.5 * d.dot(info * d) : -std::numeric_limits<double>::infinity();
        max_ll = std::max(max_ll, ll[i]);
    }
    if (!std::isfinite(max_ll)) throw DegenerateUpdateError("measurement update left no particle weight");
    double s = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        b.weights[i] *= std::exp(ll[i] - max_ll);
        s += b.weights[i];
    }
    if (!(s > 0.0)) throw DegenerateUpdateError("measurement update left no particle weight");
    for (auto& w : b.weights) w /= s;
    const double log_norm_density = -std::log(2.0 * M_PI) - 0.5 * std::log(m.R.determinant());
    return std::log(s) + max_ll + log_norm_density;
}

/// Outcome of a constitutional update; `mean_probability` is the prior-weighted
/// mean of P(C | x, z) and is absent when the constitution was not evaluated.
struct ConstitutionUpdate {
    std::optional<double> mean_probability;
};

/// Multiplies weights by tau * P(C | x, z) + (1 - tau) and renormalizes.
/// With tau = 0 nothing is evaluated and the weights are left as they are.
inline ConstitutionUpdate update_constitution(ParticleBelief& b, const Vec2& z,
                                              const ConstitutionEvaluator& eval, double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw ArgumentError("trust ratio must lie in [0, 1]");
    if (tau == 0.0) return {};
    std::vector<double> factor(b.size());
    double mean = 0.0;
    bool constant = true;
    for (std::size_t i = 0; i < b.size(); ++i) {
        const double p = eval.probability(b.particles[i].p, z);
        if (!(p >= 0.0 && p <= 1.0)) throw InvariantViolation("constitution probability outside [0, 1]");
        mean += b.weights[i] * p;
        factor[i] = tau * p + (1.0 - tau);
        constant = constant && factor[i] == factor[0];
    }
    // Identical factors cancel in the normalization; skipping keeps weights bit-exact.
    if (constant && !factor.empty() && factor[0] > 0.0) return {mean};
    double s = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        b.weights[i] *= factor[i];
        s += b.weights[i];
    }
    if (!(s > 0.0)) throw DegenerateUpdateError("constitution update left no particle weight");
    for (auto& w : b.weights) w /= s;
    return {mean};
}

/// Systematic resampling: `count` indices drawn so that index i appears
/// floor or ceil of count * w_i times, in expectation exactly count * w_i.
inline std::vector<std::size_t> systematic_indices(const std::vector<double>& w, std::size_t count, Rng& rng) {
    std::vector<std::size_t> out;
    if (w.empty() || count == 0) return out;
    out.reserve(count);
    const double step = 1.0 / static_cast<double>(count);
    const double u0 = std::uniform_real_distribution<double>(0.0, step)(rng);
    double cum = w[0];
    std::size_t j = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const double u = u0 + static_cast<double>(i) * step;
        while (u > cum && j + 1 < w.size()) cum += w[++j];
        out.push_back(j);
    }
    return out;
}

/// Systematic resampling to uniform weights.
inline void resample(ParticleBelief& b) {
    const std::size_t n = b.size();
    if (n == 0) return;
    std::vector<State> out;
    out.reserve(n);
    for (std::size_t j : systematic_indices(b.weights, n, b.rng)) out.push_back(b.particles[j]);
    b.particles = std::move(out);
    std::fill(b.weights.begin(), b.weights.end(), 1.0 / static_cast<double>(n));
}

/// Resamples when the effective sample size falls below ratio * N.
inline bool maybe_resample(ParticleBelief& b, double ratio = 0.5) {
    if (effective_sample_size(b.weights) >= ratio * static_cast<double>(b.size())) return false;
    resample(b);
    return true;
}

struct Estimate {
    State mean;
    Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
};

/// Weighted mean and weighted covariance of the particles.
inline Estimate estimate(const ParticleBelief& b) {
    Eigen::Vector4d m = Eigen::Vector4d::Zero();
    for (std::size_t i = 0; i < b.size(); ++i) m += b.weights[i] * b.particles[i].stacked();
    Eigen::Matrix4d c = Eigen::Matrix4d::Zero();
    for (std::size_t i = 0; i < b.size(); ++i) {
        const Eigen::Vector4d d = b.particles[i].stacked() - m;
        c += b.weights[i] * d * d.transpose();
    }
    return {{m.head<2>(), m.tail<2>()}, c};
}

/// Values of P(C | x, z) at states drawn from the belief and measurements
/// drawn around them.
struct ConstitutionSampleSet {
    std::vector<double> values;
    std::vector<Vec2> states;
    std::vector<Vec2> measurements;
};

inline ConstitutionSampleSet sample_constitution_set(const ParticleBelief& b, const MeasurementModel& m,
                                                     const ConstitutionEvaluator& eval, std::size_t n, Rng& rng) {
    if (n == 0) throw ArgumentError("constitution sample count must be positive");
    const Eigen::Matrix2d L = psd_factor<2>(m.R, "measurement noise R");
    std::discrete_distribution<std::size_t> pick(b.weights.begin(), b.weights.end());
    std::normal_distribution<double> g;
    ConstitutionSampleSet out;
    for (std::size_t k = 0; k < n; ++k) {
        const Vec2 x = b.particles[pick(rng)].p;
        const double e0 = g(rng), e1 = g(rng);
        const Vec2 z = x + L * Vec2(e0, e1);
        out.states.push_back(x);
        out.measurements.push_back(z);
        out.values.push_back(eval.probability(x, z));
    }
    return out;
}

}  // namespace cofi::filter
