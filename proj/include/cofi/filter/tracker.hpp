#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cofi/core/json.hpp"
#include "cofi/filter/kde.hpp"
#include "cofi/filter/particle_filter.hpp"

namespace cofi::filter {

enum class ConstitutionMode { Direct, Field };

inline const char* to_string(ConstitutionMode m) { return m == ConstitutionMode::Direct ? "direct" : "field"; }

/// Where the trust ratio comes from: a fixed value or a calibrated table.
struct TauFromTable {};
using TauSource = std::variant<double, TauFromTable>;

struct FilterConfig {
    std::size_t particles = 2000;
    /// Uniform step recorded tracks are resampled to (s).
    double dt = 60.0;
    /// White-acceleration noise level (m/s^2).
    double sigma_a = 0.05;
    MeasurementModel measurement = MeasurementModel::isotropic(50.0);
    /// Resample when N_eff < ess_threshold * N.
    double ess_threshold = 0.5;
    double init_velocity_std = 1.0;
    /// Covariance of a re-initialized cloud, as a multiple of R.
    double reinit_inflation = 4.0;
    TauSource tau = 1.0;
    ConstitutionMode mode = ConstitutionMode::Field;
    /// Size of the per-step constitution sample set; 0 disables it.
    std::size_t constitution_samples = 100;
    /// Add synthetic measurement noise drawn from R to recorded positions.
    bool synthetic_noise = true;

    void validate() const {
        if (particles == 0) throw ConfigError("filter: particles must be positive");
        if (!(dt > 0.0)) throw ConfigError("filter: dt must be positive");
        if (!(sigma_a >= 0.0)) throw ConfigError("filter: sigma_a must be >= 0");
        if (!(ess_threshold >= 0.0 && ess_threshold <= 1.0)) throw ConfigError("filter: ess_threshold must lie in [0, 1]");
        if (!(init_velocity_std >= 0.0)) throw ConfigError("filter: init_velocity_std must be >= 0");
        if (!(reinit_inflation > 0.0)) throw ConfigError("filter: reinit_inflation must be positive");
        if (const auto* t = std::get_if<double>(&tau); t && !(*t >= 0.0 && *t <= 1.0))
            throw ConfigError("filter: tau must lie in [0, 1]");
        measurement.validate();
    }
};

inline FilterConfig filter_config_from_json(const json& j, const std::string& what = "filter config") {
    if (!j.is_object()) throw FormatError(what + ": expected an object");
    static const std::vector<std::string> known{"particles", "dt", "sigma_a", "measurement_std", "R",
                                                "ess_threshold", "init_velocity_std", "reinit_inflation",
                                                "tau", "mode", "constitution_samples", "synthetic_noise"};
    for (const auto& [k, _] : j.items())
        if (std::find(known.begin(), known.end(), k) == known.end())
            throw FormatError(what + ": unknown key '" + k + "'");
    FilterConfig c;
    c.particles = get_field_or<std::size_t>(j, "particles", c.particles, what);
    c.dt = get_field_or<double>(j, "dt", c.dt, what);
    c.sigma_a = get_field_or<double>(j, "sigma_a", c.sigma_a, what);
    if (j.contains("measurement_std") && j.contains("R"))
        throw FormatError(what + ": give either measurement_std or R");
    if (j.contains("measurement_std"))
        c.measurement = MeasurementModel::isotropic(get_field<double>(j, "measurement_std", what));
    if (j.contains("R")) {
        const auto r = get_field<std::vector<std::vector<double>>>(j, "R", what);
        if (r.size() != 2 || r[0].size() != 2 || r[1].size() != 2) throw FormatError(what + ": R must be 2x2");
        c.measurement.R << r[0][0], r[0][1], r[1][0], r[1][1];
    }
    c.ess_threshold = get_field_or<double>(j, "ess_threshold", c.ess_threshold, what);
    c.init_velocity_std = get_field_or<double>(j, "init_velocity_std", c.init_velocity_std, what);
    c.reinit_inflation = get_field_or<double>(j, "reinit_inflation", c.reinit_inflation, what);
    if (j.contains("tau")) {
        const auto& t = j.at("tau");
        if (t.is_number()) c.tau = t.get<double>();
        else if (t == "trust-table") c.tau = TauFromTable{};
        else throw FormatError(what + ": tau must be a number or \"trust-table\"");
    }
    if (j.contains("mode")) {
        const auto m = get_field<std::string>(j, "mode", what);
        if (m == "direct") c.mode = ConstitutionMode::Direct;
        else if (m == "field") c.mode = ConstitutionMode::Field;
        else throw FormatError(what + ": mode must be \"direct\" or \"field\"");
    }
    c.constitution_samples = get_field_or<std::size_t>(j, "constitution_samples", c.constitution_samples, what);
    c.synthetic_noise = get_field_or<bool>(j, "synthetic_noise", c.synthetic_noise, what);
    c.validate();
    return c;
}

/// Summary of the per-step constitution sample set.
struct SampleSetSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double bandwidth = 0.0;
    double density_mode = 0.0;
};

struct StepRecord {
    double t = 0.0;
    Estimate estimate;
    double ess = 0.0;
    double log_normalizer = 0.0;
    std::optional<double> constitution_mean;
    std::optional<SampleSetSummary> sample_set;
    bool resampled = false;
    bool reinitialized = false;
};

struct FilterRun {
    std::vector<StepRecord> steps;
    std::size_t reinitializations = 0;

    std::vector<Vec2> positions() const {
        std::vector<Vec2> out;
        out.reserve(steps.size());
        for (const auto& s : steps) out.push_back(s.estimate.mean.p);
        return out;
    }
};

/// Positions plus N(0, R) noise from its own stream.
inline std::vector<Vec2> simulate_measurements(const std::vector<Vec2>& truth, const MeasurementModel& m,
                                               std::uint64_t seed) {
    const Eigen::Matrix2d L = psd_factor<2>(m.R, "measurement noise R");
    Rng rng(seed);
    std::normal_distribution<double> g;
    std::vector<Vec2> out;
    out.reserve(truth.size());
    for (const auto& p : truth) {
        const double e0 = g(rng), e1 = g(rng);
        out.push_back(p + L * Vec2(e0, e1));
    }
    return out;
}

/// Runs predict -> measurement update -> constitutional update -> resample
/// over a measurement sequence. `eval` may be null (no constitution); with
/// tau = 0 it is never called. A degenerate update re-initializes the cloud
/// around the current measurement.
inline FilterRun run_filter(const std::vector<double>& times, const std::vector<Vec2>& measurements,
                            const FilterConfig& cfg, const ConstitutionEvaluator* eval, double tau,
                            std::uint64_t seed) {
    cfg.validate();
    if (times.size() != measurements.size()) throw ArgumentError("times and measurements differ in length");
    if (measurements.empty()) throw ArgumentError("no measurements to filter");
    if (!(tau >= 0.0 && tau <= 1.0)) throw ArgumentError("trust ratio must lie in [0, 1]");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1])) throw ArgumentError("measurement times must increase strictly");
    const bool constitution = eval != nullptr && tau > 0.0;
    const Eigen::Matrix2d reinit_cov = cfg.measurement.R * cfg.reinit_inflation;

    FilterRun run;
    auto belief = initialize_belief(cfg.particles, measurements[0], cfg.measurement.R, cfg.init_velocity_std,
                                    derive_seed(seed, "filter"));
    Rng sample_rng(derive_seed(seed, "constitution-samples"));
    for (std::size_t k = 0; k < measurements.size(); ++k) {
        StepRecord rec;
        rec.t = times[k];
        if (k > 0) predict(belief, ProcessModel::white_acceleration(times[k] - times[k - 1], cfg.sigma_a));
        const Vec2& z = measurements[k];
        try {
            rec.log_normalizer = update_measurement(belief, z, cfg.measurement);
            if (constitution) rec.constitution_mean = update_constitution(belief, z, *eval, tau).mean_probability;
        } catch (const DegenerateUpdateError&) {
            reinitialize(belief, z, reinit_cov, cfg.init_velocity_std);
            rec.reinitialized = true;
            ++run.reinitializations;
        }
        check_simplex(belief);
        if (constitution && cfg.constitution_samples > 0) {
            const auto set = sample_constitution_set(belief, cfg.measurement, *eval, cfg.constitution_samples, sample_rng);
            SampleSetSummary s;
            s.n = set.values.size();
            for (double v : set.values) s.mean += v / static_cast<double>(s.n);
            if (s.n >= 2) {
                const BoundedKde kde(set.values);
                s.bandwidth = kde.bandwidth();
                s.density_mode = kde.mode(201);
            }
            rec.sample_set = s;
        }
        rec.ess = effective_sample_size(belief.weights);
        rec.resampled = maybe_resample(belief, cfg.ess_threshold);
        rec.estimate = estimate(belief);
        run.steps.push_back(rec);
    }
    return run;
}

inline ordered_json step_to_json(const StepRecord& s, std::size_t index) {
    ordered_json j;
    j["step"] = index;
    j["t"] = s.t;
    j["x"] = s.estimate.mean.p.x();
    j["y"] = s.estimate.mean.p.y();
    j["vx"] = s.estimate.mean.v.x();
    j["vy"] = s.estimate.mean.v.y();
    j["cov_trace"] = s.estimate.cov.trace();
    j["ess"] = s.ess;
    j["log_normalizer"] = s.log_normalizer;
    j["constitution_mean"] = s.constitution_mean ? ordered_json(*s.constitution_mean) : ordered_json(nullptr);
    if (s.sample_set)
        j["constitution_samples"] = {{"n", s.sample_set->n},
                                     {"mean", s.sample_set->mean},
                                     {"kde_bandwidth", s.sample_set->bandwidth},
                                     {"kde_mode", s.sample_set->density_mode}};
    j["resampled"] = s.resampled;
    j["reinitialized"] = s.reinitialized;
    return j;
}

}  // namespace cofi::filter
