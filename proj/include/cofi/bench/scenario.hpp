#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cofi/bench/agents.hpp"
#include "cofi/bench/metrics.hpp"
#include "cofi/core/json.hpp"
#include "cofi/filter/tracker.hpp"
#include "cofi/geo/geojson.hpp"
#include "cofi/geo/starmap.hpp"
#include "cofi/logic/field.hpp"
#include "cofi/logic/parser.hpp"
#include "cofi/trust/trust.hpp"

namespace cofi::bench {

/// Parallel east-west lanes tagged "way", separated by untagged gaps.
struct LanesSpec {
    int lanes = 6;
    double lane_width = 60.0;
    /// Distance between neighbouring lane centers.
    double period = 200.0;
    /// Extent of the modelled area in x.
    double length = 3000.0;

    void validate() const {
        if (lanes < 1 || !(lane_width > 0.0) || !(period > lane_width) || !(length > 0.0))
            throw ConfigError("lanes world: need lanes >= 1, 0 < lane_width < period, length > 0");
    }
    BBox bbox() const { return {0.0, 0.0, length, lanes * period}; }
    double lane_center(int k) const { return (k + 0.5) * period; }
};

inline geo::VectorMap lanes_map(const LanesSpec& s) {
    s.validate();
    geo::MapBuilder b;
    // Lanes overhang the area so their ends never matter.
    const double x0 = -0.25 * s.length, x1 = 1.25 * s.length;
    for (int k = 0; k < s.lanes; ++k) {
        const double lo = s.lane_center(k) - s.lane_width / 2, hi = s.lane_center(k) + s.lane_width / 2;
        b.add_polygon({{x0, lo}, {x1, lo}, {x1, hi}, {x0, hi}}, {"way"});
    }
    return b.build();
}

struct AgentSpec {
    int steps = 100;
    double dt = 5.0;
    double sigma_a = 0.05;
    /// Horizon (s) at which kicks are judged; 0 judges the next position.
    double lookahead_s = 0.0;
};

struct Scenario {
    std::string name = "scenario";
    logic::Program constitution;
    geo::VectorMap map;
    geo::PerturbationRules perturbation;
    geo::GridSpec grid;
    int starmap_samples = 20;
    Compliance mode = Compliance::Compliant;
    AgentSpec agent;
    std::vector<AgentState> compliant_starts;
    std::vector<AgentState> incompliant_starts;
    filter::FilterConfig filter;
    std::vector<double> tau_grid = trust::default_tau_grid();
    int calibration_seeds = 5;
    /// Extra trust ratios evaluated next to the calibrated one.
    std::vector<double> taus;
    int seeds = 20;
    std::uint64_t master_seed = 1;
};

/// Lane-keeping scenario on a generated lanes world; compliant agents start
/// on lane centers, incompliant ones between lanes.
inline Scenario lanes_scenario(const LanesSpec& spec = {}, Compliance mode = Compliance::Compliant,
                               double speed = 4.0) {
    Scenario sc;
    sc.name = std::string("lanes-") + to_string(mode);
    sc.constitution = logic::parse(
        "% Vessels keep to the marked lanes.\n"
        "constitution(X, Z) :- over(X, way).\n"
        "0.3 :: constitution(X, Z) :- \\+ over(X, way), distance(X, way) < 20.\n");
    sc.map = lanes_map(spec);
    sc.perturbation = {{"*", geo::FeaturePerturbation::isotropic(5.0, 0.0005, 0.0)}};
    const BBox bb = spec.bbox();
    sc.grid = {bb, static_cast<int>(std::lround(bb.height() / 20.0)), static_cast<int>(std::lround(bb.width() / 20.0))};
    sc.mode = mode;
    sc.agent.lookahead_s = 120.0;
    const double x = 0.1 * spec.length;
    for (int k = 0; k < spec.lanes; ++k) sc.compliant_starts.push_back({{x, spec.lane_center(k)}, {speed, 0.0}});
    for (int k = 1; k < spec.lanes; ++k) sc.incompliant_starts.push_back({{x, k * spec.period}, {speed, 0.0}});
    sc.filter.particles = 2000;
    sc.filter.measurement = filter::MeasurementModel::isotropic(50.0);
    sc.filter.sigma_a = sc.agent.sigma_a;
    sc.filter.constitution_samples = 0;
    sc.filter.mode = filter::ConstitutionMode::Field;
    return sc;
}

namespace detail {

inline std::vector<AgentState> parse_starts(const json& j, const std::string& what) {
    std::vector<AgentState> out;
    if (!j.is_array()) throw FormatError(what + ": starts must be a list of [x, y, vx, vy]");
    for (const auto& s : j) {
        const auto v = s.get<std::vector<double>>();
        if (v.size() != 4) throw FormatError(what + ": each start is [x, y, vx, vy]");
        out.push_back({{v[0], v[1]}, {v[2], v[3]}});
    }
    return out;
}

}  // namespace detail

/// Reads a scenario file. Paths inside are relative to the file.
inline Scenario scenario_from_json(const json& j, const std::filesystem::path& base_dir,
                                   const std::string& what = "scenario") {
    if (!j.is_object() || j.value("format", "") != "cofi-scenario/1")
        throw FormatError(what + ": expected format \"cofi-scenario/1\"");
    const auto mode = compliance_from_string(get_field_or<std::string>(j, "mode", "compliant", what));
    Scenario sc;
    if (j.contains("world")) {
        const auto& w = j.at("world");
        if (get_field<std::string>(w, "kind", what + ": world") != "lanes")
            throw ConfigError(what + ": the only generated world is \"lanes\"");
        LanesSpec spec;
        spec.lanes = get_field_or<int>(w, "lanes", spec.lanes, what);
        spec.lane_width = get_field_or<double>(w, "lane_width", spec.lane_width, what);
        spec.period = get_field_or<double>(w, "period", spec.period, what);
        spec.length = get_field_or<double>(w, "length", spec.length, what);
        sc = lanes_scenario(spec, mode, get_field_or<double>(w, "speed", 4.0, what));
    } else if (j.contains("map")) {
        sc.map = geo::load_geojson(base_dir / get_field<std::string>(j, "map", what)).map;
        sc.mode = mode;
        if (!j.contains("grid") || !j.contains("constitution") || !j.contains("starts"))
            throw FormatError(what + ": a file-based scenario needs grid, constitution and starts");
    } else {
        throw FormatError(what + ": give either a generated world or a map file");
    }
    sc.name = get_field_or<std::string>(j, "name", sc.name, what);
    if (j.contains("constitution"))
        sc.constitution = logic::parse(read_text_file(base_dir / get_field<std::string>(j, "constitution", what)));
    if (j.contains("perturbation")) {
        const auto& p = j.at("perturbation");
        sc.perturbation = geo::parse_perturbation_rules(
            p.is_string() ? read_json_file<ordered_json>(base_dir / p.get<std::string>()) : ordered_json(p));
    }
    if (j.contains("grid")) sc.grid = geo::grid_from_json(j.at("grid"), what + ": grid");
    sc.starmap_samples = get_field_or<int>(j, "starmap_samples", sc.starmap_samples, what);
    if (j.contains("agent")) {
        const auto& a = j.at("agent");
        sc.agent.steps = get_field_or<int>(a, "steps", sc.agent.steps, what);
        sc.agent.dt = get_field_or<double>(a, "dt", sc.agent.dt, what);
        sc.agent.sigma_a = get_field_or<double>(a, "sigma_a", sc.agent.sigma_a, what);
        sc.agent.lookahead_s = get_field_or<double>(a, "lookahead_s", sc.agent.lookahead_s, what);
    }
    if (j.contains("starts")) {
        const auto& s = j.at("starts");
        if (s.contains("compliant")) sc.compliant_starts = detail::parse_starts(s.at("compliant"), what);
        if (s.contains("incompliant")) sc.incompliant_starts = detail::parse_starts(s.at("incompliant"), what);
    }
    if (j.contains("filter")) {
        auto fj = j.at("filter");
        if (!fj.contains("sigma_a")) fj["sigma_a"] = sc.agent.sigma_a;
        if (!fj.contains("constitution_samples")) fj["constitution_samples"] = 0;
        sc.filter = filter::filter_config_from_json(fj, what + ": filter");
    }
    if (j.contains("calibration")) {
        const auto& c = j.at("calibration");
        sc.tau_grid = get_field_or<std::vector<double>>(c, "tau_grid", sc.tau_grid, what);
        sc.calibration_seeds = get_field_or<int>(c, "seeds", sc.calibration_seeds, what);
    }
    sc.taus = get_field_or<std::vector<double>>(j, "taus", sc.taus, what);
    sc.seeds = get_field_or<int>(j, "seeds", sc.seeds, what);
    sc.master_seed = get_field_or<std::uint64_t>(j, "master_seed", sc.master_seed, what);
    if (sc.seeds < 1 || sc.calibration_seeds < 0 || sc.starmap_samples < 2)
        throw ConfigError(what + ": need seeds >= 1, calibration seeds >= 0 and starmap_samples >= 2");
    const bool needs_compliant = sc.mode != Compliance::Incompliant;
    const bool needs_incompliant = sc.mode != Compliance::Compliant;
    if ((needs_compliant && sc.compliant_starts.empty()) || (needs_incompliant && sc.incompliant_starts.empty()))
        throw ConfigError(what + ": no start positions for the requested compliance mode");
    sc.grid.validate();
    return sc;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    return scenario_from_json(read_json_file(path), path.parent_path(), path.string());
}

/// Scenario with its StaR Map and constitution field computed.
struct BenchSetup {
    Scenario scenario;
    std::vector<geo::StaRMapLayer> layers;
    logic::ConstitutionField field;
    std::unique_ptr<filter::ConstitutionEvaluator> evaluator;
};

inline std::unique_ptr<filter::ConstitutionEvaluator> make_evaluator(const BenchSetup& s,
                                                                     filter::ConstitutionMode mode) {
    if (mode == filter::ConstitutionMode::Field) return std::make_unique<filter::FieldEvaluator>(s.field);
    return std::make_unique<filter::DirectEvaluator>(s.scenario.constitution, s.layers);
}

inline BenchSetup prepare(Scenario sc) {
    BenchSetup s;
    const auto perturb = geo::resolve_perturbations(sc.map, sc.perturbation);
    s.layers = geo::build_starmap(sc.map, perturb, logic::environment_relations(sc.constitution), sc.grid,
                                  sc.starmap_samples, derive_seed(sc.master_seed, "starmap"));
    s.field = logic::precompute_field(sc.constitution, s.layers, sc.grid);
    s.scenario = std::move(sc);
    s.evaluator = make_evaluator(s, s.scenario.filter.mode);
    return s;
}

/// Ground truth of agent `index` in the stream named `label`.
inline AgentTrack scenario_agent(const BenchSetup& s, const std::string& label, std::size_t index) {
    const auto& sc = s.scenario;
    Compliance c = sc.mode;
    if (c == Compliance::Mixed) c = index % 2 == 0 ? Compliance::Compliant : Compliance::Incompliant;
    const auto& starts = c == Compliance::Compliant ? sc.compliant_starts : sc.incompliant_starts;
    Rng rng(derive_seed(sc.master_seed, label, index));
    const auto& start = starts[std::uniform_int_distribution<std::size_t>(0, starts.size() - 1)(rng)];
    return simulate_agent(s.field, start, sc.agent.steps, sc.agent.dt, sc.agent.sigma_a, c, rng,
                          sc.agent.lookahead_s);
}

struct SeedResult {
    std::size_t index = 0;
    double mae_baseline = 0.0;
    /// One entry per evaluated trust ratio.
    std::vector<double> mae_cofi;
    std::size_t reinit_baseline = 0;
    std::vector<std::size_t> reinit_cofi;

    double relative(std::size_t arm) const {
        return mae_baseline > 0.0 ? mae_cofi[arm] / mae_baseline : NAN;
    }
};

struct MetricReport {
    std::string scenario;
    std::string mode;
    std::optional<double> calibrated_tau;
    std::vector<double> taus;
    std::vector<SeedResult> seeds;

    Summary relative_summary(std::size_t arm) const {
        std::vector<double> r;
        for (const auto& s : seeds) r.push_back(s.relative(arm));
        return summarize(r);
    }
    Summary mae_summary(std::optional<std::size_t> arm) const {
        std::vector<double> r;
        for (const auto& s : seeds) r.push_back(arm ? s.mae_cofi[*arm] : s.mae_baseline);
        return summarize(r);
    }
};

/// Baseline (no constitution) and one arm per trust ratio on `seeds`
/// evaluation agents. All arms of a seed share the measurement sequence and
/// the filter seed, hence the initial particle cloud.
inline MetricReport run_ablation(const BenchSetup& s, const std::vector<double>& taus, int seeds) {
    const auto& sc = s.scenario;
    MetricReport rep;
    rep.scenario = sc.name;
    rep.mode = to_string(sc.mode);
    rep.taus = taus;
    for (int i = 0; i < seeds; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const auto agent = scenario_agent(s, "agent", idx);
        const auto z = filter::simulate_measurements(agent.p, sc.filter.measurement,
                                                     derive_seed(sc.master_seed, "measurements", idx));
        const auto fseed = derive_seed(sc.master_seed, "filter", idx);
        SeedResult r;
        r.index = idx;
        const auto base = filter::run_filter(agent.t, z, sc.filter, nullptr, 0.0, fseed);
        r.mae_baseline = mae(base.positions(), agent.p);
        r.reinit_baseline = base.reinitializations;
        for (double tau : taus) {
            const auto run = filter::run_filter(agent.t, z, sc.filter, s.evaluator.get(), tau, fseed);
            r.mae_cofi.push_back(mae(run.positions(), agent.p));
            r.reinit_cofi.push_back(run.reinitializations);
        }
        rep.seeds.push_back(std::move(r));
    }
    return rep;
}

/// Calibration tracks drawn from a stream disjoint from evaluation agents.
inline std::vector<trust::CalibrationTrack> calibration_tracks(const BenchSetup& s) {
    std::vector<trust::CalibrationTrack> out;
    for (int i = 0; i < s.scenario.calibration_seeds; ++i) {
        const auto agent = scenario_agent(s, "calibration-agent", static_cast<std::size_t>(i));
        out.push_back({"calibration-" + std::to_string(i), agent.t, agent.p, {"synthetic", true, false}});
    }
    return out;
}

struct BenchResult {
    std::optional<trust::CalibrationReport> calibration;
    MetricReport report;
};

/// Calibrates the trust ratio on held-out agents (when calibration seeds are
/// configured), then runs the ablation at the calibrated ratio plus any
/// extra ratios.
inline BenchResult run_benchmark(const BenchSetup& s) {
    const auto& sc = s.scenario;
    BenchResult out;
    std::vector<double> taus;
    std::optional<double> calibrated;
    if (sc.calibration_seeds > 0) {
        auto [table, report] = trust::calibrate(calibration_tracks(s), sc.filter, *s.evaluator, sc.tau_grid,
                                                derive_seed(sc.master_seed, "calibration"));
        calibrated = report.buckets.front().chosen_tau;
        taus.push_back(*calibrated);
        out.calibration = std::move(report);
    }
    for (double t : sc.taus)
        if (std::find(taus.begin(), taus.end(), t) == taus.end()) taus.push_back(t);
    out.report = run_ablation(s, taus, sc.seeds);
    out.report.calibrated_tau = calibrated;
    return out;
}

inline ordered_json summary_to_json(const Summary& s) {
    auto num = [](double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); };
    ordered_json j;
    j["n"] = s.n;
    j["mean"] = num(s.mean);
    j["std"] = num(s.std);
    j["median"] = num(s.median);
    return j;
}

inline ordered_json report_to_json(const MetricReport& r) {
    ordered_json arms = ordered_json::array();
    for (std::size_t a = 0; a < r.taus.size(); ++a) {
        ordered_json j;
        j["tau"] = r.taus[a];
        j["mae"] = summary_to_json(r.mae_summary(a));
        j["relative_mae"] = summary_to_json(r.relative_summary(a));
        arms.push_back(std::move(j));
    }
    ordered_json out;
    out["format"] = "cofi-metrics/1";
    out["scenario"] = r.scenario;
    out["mode"] = r.mode;
    out["relative_mae_definition"] = "MAE_cofi / MAE_baseline (position, m)";
    out["calibrated_tau"] = r.calibrated_tau ? ordered_json(*r.calibrated_tau) : ordered_json(nullptr);
    out["seeds"] = r.seeds.size();
    out["baseline_mae"] = summary_to_json(r.mae_summary(std::nullopt));
    out["arms"] = std::move(arms);
    return out;
}

/// One row per seed and arm.
inline std::string report_csv(const MetricReport& r) {
    auto num = [](double v) { return std::isfinite(v) ? ordered_json(v).dump() : std::string(); };
    std::string out = "seed,tau,mae_baseline,mae_cofi,relative_mae,reinit_baseline,reinit_cofi\n";
    for (const auto& s : r.seeds)
        for (std::size_t a = 0; a < r.taus.size(); ++a)
            out += std::to_string(s.index) + "," + num(r.taus[a]) + "," + num(s.mae_baseline) + "," +
                   num(s.mae_cofi[a]) + "," + num(s.relative(a)) + "," + std::to_string(s.reinit_baseline) + "," +
                   std::to_string(s.reinit_cofi[a]) + "\n";
    return out;
}

}  // namespace cofi::bench
