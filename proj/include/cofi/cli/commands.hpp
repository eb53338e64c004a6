#pragma once

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cofi/bench/scenario.hpp"
#include "cofi/core/json.hpp"
#include "cofi/filter/evaluator.hpp"
#include "cofi/filter/tracker.hpp"
#include "cofi/geo/geojson.hpp"
#include "cofi/geo/raster_io.hpp"
#include "cofi/geo/starmap.hpp"
#include "cofi/ingest/ais.hpp"
#include "cofi/ingest/track_io.hpp"
#include "cofi/logic/environment.hpp"
#include "cofi/logic/field.hpp"
#include "cofi/logic/parser.hpp"
#include "cofi/trust/trust.hpp"

namespace cofi::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kUserError = 2, kInternalError = 3 };

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

inline LogLevel log_level_from_string(const std::string& s) {
    if (s == "error") return LogLevel::Error;
    if (s == "warn") return LogLevel::Warn;
    if (s == "info") return LogLevel::Info;
    if (s == "debug") return LogLevel::Debug;
    throw ConfigError("unknown log level '" + s + "' (error, warn, info, debug)");
}

/// Level from COFI_LOG_LEVEL, info when unset.
inline LogLevel log_level_from_env() {
    const char* v = std::getenv("COFI_LOG_LEVEL");
    return v && *v ? log_level_from_string(v) : LogLevel::Info;
}

/// Diagnostics go here; result files never depend on it.
class Log {
public:
    Log(std::ostream& os, LogLevel level) : os_(&os), level_(level) {}

    void error(const std::string& m) const { write(LogLevel::Error, "error: ", m); }
    void warn(const std::string& m) const { write(LogLevel::Warn, "warning: ", m); }
    void info(const std::string& m) const { write(LogLevel::Info, "", m); }
    void debug(const std::string& m) const { write(LogLevel::Debug, "", m); }

private:
    void write(LogLevel l, const char* prefix, const std::string& m) const {
        if (l <= level_) *os_ << prefix << m << "\n";
    }
    std::ostream* os_;
    LogLevel level_;
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }
    std::string str() const { return std::to_string(seconds()) + " s"; }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Runs a command and turns its errors into an exit code plus a diagnostic.
/// Bad input and configuration give 2; broken invariants and anything
/// unexpected give 3.
inline int run_command(const std::function<void()>& body, const Log& log) {
    try {
        body();
        return kOk;
    } catch (const InvariantViolation& e) {
        log.error(std::string("internal: ") + e.what());
        return kInternalError;
    } catch (const ArgumentError& e) {
        log.error(std::string("internal: ") + e.what());
        return kInternalError;
    } catch (const Error& e) {
        log.error(e.what());
        return kUserError;
    } catch (const fs::filesystem_error& e) {
        log.error(e.what());
        return kUserError;
    } catch (const std::exception& e) {
        log.error(std::string("internal: ") + e.what());
        return kInternalError;
    }
}

inline void write_json(const fs::path& path, const ordered_json& j) { write_text_file(path, j.dump(2) + "\n"); }
inline void write_json(const fs::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

inline void require_file(const fs::path& p, const std::string& what) {
    if (!fs::is_regular_file(p)) throw ConfigError(what + " '" + p.string() + "' does not exist");
}

/// "lat,lon"
inline ingest::GeoOrigin parse_origin(const std::string& s) {
    const auto comma = s.find(',');
    const auto lat = comma == std::string::npos ? std::nullopt : ingest::detail::parse_number(s.substr(0, comma));
    const auto lon = comma == std::string::npos ? std::nullopt : ingest::detail::parse_number(s.substr(comma + 1));
    if (!lat || !lon || *lat < -90 || *lat > 90 || *lon < -180 || *lon > 180)
        throw ConfigError("origin must be 'lat,lon' in degrees, got '" + s + "'");
    return {*lat, *lon};
}

/// Comma-separated numbers.
inline std::vector<double> parse_number_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto end = std::min(s.find(',', start), s.size());
        const auto v = ingest::detail::parse_number(s.substr(start, end - start));
        if (!v) throw ConfigError(what + ": '" + s + "' is not a comma-separated list of numbers");
        out.push_back(*v);
        start = end + 1;
    }
    return out;
}

inline geo::GridSpec load_grid(const fs::path& path) {
    require_file(path, "grid file");
    const auto j = read_json_file(path);
    return geo::grid_from_json(j.contains("grid") ? j.at("grid") : j, path.string());
}

inline logic::Program load_constitution(const fs::path& path) {
    require_file(path, "constitution");
    try {
        return logic::parse(read_text_file(path));
    } catch (const ParseError& e) {
        throw FormatError(path.string() + ":" + e.what());
    }
}

inline void check_origins(const std::optional<ingest::GeoOrigin>& a, const std::optional<ingest::GeoOrigin>& b,
                          const std::string& what) {
    if (a && b && (a->lat != b->lat || a->lon != b->lon))
        throw ConfigError(what + ": tracks and StaR Map use different projection origins");
}

// ---------------------------------------------------------------- ingest

struct IngestOptions {
    fs::path csv;
    fs::path out;
    double dt = 60.0;
    double gap_s = 600.0;
    std::optional<std::string> origin;
    /// Take the projection origin from this GeoJSON map.
    std::optional<fs::path> origin_map;
    /// field=Header overrides for the CSV schema.
    std::vector<std::string> columns;
};

inline ingest::ColumnMap column_map(const std::vector<std::string>& overrides) {
    ingest::ColumnMap m;
    const std::map<std::string, std::string*> slots{
        {"vessel_id", &m.vessel_id}, {"timestamp", &m.timestamp}, {"lat", &m.lat},
        {"lon", &m.lon},             {"sog", &m.sog},             {"cog", &m.cog},
        {"vessel_type", &m.vessel_type}, {"draft", &m.draft}};
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        const auto it = eq == std::string::npos ? slots.end() : slots.find(o.substr(0, eq));
        if (it == slots.end() || eq + 1 >= o.size())
            throw ConfigError("column override must be field=Header with field one of vessel_id, timestamp, lat, "
                              "lon, sog, cog, vessel_type, draft; got '" + o + "'");
        *it->second = o.substr(eq + 1);
    }
    return m;
}

inline void cmd_ingest(const IngestOptions& o, const Log& log) {
    require_file(o.csv, "AIS CSV");
    if (o.origin && o.origin_map) throw ConfigError("give either --origin or --origin-map");
    const Stopwatch sw;
    auto read = ingest::read_ais_csv(o.csv, column_map(o.columns));
    if (read.records.empty()) throw ConfigError(o.csv.string() + ": no valid AIS records");
    ingest::GeoOrigin origin;
    if (o.origin) origin = parse_origin(*o.origin);
    else if (o.origin_map) {
        require_file(*o.origin_map, "map");
        const auto m = geo::load_geojson(*o.origin_map);
        if (!m.origin) throw ConfigError(o.origin_map->string() + ": map uses local coordinates, no origin");
        origin = *m.origin;
    } else origin = ingest::records_center(read.records);
    const auto kept = read.records.size();
    const auto segments = ingest::segment_tracks(std::move(read.records), origin, o.gap_s);
    ingest::TrackSet set{origin, {}};
    std::size_t short_tracks = 0;
    for (const auto& s : segments) {
        if (auto r = ingest::resample_track(s, o.dt)) set.tracks.push_back(std::move(*r));
        else ++short_tracks;
    }
    write_json(o.out, ingest::tracks_to_json(set));
    log.info("rows " + std::to_string(read.rows_in) + ", kept " + std::to_string(kept) + ", dropped invalid " +
             std::to_string(read.dropped_invalid) + ", dropped duplicate " + std::to_string(read.dropped_duplicate));
    log.info("tracks " + std::to_string(set.tracks.size()) + " (" + std::to_string(short_tracks) +
             " shorter than one step dropped), wrote " + o.out.string() + " in " + sw.str());
}

// ---------------------------------------------------------- build-starmap

struct BuildStarmapOptions {
    fs::path map;
    fs::path perturb;
    fs::path grid;
    int samples = 20;
    std::uint64_t seed = 1;
    /// Layers needed by this program's environment atoms.
    std::optional<fs::path> constitution;
    /// Extra layers as relation:tag.
    std::vector<std::string> relations;
    fs::path out;
    std::optional<fs::path> pgm_dir;
};

inline std::vector<geo::RelationSpec> parse_relations(const std::vector<std::string>& items) {
    std::vector<geo::RelationSpec> out;
    for (const auto& s : items) {
        const auto colon = s.find(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 == s.size())
            throw ConfigError("layer must be relation:tag, got '" + s + "'");
        out.push_back({geo::relation_from_string(s.substr(0, colon)), s.substr(colon + 1)});
    }
    return out;
}

inline void cmd_build_starmap(const BuildStarmapOptions& o, const Log& log) {
    require_file(o.map, "map");
    require_file(o.perturb, "perturbation file");
    if (o.samples < 2) throw ConfigError("samples must be >= 2");
    const Stopwatch sw;
    const auto loaded = geo::load_geojson(o.map);
    const auto rules = geo::parse_perturbation_rules(read_json_file<ordered_json>(o.perturb), o.perturb.string());
    const auto grid = load_grid(o.grid);
    std::vector<geo::RelationSpec> rel;
    if (o.constitution) rel = logic::environment_relations(load_constitution(*o.constitution));
    for (const auto& r : parse_relations(o.relations))
        if (std::none_of(rel.begin(), rel.end(),
                         [&](const geo::RelationSpec& x) { return x.relation == r.relation && x.tag == r.tag; }))
            rel.push_back(r);
    if (rel.empty()) throw ConfigError("no layers requested: give --constitution and/or --layer");
    const auto perturb = geo::resolve_perturbations(loaded.map, rules);
    geo::StaRMap m{loaded.origin, grid, o.samples, o.seed, {}};
    m.layers = geo::build_starmap(loaded.map, perturb, rel, grid, o.samples, o.seed);
    write_json(o.out, geo::starmap_to_json(m));
    if (o.pgm_dir)
        for (const auto& l : m.layers) {
            write_text_file(*o.pgm_dir / (l.name() + "_mean.pgm"), geo::encode_pgm(grid, l.mean));
            write_text_file(*o.pgm_dir / (l.name() + "_std.pgm"), geo::encode_pgm(grid, l.std));
        }
    log.info("seed " + std::to_string(o.seed) + ", " + std::to_string(m.layers.size()) + " layers on " +
             std::to_string(grid.rows) + "x" + std::to_string(grid.cols) + " cells, N = " + std::to_string(o.samples));
    log.info("built StaR Map in " + sw.str() + ", wrote " + o.out.string());
}

// ------------------------------------------------------------------ field

struct FieldOptions {
    fs::path constitution;
    fs::path starmap;
    fs::path out;
    std::optional<fs::path> pgm;
};

inline void cmd_field(const FieldOptions& o, const Log& log) {
    const auto program = load_constitution(o.constitution);
    require_file(o.starmap, "StaR Map");
    const Stopwatch sw;
    const auto m = geo::load_starmap(o.starmap);
    const auto f = logic::precompute_field(program, m.layers, m.grid);
    std::size_t flagged = 0;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        if (!(f.values[i] >= 0.0 && f.values[i] <= 1.0))
            throw InvariantViolation("field value " + std::to_string(f.values[i]) + " outside [0, 1]");
        flagged += f.flags[i] != geo::CellFlag::Ok;
    }
    write_json(o.out, logic::field_to_json(f, m.origin));
    if (o.pgm) write_text_file(*o.pgm, geo::encode_pgm(f.grid, f.values, std::make_pair(0.0, 1.0)));
    if (flagged) log.warn(std::to_string(flagged) + " cells could not be evaluated and hold 0");
    log.info("field on " + std::to_string(f.grid.rows) + "x" + std::to_string(f.grid.cols) + " cells in " + sw.str() +
             ", wrote " + o.out.string());
}

// ------------------------------------------------------------------ track

/// Inputs shared by track and calibrate.
struct ConstitutionInputs {
    std::optional<fs::path> constitution;
    std::optional<fs::path> starmap;
    /// Precomputed field for field mode; computed from the two above otherwise.
    std::optional<fs::path> field;
};

struct LoadedConstitution {
    std::optional<ingest::GeoOrigin> origin;
    std::unique_ptr<filter::ConstitutionEvaluator> evaluator;
};

inline LoadedConstitution load_evaluator(const ConstitutionInputs& in, filter::ConstitutionMode mode) {
    LoadedConstitution out;
    if (mode == filter::ConstitutionMode::Field && in.field) {
        require_file(*in.field, "field");
        const auto j = read_json_file(*in.field);
        out.origin = geo::origin_from_json(j.value("origin", json()), in.field->string());
        out.evaluator = std::make_unique<filter::FieldEvaluator>(logic::field_from_json(j, in.field->string()));
        return out;
    }
    if (!in.constitution || !in.starmap)
        throw ConfigError(mode == filter::ConstitutionMode::Field
                              ? "field mode needs --field, or --constitution with --starmap"
                              : "direct mode needs --constitution and --starmap");
    const auto program = load_constitution(*in.constitution);
    require_file(*in.starmap, "StaR Map");
    auto m = geo::load_starmap(*in.starmap);
    out.origin = m.origin;
    if (mode == filter::ConstitutionMode::Field)
        out.evaluator = std::make_unique<filter::FieldEvaluator>(logic::precompute_field(program, m.layers, m.grid));
    else
        out.evaluator = std::make_unique<filter::DirectEvaluator>(program, std::move(m.layers));
    return out;
}

inline filter::FilterConfig load_filter_config(const std::optional<fs::path>& path) {
    if (!path) return {};
    require_file(*path, "filter config");
    return filter::filter_config_from_json(read_json_file(*path), path->string());
}

inline std::optional<filter::ConstitutionMode> parse_mode(const std::optional<std::string>& s) {
    if (!s) return std::nullopt;
    if (*s == "direct") return filter::ConstitutionMode::Direct;
    if (*s == "field") return filter::ConstitutionMode::Field;
    throw ConfigError("mode must be 'direct' or 'field', got '" + *s + "'");
}

inline ingest::TrackSet load_track_set(const fs::path& p) {
    require_file(p, "tracks");
    auto set = ingest::load_tracks(p);
    if (set.tracks.empty()) throw ConfigError(p.string() + ": no tracks");
    return set;
}

struct TrackOptions {
    fs::path tracks;
    ConstitutionInputs inputs;
    std::optional<fs::path> filter_config;
    std::optional<std::string> mode;
    std::optional<double> tau;
    std::optional<fs::path> trust_table;
    bool no_constitution = false;
    std::uint64_t seed = 1;
    fs::path out;
    std::optional<fs::path> summary;
};

inline void cmd_track(const TrackOptions& o, const Log& log) {
    auto cfg = load_filter_config(o.filter_config);
    if (auto m = parse_mode(o.mode)) cfg.mode = *m;
    if (o.no_constitution && (o.tau || o.trust_table))
        throw ConfigError("--no-constitution excludes --tau and --trust-table");
    if (o.tau && o.trust_table) throw ConfigError("give either --tau or --trust-table");
    if (o.tau && !(*o.tau >= 0.0 && *o.tau <= 1.0)) throw ConfigError("--tau must lie in [0, 1]");
    const auto set = load_track_set(o.tracks);

    std::optional<trust::TrustTable> table;
    std::optional<double> fixed_tau;
    if (o.no_constitution) fixed_tau = 0.0;
    else if (o.tau) fixed_tau = *o.tau;
    else if (o.trust_table) {
        require_file(*o.trust_table, "trust table");
        table = trust::load_table(*o.trust_table);
    } else if (const auto* t = std::get_if<double>(&cfg.tau)) fixed_tau = *t;
    else throw ConfigError("filter config asks for a trust table: pass --trust-table");

    LoadedConstitution con;
    if (!o.no_constitution) {
        con = load_evaluator(o.inputs, cfg.mode);
        check_origins(set.origin, con.origin, o.tracks.string());
    }
    log.info("seed " + std::to_string(o.seed) + ", " + std::to_string(set.tracks.size()) + " tracks, " +
             (o.no_constitution ? std::string("no constitution") : std::string("mode ") + filter::to_string(cfg.mode)));

    const Stopwatch sw;
    std::string lines;
    ordered_json rows = ordered_json::array();
    double mae_sum = 0.0;
    for (std::size_t i = 0; i < set.tracks.size(); ++i) {
        const auto& tr = set.tracks[i];
        const auto truth = tr.positions();
        const auto times = tr.times();
        const auto features = trust::extract_features(tr);
        const double tau = fixed_tau ? *fixed_tau : table->lookup(features);
        const auto z = cfg.synthetic_noise
                           ? filter::simulate_measurements(truth, cfg.measurement, derive_seed(o.seed, "measurements", i))
                           : truth;
        const auto run = filter::run_filter(times, z, cfg, con.evaluator.get(), tau, derive_seed(o.seed, "filter", i));
        for (std::size_t k = 0; k < run.steps.size(); ++k) {
            ordered_json line;
            line["track"] = tr.vessel_id;
            const auto step = filter::step_to_json(run.steps[k], k);
            for (const auto& [key, v] : step.items()) line[key] = v;
            lines += line.dump() + "\n";
        }
        const double m = bench::mae(run.positions(), truth);
        mae_sum += m;
        ordered_json row;
        row["vessel_id"] = tr.vessel_id;
        row["features"] = trust::features_to_json(features);
        row["tau"] = tau;
        row["steps"] = run.steps.size();
        row["mae"] = m;
        row["measurement_mae"] = bench::mae(z, truth);
        row["reinitializations"] = run.reinitializations;
        rows.push_back(std::move(row));
        log.debug(tr.vessel_id + ": tau " + std::to_string(tau) + ", MAE " + std::to_string(m) + " m");
    }
    write_text_file(o.out, lines);
    if (o.summary) {
        ordered_json s;
        s["format"] = "cofi-track-summary/1";
        s["seed"] = o.seed;
        s["tracks"] = std::move(rows);
        s["mean_mae"] = mae_sum / static_cast<double>(set.tracks.size());
        write_json(*o.summary, s);
    }
    log.info("filtered in " + sw.str() + " (" +
             std::to_string(sw.seconds() * 1e3 / static_cast<double>(set.tracks.size())) + " ms per track), wrote " +
             o.out.string());
}

// -------------------------------------------------------------- calibrate

struct CalibrateOptions {
    fs::path tracks;
    ConstitutionInputs inputs;
    std::optional<fs::path> filter_config;
    std::optional<std::string> mode;
    std::optional<std::string> tau_grid;
    double default_tau = 0.0;
    std::uint64_t seed = 1;
    fs::path out;
    std::optional<fs::path> report;
    std::optional<fs::path> histogram;
};

inline void cmd_calibrate(const CalibrateOptions& o, const Log& log) {
    auto cfg = load_filter_config(o.filter_config);
    if (auto m = parse_mode(o.mode)) cfg.mode = *m;
    if (!(o.default_tau >= 0.0 && o.default_tau <= 1.0)) throw ConfigError("--default-tau must lie in [0, 1]");
    const auto grid = o.tau_grid ? parse_number_list(*o.tau_grid, "--tau-grid") : trust::default_tau_grid();
    const auto set = load_track_set(o.tracks);
    const auto con = load_evaluator(o.inputs, cfg.mode);
    check_origins(set.origin, con.origin, o.tracks.string());
    std::vector<trust::CalibrationTrack> tracks;
    for (const auto& tr : set.tracks)
        tracks.push_back({tr.vessel_id, tr.times(), tr.positions(), trust::extract_features(tr)});
    log.info("seed " + std::to_string(o.seed) + ", " + std::to_string(tracks.size()) + " tracks, " +
             std::to_string(grid.size()) + " grid values, mode " + filter::to_string(cfg.mode));
    const Stopwatch sw;
    const auto [table, report] = trust::calibrate(tracks, cfg, *con.evaluator, grid, o.seed, o.default_tau);
    write_json(o.out, trust::table_to_json(table));
    if (o.report) write_json(*o.report, trust::report_to_json(report));
    if (o.histogram) write_text_file(*o.histogram, trust::histogram_csv(report));
    for (const auto& b : report.buckets) {
        log.info(b.features.key() + ": " + std::to_string(b.track_count) + " tracks, tau " + std::to_string(b.chosen_tau));
        for (const auto& s : b.skipped) log.warn("skipped " + s);
    }
    log.info("calibrated in " + sw.str() + ", wrote " + o.out.string());
}

// ------------------------------------------------------------------ bench

struct BenchOptions {
    fs::path scenario;
    fs::path out_dir;
    std::optional<int> seeds;
    std::optional<std::uint64_t> master_seed;
};

inline void cmd_bench(const BenchOptions& o, const Log& log) {
    require_file(o.scenario, "scenario");
    auto sc = bench::load_scenario(o.scenario);
    if (o.seeds) {
        if (*o.seeds < 1) throw ConfigError("--seeds must be >= 1");
        sc.seeds = *o.seeds;
    }
    if (o.master_seed) sc.master_seed = *o.master_seed;
    log.info("scenario " + sc.name + ", master seed " + std::to_string(sc.master_seed) + ", " +
             std::to_string(sc.seeds) + " seeds");
    const Stopwatch sw;
    const auto setup = bench::prepare(std::move(sc));
    log.info("StaR Map and field ready in " + sw.str());
    const auto res = bench::run_benchmark(setup);
    write_json(o.out_dir / "metrics.json", bench::report_to_json(res.report));
    write_text_file(o.out_dir / "per_seed.csv", bench::report_csv(res.report));
    if (res.calibration) {
        write_json(o.out_dir / "calibration.json", trust::report_to_json(*res.calibration));
        write_text_file(o.out_dir / "tau_histogram.csv", trust::histogram_csv(*res.calibration));
    }
    write_text_file(o.out_dir / "field.pgm", geo::encode_pgm(setup.field.grid, setup.field.values, std::make_pair(0.0, 1.0)));
    for (std::size_t a = 0; a < res.report.taus.size(); ++a)
        log.info("tau " + std::to_string(res.report.taus[a]) + ": median relative MAE " +
                 std::to_string(res.report.relative_summary(a).median));
    log.info("bench finished in " + sw.str() + ", wrote " + o.out_dir.string());
}

}  // namespace cofi::cli
