#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cofi/bench/metrics.hpp"
#include "cofi/core/json.hpp"
#include "cofi/filter/tracker.hpp"
#include "cofi/ingest/ais.hpp"

namespace cofi::trust {

/// Vessel category for an AIS ship-type code (ITU-R M.1371).
inline std::string vessel_type_name(std::optional<int> code) {
    if (!code || *code <= 0) return "unknown";
    const int c = *code;
    if (c == 30) return "fishing";
    if (c == 31 || c == 32) return "towing";
    if (c == 33) return "dredging";
    if (c == 34) return "diving";
    if (c == 35) return "military";
    if (c == 36) return "sailing";
    if (c == 37) return "pleasure";
    if (c >= 40 && c <= 49) return "high_speed";
    if (c == 50) return "pilot";
    if (c == 51) return "search_rescue";
    if (c == 52) return "tug";
    if (c == 53) return "port_tender";
    if (c == 55) return "law_enforcement";
    if (c == 58) return "medical";
    if (c >= 60 && c <= 69) return "passenger";
    if (c >= 70 && c <= 79) return "cargo";
    if (c >= 80 && c <= 89) return "tanker";
    return "other";
}

struct TrustFeatures {
    std::string vessel_type = "unknown";
    bool waterway_bound = false;
    bool anchoring = false;

    std::string key() const {
        return vessel_type + "|" + (waterway_bound ? "waterway" : "free") + "|" + (anchoring ? "anchoring" : "underway");
    }
    friend bool operator==(const TrustFeatures&, const TrustFeatures&) = default;
};

struct FeatureRules {
    double draft_threshold_m = 9.0;
    double anchoring_sog_kn = 0.5;
};

inline constexpr double kMetersPerSecondToKnots = 3600.0 / 1852.0;

/// Median speed over ground in knots; reported SOG where available, else the
/// track velocity.
inline double median_sog(const ingest::Track& track) {
    std::vector<double> v;
    for (const auto& s : track.samples)
        v.push_back(std::isfinite(s.sog) ? s.sog : s.v.norm() * kMetersPerSecondToKnots);
    if (v.empty()) throw ArgumentError("track '" + track.vessel_id + "' has no samples");
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline TrustFeatures extract_features(const ingest::Track& track, const FeatureRules& rules = {}) {
    TrustFeatures f;
    f.vessel_type = vessel_type_name(track.meta.vessel_type);
    f.waterway_bound = (track.meta.draft && *track.meta.draft >= rules.draft_threshold_m) ||
                       f.vessel_type == "cargo" || f.vessel_type == "tanker";
    f.anchoring = median_sog(track) < rules.anchoring_sog_kn;
    return f;
}

/// Calibrated trust ratio per feature bucket.
struct TrustTable {
    std::map<std::string, std::pair<TrustFeatures, double>> buckets;
    double default_tau = 0.0;

    double lookup(const TrustFeatures& f) const {
        auto it = buckets.find(f.key());
        return it == buckets.end() ? default_tau : it->second.second;
    }
    void set(const TrustFeatures& f, double tau) {
        if (!(tau >= 0.0 && tau <= 1.0)) throw ArgumentError("trust ratio must lie in [0, 1]");
        buckets[f.key()] = {f, tau};
    }
};

inline ordered_json features_to_json(const TrustFeatures& f) {
    ordered_json j;
    j["vessel_type"] = f.vessel_type;
    j["waterway_bound"] = f.waterway_bound;
    j["anchoring"] = f.anchoring;
    return j;
}

inline TrustFeatures features_from_json(const json& j, const std::string& what) {
    return {get_field<std::string>(j, "vessel_type", what), get_field<bool>(j, "waterway_bound", what),
            get_field<bool>(j, "anchoring", what)};
}

inline ordered_json table_to_json(const TrustTable& t) {
    ordered_json buckets = ordered_json::array();
    for (const auto& [_, entry] : t.buckets) {
        auto j = features_to_json(entry.first);
        j["tau"] = entry.second;
        buckets.push_back(std::move(j));
    }
    ordered_json out;
    out["format"] = "cofi-trust/1";
    out["default_tau"] = t.default_tau;
    out["buckets"] = std::move(buckets);
    return out;
}

inline TrustTable table_from_json(const json& j, const std::string& what = "trust table") {
    if (!j.is_object() || j.value("format", "") != "cofi-trust/1")
        throw FormatError(what + ": expected format \"cofi-trust/1\"");
    TrustTable t;
    t.default_tau = get_field<double>(j, "default_tau", what);
    if (!(t.default_tau >= 0.0 && t.default_tau <= 1.0)) throw ConfigError(what + ": default_tau outside [0, 1]");
    for (const auto& b : get_field<json>(j, "buckets", what)) {
        const double tau = get_field<double>(b, "tau", what);
        if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError(what + ": tau outside [0, 1]");
        t.set(features_from_json(b, what), tau);
    }
    return t;
}

inline TrustTable load_table(const std::filesystem::path& path) {
    return table_from_json(read_json_file(path), path.string());
}

/// One recorded journey for calibration: ground-truth positions and features.
struct CalibrationTrack {
    std::string id;
    std::vector<double> t;
    std::vector<Vec2> truth;
    TrustFeatures features;
};

struct BucketReport {
    TrustFeatures features;
    std::size_t track_count = 0;
    std::vector<double> tau_grid;
    /// Bucket-mean MAE per grid value.
    std::vector<double> mae;
    double chosen_tau = 0.0;
    /// Per-track argmin over the grid.
    std::vector<double> track_best_tau;
    std::vector<std::string> skipped;
};

struct CalibrationReport {
    std::vector<double> tau_grid;
    std::vector<BucketReport> buckets;

    /// Per grid value: buckets choosing it, tracks in those buckets, and
    /// tracks whose own optimum it is.
    struct HistogramRow {
        double tau;
        std::size_t buckets;
        std::size_t bucket_tracks;
        std::size_t tracks;
    };
    std::vector<HistogramRow> histogram() const {
        std::vector<HistogramRow> rows;
        for (double tau : tau_grid) {
            HistogramRow r{tau, 0, 0, 0};
            for (const auto& b : buckets) {
                if (b.track_count > 0 && b.chosen_tau == tau) ++r.buckets, r.bucket_tracks += b.track_count;
                r.tracks += static_cast<std::size_t>(std::count(b.track_best_tau.begin(), b.track_best_tau.end(), tau));
            }
            rows.push_back(r);
        }
        return rows;
    }
};

/// Inclusive evenly spaced grid 0, 1/(n-1), ..., 1.
inline std::vector<double> default_tau_grid(int n = 11) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(static_cast<double>(i) / (n - 1));
    return g;
}

inline std::size_t argmin_first(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] < v[best]) best = i;
    return best;
}

/// Grid search per feature bucket: every member track is filtered at every
/// grid value with fixed per-track seeds, and the value with the lowest
/// bucket-mean MAE wins (ties go to the smallest value).
inline std::pair<TrustTable, CalibrationReport> calibrate(const std::vector<CalibrationTrack>& tracks,
                                                          const filter::FilterConfig& cfg,
                                                          const filter::ConstitutionEvaluator& eval,
                                                          std::vector<double> tau_grid, std::uint64_t seed,
                                                          double default_tau = 0.0) {
    if (tracks.empty()) throw ArgumentError("calibration needs at least one track");
    if (tau_grid.empty()) throw ArgumentError("trust grid is empty");
    for (double t : tau_grid)
        if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("trust grid values must lie in [0, 1]");
    std::sort(tau_grid.begin(), tau_grid.end());
    tau_grid.erase(std::unique(tau_grid.begin(), tau_grid.end()), tau_grid.end());
    if (tau_grid.front() != 0.0) throw ConfigError("trust grid must contain 0");

    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < tracks.size(); ++i) members[tracks[i].features.key()].push_back(i);

    TrustTable table;
    table.default_tau = default_tau;
    CalibrationReport report{tau_grid, {}};
    for (const auto& [key, idx] : members) {
        BucketReport b;
        b.features = tracks[idx.front()].features;
        b.tau_grid = tau_grid;
        std::vector<std::vector<double>> per_track;  // track -> MAE per grid value
        for (std::size_t i : idx) {
            const auto& tr = tracks[i];
            const auto z = filter::simulate_measurements(tr.truth, cfg.measurement, derive_seed(seed, "measurements", i));
            std::vector<double> row;
            try {
                for (double tau : tau_grid) {
                    const auto run = filter::run_filter(tr.t, z, cfg, &eval, tau, derive_seed(seed, "filter", i));
                    row.push_back(bench::mae(run.positions(), tr.truth));
                }
            } catch (const Error& e) {
                b.skipped.push_back(tr.id + ": " + e.what());
                continue;
            }
            b.track_best_tau.push_back(tau_grid[argmin_first(row)]);
            per_track.push_back(std::move(row));
        }
        b.track_count = per_track.size();
        if (per_track.empty()) {
            b.chosen_tau = default_tau;
            b.mae.assign(tau_grid.size(), NAN);
        } else {
            b.mae.assign(tau_grid.size(), 0.0);
            for (const auto& row : per_track)
                for (std::size_t k = 0; k < row.size(); ++k) b.mae[k] += row[k] / static_cast<double>(per_track.size());
            b.chosen_tau = tau_grid[argmin_first(b.mae)];
            table.set(b.features, b.chosen_tau);
        }
        report.buckets.push_back(std::move(b));
    }
    return {table, report};
}

inline ordered_json report_to_json(const CalibrationReport& r) {
    ordered_json buckets = ordered_json::array();
    for (const auto& b : r.buckets) {
        ordered_json j;
        j["features"] = features_to_json(b.features);
        j["track_count"] = b.track_count;
        ordered_json mae = ordered_json::array();
        for (double m : b.mae) mae.push_back(std::isfinite(m) ? ordered_json(m) : ordered_json(nullptr));
        j["mae"] = mae;
        j["chosen_tau"] = b.chosen_tau;
        j["track_best_tau"] = b.track_best_tau;
        j["skipped"] = b.skipped;
        buckets.push_back(std::move(j));
    }
    ordered_json hist = ordered_json::array();
    for (const auto& h : r.histogram())
        hist.push_back({{"tau", h.tau}, {"buckets", h.buckets}, {"bucket_tracks", h.bucket_tracks}, {"tracks", h.tracks}});
    ordered_json out;
    out["format"] = "cofi-calibration/1";
    out["objective"] = "bucket-mean position MAE (m)";
    out["tau_grid"] = r.tau_grid;
    out["buckets"] = std::move(buckets);
    out["histogram"] = std::move(hist);
    return out;
}

inline std::string histogram_csv(const CalibrationReport& r) {
    std::string out = "tau,buckets,bucket_tracks,tracks\n";
    for (const auto& h : r.histogram()) {
        const auto j = ordered_json(h.tau).dump();
        out += j + "," + std::to_string(h.buckets) + "," + std::to_string(h.bucket_tracks) + "," +
               std::to_string(h.tracks) + "\n";
    }
    return out;
}

}  // namespace cofi::trust
