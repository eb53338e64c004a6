#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cofi/core/error.hpp"
#include "cofi/core/types.hpp"
#include "cofi/ingest/projection.hpp"

namespace cofi::ingest {

struct AisRecord {
    std::string vessel_id;
    /// Seconds since the Unix epoch, UTC.
    double t = 0.0;
    double lat = 0.0;
    double lon = 0.0;
    /// Knots; NaN when not reported.
    double sog = std::numeric_limits<double>::quiet_NaN();
    /// Degrees; NaN when not reported.
    double cog = std::numeric_limits<double>::quiet_NaN();
    std::optional<int> vessel_type;
    std::optional<double> draft;
};

/// Header names of each field. Defaults follow the NOAA AIS export.
struct ColumnMap {
    std::string vessel_id = "MMSI";
    std::string timestamp = "BaseDateTime";
    std::string lat = "LAT";
    std::string lon = "LON";
    std::string sog = "SOG";
    std::string cog = "COG";
    std::string vessel_type = "VesselType";
    std::string draft = "Draft";
};

struct AisReadResult {
    std::vector<AisRecord> records;
    std::size_t rows_in = 0;
    std::size_t dropped_invalid = 0;
    /// Earlier rows superseded by a later row with the same vessel and time.
    std::size_t dropped_duplicate = 0;

    std::size_t dropped() const noexcept { return dropped_invalid + dropped_duplicate; }
};

namespace detail {

/// Splits one CSV line (RFC 4180 quoting, no embedded newlines).
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') cur += '"', ++i;
            else if (c == '"') quoted = false;
            else cur += c;
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

inline std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v)) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

}  // namespace detail

/// "YYYY-MM-DDTHH:MM:SS[.fff]" (or a space instead of 'T') as UTC, or plain
/// epoch seconds.
inline std::optional<double> parse_timestamp(const std::string& s) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0;
    double sec = 0.0;
    char sep = 0;
    int used = 0;
    if (std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%lf%n", &y, &mo, &d, &sep, &h, &mi, &sec, &used) == 7 &&
        static_cast<std::size_t>(used) == s.size() && (sep == 'T' || sep == ' ')) {
        using namespace std::chrono;
        const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
        if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0.0 || sec >= 61.0) return std::nullopt;
        const auto days = sys_days{ymd}.time_since_epoch().count();
        return static_cast<double>(days) * 86400.0 + h * 3600.0 + mi * 60.0 + sec;
    }
    return detail::parse_number(s);
}

inline AisReadResult read_ais_csv(std::istream& in, const ColumnMap& cols = {}, const std::string& what = "AIS CSV") {
    std::string line;
    if (!std::getline(in, line)) throw FormatError(what + ": empty file");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const auto header = detail::split_csv_line(line);
    auto column = [&](const std::string& name, bool mandatory) -> int {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            if (mandatory) throw FormatError(what + ": missing mandatory column '" + name + "'");
            return -1;
        }
        return static_cast<int>(it - header.begin());
    };
    const int c_id = column(cols.vessel_id, true), c_t = column(cols.timestamp, true);
    const int c_lat = column(cols.lat, true), c_lon = column(cols.lon, true);
    const int c_sog = column(cols.sog, false), c_cog = column(cols.cog, false);
    const int c_type = column(cols.vessel_type, false), c_draft = column(cols.draft, false);

    AisReadResult res;
    // (vessel, time) -> index into res.records; later rows replace earlier ones.
    std::map<std::pair<std::string, double>, std::size_t> seen;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++res.rows_in;
        const auto f = detail::split_csv_line(line);
        auto cell = [&](int c) -> std::string { return c >= 0 && static_cast<std::size_t>(c) < f.size() ? f[static_cast<std::size_t>(c)] : ""; };
        AisRecord r;
        r.vessel_id = cell(c_id);
        const auto t = parse_timestamp(cell(c_t));
        const auto lat = detail::parse_number(cell(c_lat));
        const auto lon = detail::parse_number(cell(c_lon));
        if (r.vessel_id.empty() || !t || !lat || !lon || *lat < -90.0 || *lat > 90.0 || *lon < -180.0 ||
            *lon > 180.0) {
            ++res.dropped_invalid;
            continue;
        }
        r.t = *t;
        r.lat = *lat;
        r.lon = *lon;
        if (auto v = detail::parse_number(cell(c_sog)); v && *v >= 0.0) r.sog = *v;
        if (auto v = detail::parse_number(cell(c_cog))) r.cog = *v;
        if (auto v = detail::parse_number(cell(c_type)); v && *v > 0.0) r.vessel_type = static_cast<int>(*v);
        if (auto v = detail::parse_number(cell(c_draft)); v && *v > 0.0) r.draft = *v;

        const auto key = std::make_pair(r.vessel_id, r.t);
        if (auto it = seen.find(key); it != seen.end()) {
            res.records[it->second] = std::move(r);
            ++res.dropped_duplicate;
        } else {
            seen.emplace(key, res.records.size());
            res.records.push_back(std::move(r));
        }
    }
    return res;
}

inline AisReadResult read_ais_csv(const std::filesystem::path& path, const ColumnMap& cols = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    return read_ais_csv(in, cols, path.string());
}

struct TrackMeta {
    std::optional<int> vessel_type;
    std::optional<double> draft;
};

struct TrackSample {
    double t = 0.0;
    Vec2 p = Vec2::Zero();
    Vec2 v = Vec2::Zero();
    /// Knots; NaN when not reported.
    double sog = std::numeric_limits<double>::quiet_NaN();
};

struct Track {
    std::string vessel_id;
    std::vector<TrackSample> samples;
    /// Uniform spacing after resampling; 0 for raw tracks.
    double dt = 0.0;
    TrackMeta meta;

    std::vector<double> times() const {
        std::vector<double> out;
        for (const auto& s : samples) out.push_back(s.t);
        return out;
    }
    std::vector<Vec2> positions() const {
        std::vector<Vec2> out;
        for (const auto& s : samples) out.push_back(s.p);
        return out;
    }
};

/// Origin at the center of the records' lat/lon bounding box.
inline GeoOrigin records_center(const std::vector<AisRecord>& records) {
    if (records.empty()) throw ArgumentError("no records to take an origin from");
    double lo_lat = 90, hi_lat = -90, lo_lon = 180, hi_lon = -180;
    for (const auto& r : records) {
        lo_lat = std::min(lo_lat, r.lat), hi_lat = std::max(hi_lat, r.lat);
        lo_lon = std::min(lo_lon, r.lon), hi_lon = std::max(hi_lon, r.lon);
    }
    return {0.5 * (lo_lat + hi_lat), 0.5 * (lo_lon + hi_lon)};
}

/// Groups records per vessel in time order, splitting wherever consecutive
/// reports are more than `gap_s` apart. Tracks with fewer than two reports
/// are discarded. Vessels come out in id order.
inline std::vector<Track> segment_tracks(std::vector<AisRecord> records, const GeoOrigin& origin,
                                         double gap_s = 600.0) {
    if (!(gap_s > 0.0)) throw ConfigError("gap threshold must be positive");
    std::stable_sort(records.begin(), records.end(), [](const AisRecord& a, const AisRecord& b) {
        return a.vessel_id != b.vessel_id ? a.vessel_id < b.vessel_id : a.t < b.t;
    });
    std::vector<Track> out;
    Track cur;
    auto flush = [&] {
        if (cur.samples.size() >= 2) out.push_back(std::move(cur));
        cur = Track{};
    };
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        const bool new_vessel = i == 0 || r.vessel_id != records[i - 1].vessel_id;
        if (new_vessel || r.t - records[i - 1].t > gap_s) {
            flush();
            cur.vessel_id = r.vessel_id;
        }
        if (r.vessel_type) cur.meta.vessel_type = r.vessel_type;
        if (r.draft) cur.meta.draft = r.draft;
        cur.samples.push_back({r.t, project(r.lat, r.lon, origin), Vec2::Zero(), r.sog});
    }
    flush();
    return out;
}

/// Positions and SOG linearly interpolated onto t0, t0 + dt, ... up to the
/// last report; velocities from central differences (one-sided at the ends).
/// Returns nothing when the track spans less than one step.
inline std::optional<Track> resample_track(const Track& track, double dt) {
    if (!(dt > 0.0)) throw ConfigError("resampling step must be positive");
    const auto& s = track.samples;
    if (s.size() < 2) return std::nullopt;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (!(s[i].t > s[i - 1].t)) throw ArgumentError("track '" + track.vessel_id + "' is not strictly time-ordered");
    const double t0 = s.front().t, t1 = s.back().t;
    const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / dt + 1e-9)) + 1;
    if (n < 2) return std::nullopt;

    Track out{track.vessel_id, {}, dt, track.meta};
    out.samples.reserve(n);
    std::size_t j = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = t0 + static_cast<double>(k) * dt;
        while (j + 2 < s.size() && s[j + 1].t <= t) ++j;
        const auto& a = s[j];
        const auto& b = s[j + 1];
        TrackSample r;
        r.t = t;
        if (t <= a.t) {
            r.p = a.p, r.sog = a.sog;
        } else if (t >= b.t) {
            r.p = b.p, r.sog = b.sog;
        } else {
            const double f = (t - a.t) / (b.t - a.t);
            r.p = a.p + f * (b.p - a.p);
            r.sog = a.sog + f * (b.sog - a.sog);
            if (!std::isfinite(r.sog)) r.sog = std::isfinite(a.sog) ? a.sog : b.sog;
        }
        out.samples.push_back(r);
    }
    auto& o = out.samples;
    for (std::size_t k = 0; k < n; ++k) {
        if (k == 0) o[k].v = (o[1].p - o[0].p) / dt;
        else if (k + 1 == n) o[k].v = (o[k].p - o[k - 1].p) / dt;
        else o[k].v = (o[k + 1].p - o[k - 1].p) / (2.0 * dt);
    }
    return out;
}

}  // namespace cofi::ingest
