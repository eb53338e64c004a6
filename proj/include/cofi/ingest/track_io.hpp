#pragma once

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cofi/core/json.hpp"
#include "cofi/geo/raster_io.hpp"
#include "cofi/ingest/ais.hpp"

namespace cofi::ingest {

struct TrackSet {
    std::optional<GeoOrigin> origin;
    std::vector<Track> tracks;
};

namespace detail {

inline ordered_json nullable(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

}  // namespace detail

/// Column-oriented track file: one object per track with parallel arrays.
inline ordered_json tracks_to_json(const TrackSet& set) {
    ordered_json tracks = ordered_json::array();
    for (const auto& tr : set.tracks) {
        ordered_json j;
        j["vessel_id"] = tr.vessel_id;
        j["vessel_type"] = tr.meta.vessel_type ? ordered_json(*tr.meta.vessel_type) : ordered_json(nullptr);
        j["draft"] = tr.meta.draft ? ordered_json(*tr.meta.draft) : ordered_json(nullptr);
        j["dt"] = tr.dt;
        ordered_json t = ordered_json::array(), x = ordered_json::array(), y = ordered_json::array();
        ordered_json vx = ordered_json::array(), vy = ordered_json::array(), sog = ordered_json::array();
        for (const auto& s : tr.samples) {
            t.push_back(s.t);
            x.push_back(s.p.x());
            y.push_back(s.p.y());
            vx.push_back(s.v.x());
            vy.push_back(s.v.y());
            sog.push_back(detail::nullable(s.sog));
        }
        j["t"] = t;
        j["x"] = x;
        j["y"] = y;
        j["vx"] = vx;
        j["vy"] = vy;
        j["sog"] = sog;
        tracks.push_back(std::move(j));
    }
    ordered_json out;
    out["format"] = "cofi-tracks/1";
    out["origin"] = ordered_json(geo::origin_to_json(set.origin));
    out["tracks"] = std::move(tracks);
    return out;
}

inline TrackSet tracks_from_json(const json& j, const std::string& what = "tracks") {
    if (!j.is_object() || j.value("format", "") != "cofi-tracks/1")
        throw FormatError(what + ": expected format \"cofi-tracks/1\"");
    TrackSet set;
    set.origin = geo::origin_from_json(j.contains("origin") ? j.at("origin") : json(nullptr), what);
    for (const auto& tj : get_field<json>(j, "tracks", what)) {
        Track tr;
        tr.vessel_id = get_field<std::string>(tj, "vessel_id", what);
        const std::string w = what + " track '" + tr.vessel_id + "'";
        if (tj.contains("vessel_type") && !tj.at("vessel_type").is_null())
            tr.meta.vessel_type = get_field<int>(tj, "vessel_type", w);
        if (tj.contains("draft") && !tj.at("draft").is_null()) tr.meta.draft = get_field<double>(tj, "draft", w);
        tr.dt = get_field_or<double>(tj, "dt", 0.0, w);
        const auto t = get_field<std::vector<double>>(tj, "t", w);
        const auto x = get_field<std::vector<double>>(tj, "x", w);
        const auto y = get_field<std::vector<double>>(tj, "y", w);
        const auto n = t.size();
        if (x.size() != n || y.size() != n) throw FormatError(w + ": t, x and y differ in length");
        auto optional_column = [&](const char* key) {
            std::vector<double> v(n, std::numeric_limits<double>::quiet_NaN());
            if (!tj.contains(key)) return v;
            const auto& a = tj.at(key);
            if (!a.is_array() || a.size() != n) throw FormatError(w + ": '" + key + "' must have one entry per sample");
            for (std::size_t i = 0; i < n; ++i)
                if (!a[i].is_null()) v[i] = a[i].get<double>();
            return v;
        };
        const auto vx = optional_column("vx"), vy = optional_column("vy"), sog = optional_column("sog");
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0 && !(t[i] > t[i - 1])) throw FormatError(w + ": times must increase strictly");
            tr.samples.push_back({t[i], {x[i], y[i]},
                                  {std::isfinite(vx[i]) ? vx[i] : 0.0, std::isfinite(vy[i]) ? vy[i] : 0.0}, sog[i]});
        }
        if (tr.samples.size() < 2) throw FormatError(w + ": a track needs at least two samples");
        set.tracks.push_back(std::move(tr));
    }
    return set;
}

inline TrackSet load_tracks(const std::filesystem::path& path) {
    return tracks_from_json(read_json_file(path), path.string());
}

}  // namespace cofi::ingest
