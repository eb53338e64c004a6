#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <tuple>
#include <string>
#include <vector>

#include "cofi/core/json.hpp"
#include "cofi/geo/grid.hpp"
#include "cofi/geo/starmap.hpp"
#include "cofi/ingest/projection.hpp"

namespace cofi::geo {

/// A complete StaR Map as written to disk.
struct StaRMap {
    std::optional<ingest::GeoOrigin> origin;
    GridSpec grid;
    int sample_count = 0;
    std::uint64_t seed = 0;
    std::vector<StaRMapLayer> layers;
};

inline json grid_to_json(const GridSpec& g) {
    return {{"bbox", g.bbox.to_array()}, {"rows", g.rows}, {"cols", g.cols}};
}

inline GridSpec grid_from_json(const json& j, const std::string& what = "grid") {
    GridSpec g;
    const auto bbox = get_field<std::vector<double>>(j, "bbox", what);
    if (bbox.size() != 4) throw FormatError(what + ": bbox must be [min_x, min_y, max_x, max_y]");
    g.bbox = {bbox[0], bbox[1], bbox[2], bbox[3]};
    g.rows = get_field<int>(j, "rows", what);
    g.cols = get_field<int>(j, "cols", what);
    try {
        g.validate();
    } catch (const ConfigError& e) {
        throw FormatError(what + ": " + e.what());
    }
    return g;
}

inline json origin_to_json(const std::optional<ingest::GeoOrigin>& o) {
    if (!o) return nullptr;
    return {{"lat", o->lat}, {"lon", o->lon}};
}

inline std::optional<ingest::GeoOrigin> origin_from_json(const json& j, const std::string& what) {
    if (j.is_null()) return std::nullopt;
    return ingest::GeoOrigin{get_field<double>(j, "lat", what), get_field<double>(j, "lon", what)};
}

/// Flat row-major array; non-finite values become null.
inline json values_to_json(const std::vector<double>& v) {
    json arr = json::array();
    for (double x : v) {
        if (std::isfinite(x)) arr.push_back(x);
        else arr.push_back(nullptr);
    }
    return arr;
}

inline std::vector<double> values_from_json(const json& arr, std::size_t expected,
                                            const std::string& what) {
    if (!arr.is_array() || arr.size() != expected)
        throw FormatError(what + ": expected " + std::to_string(expected) + " values");
    std::vector<double> out;
    out.reserve(expected);
    for (const auto& x : arr) {
        if (x.is_null()) out.push_back(kNoFeature);
        else if (x.is_number()) out.push_back(x.get<double>());
        else throw FormatError(what + ": values must be numbers or null");
    }
    return out;
}

inline json starmap_to_json(const StaRMap& m) {
    json layers = json::array();
    for (const auto& l : m.layers) {
        std::vector<int> flags(l.flags.size());
        std::transform(l.flags.begin(), l.flags.end(), flags.begin(),
                       [](CellFlag f) { return static_cast<int>(f); });
        layers.push_back({{"relation", std::string(to_string(l.relation))},
                          {"tag", l.tag},
                          {"mean", values_to_json(l.mean)},
                          {"std", values_to_json(l.std)},
                          {"flags", flags}});
    }
    return {{"format", "cofi-starmap/1"},
            {"origin", origin_to_json(m.origin)},
            {"grid", grid_to_json(m.grid)},
            {"row_order", "south_to_north"},
            {"sample_count", m.sample_count},
            {"seed", m.seed},
            {"layers", layers}};
}

inline StaRMap starmap_from_json(const json& j, const std::string& what = "starmap") {
    if (j.value("format", "") != "cofi-starmap/1")
        throw FormatError(what + ": not a cofi-starmap/1 document");
    StaRMap m;
    m.origin = origin_from_json(j.value("origin", json()), what);
    m.grid = grid_from_json(get_field<json>(j, "grid", what), what + ": grid");
    m.sample_count = get_field<int>(j, "sample_count", what);
    m.seed = get_field_or<std::uint64_t>(j, "seed", 0, what);
    for (const auto& lj : get_field<json>(j, "layers", what)) {
        StaRMapLayer l;
        try {
            l.relation = relation_from_string(get_field<std::string>(lj, "relation", what));
        } catch (const ConfigError& e) {
            throw FormatError(what + ": " + e.what());
        }
        l.tag = get_field<std::string>(lj, "tag", what);
        const std::string lw = what + ": layer " + l.name();
        l.grid = m.grid;
        l.sample_count = m.sample_count;
        l.mean = values_from_json(get_field<json>(lj, "mean", lw), m.grid.size(), lw + " mean");
        l.std = values_from_json(get_field<json>(lj, "std", lw), m.grid.size(), lw + " std");
        const auto flags = get_field_or<std::vector<int>>(lj, "flags", std::vector<int>(m.grid.size(), 0), lw);
        if (flags.size() != m.grid.size()) throw FormatError(lw + ": flag count mismatch");
        for (int f : flags) {
            if (f < 0 || f > 2) throw FormatError(lw + ": invalid flag");
            l.flags.push_back(static_cast<CellFlag>(f));
        }
        for (std::size_t i = 0; i < l.std.size(); ++i)
            if (l.flags[i] == CellFlag::Ok && !(l.std[i] >= 0.0))
                throw FormatError(lw + ": negative std");
        m.layers.push_back(std::move(l));
    }
    return m;
}

inline StaRMap load_starmap(const std::filesystem::path& path) {
    return starmap_from_json(read_json_file(path), path.string());
}

/// Binary 8-bit PGM, north up. Values are mapped linearly from [lo, hi];
/// non-finite cells are written black.
inline std::string encode_pgm(const GridSpec& g, const std::vector<double>& values,
                              std::optional<std::pair<double, double>> range = {}) {
    double lo = 0.0, hi = 1.0;
    if (range) {
        std::tie(lo, hi) = *range;
    } else {
        bool first = true;
        for (double v : values) {
            if (!std::isfinite(v)) continue;
            if (first) lo = hi = v, first = false;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    std::string out = "P5\n" + std::to_string(g.cols) + " " + std::to_string(g.rows) + "\n255\n";
    for (int row = g.rows - 1; row >= 0; --row) {
        for (int col = 0; col < g.cols; ++col) {
            const double v = values[g.index(row, col)];
            int level = 0;
            if (std::isfinite(v))
                level = hi > lo ? static_cast<int>(std::lround(255.0 * (v - lo) / (hi - lo))) : 255;
            out.push_back(static_cast<char>(std::clamp(level, 0, 255)));
        }
    }
    return out;
}

}  // namespace cofi::geo
