#pragma once

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cofi/core/json.hpp"
#include "cofi/geo/perturbation.hpp"
#include "cofi/geo/vector_map.hpp"
#include "cofi/ingest/projection.hpp"

namespace cofi::geo {

/// A map read from GeoJSON plus the origin used to project it. `origin` is
/// empty when the file already carries local metric coordinates.
struct LoadedMap {
    VectorMap map;
    std::optional<ingest::GeoOrigin> origin;
};

namespace detail {

using Ring = std::vector<std::pair<double, double>>;

inline std::pair<double, double> read_position(const json& pos, const std::string& what) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number())
        throw FormatError(what + ": position must be [x, y]");
    return {pos[0].get<double>(), pos[1].get<double>()};
}

inline Ring read_line(const json& coords, const std::string& what) {
    if (!coords.is_array()) throw FormatError(what + ": expected an array of positions");
    Ring out;
    for (const auto& p : coords) out.push_back(read_position(p, what));
    return out;
}

struct RawFeature {
    enum class Kind { Point, Line, Ring } kind;
    Ring coords;
    TagSet tags;
    std::optional<double> depth;
};

inline void collect_geometry(const json& geom, const TagSet& tags, std::optional<double> depth,
                             std::vector<RawFeature>& out, const std::string& what) {
    const auto type = get_field<std::string>(geom, "type", what);
    const auto& c = geom.contains("coordinates") ? geom.at("coordinates") : json();
    using K = RawFeature::Kind;
    if (type == "Point") {
        out.push_back({K::Point, {read_position(c, what)}, tags, depth});
    } else if (type == "MultiPoint") {
        for (const auto& p : c) out.push_back({K::Point, {read_position(p, what)}, tags, depth});
    } else if (type == "LineString") {
        out.push_back({K::Line, read_line(c, what), tags, {}});
    } else if (type == "MultiLineString") {
        for (const auto& l : c) out.push_back({K::Line, read_line(l, what), tags, {}});
    } else if (type == "Polygon") {
        // Interior rings (holes) are not represented.
        if (!c.is_array() || c.empty()) throw FormatError(what + ": polygon without rings");
        out.push_back({K::Ring, read_line(c[0], what), tags, {}});
    } else if (type == "MultiPolygon") {
        for (const auto& poly : c) {
            if (!poly.is_array() || poly.empty()) throw FormatError(what + ": polygon without rings");
            out.push_back({K::Ring, read_line(poly[0], what), tags, {}});
        }
    } else if (type == "GeometryCollection") {
        for (const auto& g : geom.at("geometries")) collect_geometry(g, tags, depth, out, what);
    } else {
        throw FormatError(what + ": unsupported geometry type '" + type + "'");
    }
}

}  // namespace detail

/// Reads a GeoJSON FeatureCollection. Every feature needs properties.tags
/// (nonempty string array); Point features may carry properties.depth.
///
/// Coordinates are lon/lat unless the top-level member "projection" is the
/// string "local" (already meters). For lon/lat input the projection origin is
/// taken from "projection": {"origin": [lon, lat]} or else the bbox center.
inline LoadedMap parse_geojson(const json& doc, const std::string& what = "geojson") {
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection")
        throw FormatError(what + ": expected a FeatureCollection");
    if (!doc.contains("features") || !doc.at("features").is_array())
        throw FormatError(what + ": 'features' must be an array");

    std::vector<detail::RawFeature> raw;
    std::size_t k = 0;
    for (const auto& f : doc.at("features")) {
        const std::string fwhat = what + ": feature " + std::to_string(k++);
        if (!f.is_object() || !f.contains("geometry") || f.at("geometry").is_null())
            throw FormatError(fwhat + ": missing geometry");
        const auto& props = f.contains("properties") ? f.at("properties") : json::object();
        TagSet tags;
        if (props.contains("tags")) {
            if (!props.at("tags").is_array()) throw FormatError(fwhat + ": 'tags' must be an array");
            for (const auto& t : props.at("tags")) {
                if (!t.is_string()) throw FormatError(fwhat + ": tags must be strings");
                tags.insert(t.get<std::string>());
            }
        }
        if (tags.empty()) throw FormatError(fwhat + ": properties.tags must be a nonempty array");
        std::optional<double> depth;
        if (props.contains("depth")) {
            if (!props.at("depth").is_number()) throw FormatError(fwhat + ": 'depth' must be a number");
            depth = props.at("depth").get<double>();
        }
        detail::collect_geometry(f.at("geometry"), tags, depth, raw, fwhat);
    }

    std::optional<ingest::GeoOrigin> origin;
    const bool local = doc.contains("projection") && doc.at("projection").is_string() &&
                       doc.at("projection").get<std::string>() == "local";
    if (!local) {
        if (doc.contains("projection") && doc.at("projection").is_object() &&
            doc.at("projection").contains("origin")) {
            auto [lon, lat] = detail::read_position(doc.at("projection").at("origin"), what);
            origin = ingest::GeoOrigin{lat, lon};
        } else {
            double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
            double hi_x = -lo_x, hi_y = -lo_x;
            for (const auto& r : raw)
                for (auto [x, y] : r.coords) {
                    lo_x = std::min(lo_x, x), hi_x = std::max(hi_x, x);
                    lo_y = std::min(lo_y, y), hi_y = std::max(hi_y, y);
                }
            if (raw.empty()) throw FormatError(what + ": no features");
            origin = ingest::GeoOrigin{0.5 * (lo_y + hi_y), 0.5 * (lo_x + hi_x)};
        }
    }

    auto to_local = [&](std::pair<double, double> xy) -> Vec2 {
        if (!origin) return {xy.first, xy.second};
        return ingest::project(xy.second, xy.first, *origin);
    };
    MapBuilder b;
    for (const auto& r : raw) {
        std::vector<Vec2> pts;
        for (auto xy : r.coords) pts.push_back(to_local(xy));
        switch (r.kind) {
            case detail::RawFeature::Kind::Point: b.add_point(pts[0], r.tags, r.depth); break;
            case detail::RawFeature::Kind::Line: b.add_polyline(pts, r.tags); break;
            case detail::RawFeature::Kind::Ring:
                try {
                    b.add_polygon(pts, r.tags);
                } catch (const ConfigError& e) {
                    throw FormatError(what + ": " + e.what());
                }
                break;
        }
    }
    return {b.build(), origin};
}

inline LoadedMap load_geojson(const std::filesystem::path& path) {
    return parse_geojson(read_json_file(path), path.string());
}

/// Perturbation rules keyed by tag pattern, in file order:
/// {"land": {"translation_std_m": 5, "rotation_std_rad": 0.001, "scale_std": 0}, "*": {...}}
/// Optional per rule: "translation_mean_m": [x, y], "translation_cov_m2": [[a, b], [b, c]]
/// (overrides translation_std_m) and "pivot": "origin" | "centroid".
inline PerturbationRules parse_perturbation_rules(const ordered_json& doc,
                                                  const std::string& what = "perturbation") {
    if (!doc.is_object()) throw FormatError(what + ": expected an object of tag patterns");
    PerturbationRules rules;
    for (const auto& [pattern, spec] : doc.items()) {
        const std::string w = what + ": '" + pattern + "'";
        if (!spec.is_object()) throw FormatError(w + ": expected an object");
        for (const auto& [key, _] : spec.items())
            if (key != "translation_std_m" && key != "rotation_std_rad" && key != "scale_std" &&
                key != "translation_mean_m" && key != "translation_cov_m2" && key != "pivot")
                throw FormatError(w + ": unknown key '" + key + "'");
        auto p = FeaturePerturbation::isotropic(get_field_or<double>(spec, "translation_std_m", 0.0, w),
                                                get_field_or<double>(spec, "rotation_std_rad", 0.0, w),
                                                get_field_or<double>(spec, "scale_std", 0.0, w));
        if (spec.contains("translation_mean_m")) {
            auto m = get_field<std::vector<double>>(spec, "translation_mean_m", w);
            if (m.size() != 2) throw FormatError(w + ": translation_mean_m must have 2 entries");
            p.translation_mean = {m[0], m[1]};
        }
        if (spec.contains("translation_cov_m2")) {
            auto c = get_field<std::vector<std::vector<double>>>(spec, "translation_cov_m2", w);
            if (c.size() != 2 || c[0].size() != 2 || c[1].size() != 2)
                throw FormatError(w + ": translation_cov_m2 must be 2x2");
            p.translation_cov << c[0][0], c[0][1], c[1][0], c[1][1];
        }
        const auto pivot = get_field_or<std::string>(spec, "pivot", "origin", w);
        if (pivot == "centroid") p.pivot = Pivot::Centroid;
        else if (pivot != "origin") throw FormatError(w + ": pivot must be 'origin' or 'centroid'");
        try {
            p.validate();
        } catch (const ConfigError& e) {
            throw FormatError(w + ": " + e.what());
        }
        rules.emplace_back(pattern, p);
    }
    return rules;
}

}  // namespace cofi::geo
