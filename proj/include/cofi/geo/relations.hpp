#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "cofi/core/error.hpp"
#include "cofi/geo/geometry.hpp"
#include "cofi/geo/vector_map.hpp"

namespace cofi::geo {

enum class RelationKind { Over, Distance, Depth };

inline std::string_view to_string(RelationKind r) {
    switch (r) {
        case RelationKind::Over: return "over";
        case RelationKind::Distance: return "distance";
        case RelationKind::Depth: return "depth";
    }
    return "?";
}

inline RelationKind relation_from_string(std::string_view s) {
    if (s == "over") return RelationKind::Over;
    if (s == "distance") return RelationKind::Distance;
    if (s == "depth") return RelationKind::Depth;
    throw ConfigError("unknown relation '" + std::string(s) + "'");
}

/// Distance sentinel for "no feature carries this tag".
inline constexpr double kNoFeature = std::numeric_limits<double>::infinity();

inline bool is_no_feature(double v) noexcept { return std::isinf(v) && v > 0; }

inline constexpr std::size_t kDepthNeighbours = 4;
inline constexpr double kBoundaryTolerance = 1e-9;

namespace detail {

inline double feature_boundary_distance(const VectorMap& map, const Feature& f, const Vec2& p) {
    const auto& v = map.vertices();
    double best = std::numeric_limits<double>::infinity();
    if (f.edges.empty()) {
        for (auto i : f.vertices) best = std::min(best, (p - v[i]).norm());
        return best;
    }
    for (auto ei : f.edges) {
        const auto& e = map.edges()[ei];
        best = std::min(best, point_segment_distance(p, v[e.a], v[e.b]));
    }
    return best;
}

/// Even-odd test over the feature's rings; boundary counts as inside.
inline bool inside_closed_feature(const VectorMap& map, const Feature& f, const Vec2& p) {
    if (!f.closed) return false;
    const auto& v = map.vertices();
    bool inside = false;
    for (auto ei : f.edges) {
        const auto& e = map.edges()[ei];
        if (point_segment_distance(p, v[e.a], v[e.b]) <= kBoundaryTolerance) return true;
        if (ray_crosses(p, v[e.a], v[e.b])) inside = !inside;
    }
    return inside;
}

}  // namespace detail

/// 1 if p lies in (or on) a closed feature tagged `tag`, else 0.
inline double eval_over(const VectorMap& map, const Vec2& p, const std::string& tag) {
    for (auto fi : map.features_with_tag(tag))
        if (detail::inside_closed_feature(map, map.features()[fi], p)) return 1.0;
    return 0.0;
}

/// Distance to the nearest vertex or segment of a feature tagged `tag`;
/// 0 inside a tagged closed feature, kNoFeature when the tag is absent.
inline double eval_distance(const VectorMap& map, const Vec2& p, const std::string& tag) {
    double best = kNoFeature;
    for (auto fi : map.features_with_tag(tag)) {
        const auto& f = map.features()[fi];
        if (detail::inside_closed_feature(map, f, p)) return 0.0;
        best = std::min(best, detail::feature_boundary_distance(map, f, p));
    }
    return best;
}

/// Inverse-distance-weighted (power 2) depth from the nearest tagged soundings.
inline double eval_depth(const VectorMap& map, const Vec2& p, const std::string& tag) {
    struct Near {
        double d2;
        double depth;
    };
    std::vector<Near> cand;
    for (auto fi : map.features_with_tag(tag)) {
        for (auto vi : map.features()[fi].vertices) {
            const auto& depth = map.vertex_depth(vi);
            if (!depth) continue;
            const double d2 = (map.vertices()[vi] - p).squaredNorm();
            if (d2 == 0.0) return *depth;
            cand.push_back({d2, *depth});
        }
    }
    if (cand.empty()) throw DomainError("depth: no sounding tagged '" + tag + "'");
    const std::size_t k = std::min(kDepthNeighbours, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end(),
                      [](const Near& a, const Near& b) {
                          return a.d2 < b.d2 || (a.d2 == b.d2 && a.depth < b.depth);
                      });
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double w = 1.0 / cand[i].d2;
        num += w * cand[i].depth;
        den += w;
    }
    return num / den;
}

/// The deterministic relation r(M, x, g).
inline double eval_relation(const VectorMap& map, RelationKind rel, const Vec2& p,
                            const std::string& tag) {
    switch (rel) {
        case RelationKind::Over: return eval_over(map, p, tag);
        case RelationKind::Distance: return eval_distance(map, p, tag);
        case RelationKind::Depth: return eval_depth(map, p, tag);
    }
    throw InvariantViolation("unhandled relation kind");
}

}  // namespace cofi::geo
