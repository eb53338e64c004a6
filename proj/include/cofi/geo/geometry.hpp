#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "cofi/core/types.hpp"

namespace cofi::geo {

/// Euclidean distance from p to the closed segment [a, b].
inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0) return (p - a).norm();
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

/// Crossing-number contribution of segment [a, b] for a ray cast from p
/// towards +x. Half-open in y so shared vertices are counted once.
inline bool ray_crosses(const Vec2& p, const Vec2& a, const Vec2& b) {
    if ((a.y() > p.y()) == (b.y() > p.y())) return false;
    const double x_at = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
    return p.x() < x_at;
}

}  // namespace cofi::geo
