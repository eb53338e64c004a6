#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>

#include "cofi/core/error.hpp"

namespace cofi {

/// Point or vector in the local tangent frame, meters.
using Vec2 = Eigen::Vector2d;

/// Axis-aligned box in the local frame.
struct BBox {
    double min_x = 0.0;
    double min_y = 0.0;
    double max_x = 0.0;
    double max_y = 0.0;

    double width() const noexcept { return max_x - min_x; }
    double height() const noexcept { return max_y - min_y; }
    bool has_positive_area() const noexcept { return width() > 0.0 && height() > 0.0; }

    bool contains(const Vec2& p) const noexcept {
        return p.x() >= min_x && p.x() <= max_x && p.y() >= min_y && p.y() <= max_y;
    }

    Vec2 clamp(const Vec2& p) const noexcept {
        return {std::clamp(p.x(), min_x, max_x), std::clamp(p.y(), min_y, max_y)};
    }

    Vec2 center() const noexcept { return {0.5 * (min_x + max_x), 0.5 * (min_y + max_y)}; }

    std::array<double, 4> to_array() const { return {min_x, min_y, max_x, max_y}; }

    static BBox from_array(const std::array<double, 4>& a) { return {a[0], a[1], a[2], a[3]}; }

    friend bool operator==(const BBox&, const BBox&) = default;
};

}  // namespace cofi
