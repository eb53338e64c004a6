#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "cofi/core/error.hpp"
#include "cofi/core/types.hpp"

namespace cofi::geo {

/// Raster layout over a bbox. Cell (row, col) has its center at
/// (min_x + (col + 0.5) * dx, min_y + (row + 0.5) * dy); row 0 is the
/// southern-most row and storage is row-major.
struct GridSpec {
    BBox bbox;
    int rows = 0;
    int cols = 0;

    void validate() const {
        if (rows < 2 || cols < 2) throw ConfigError("grid: rows and cols must be >= 2");
        if (!bbox.has_positive_area()) throw ConfigError("grid: bbox must have positive area");
    }

    double dx() const noexcept { return bbox.width() / cols; }
    double dy() const noexcept { return bbox.height() / rows; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(rows) * cols; }
    std::size_t index(int row, int col) const noexcept {
        return static_cast<std::size_t>(row) * cols + col;
    }

    Vec2 cell_center(int row, int col) const noexcept {
        return {bbox.min_x + (col + 0.5) * dx(), bbox.min_y + (row + 0.5) * dy()};
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Bilinear stencil: the four surrounding cell centers and their weights.
/// Between the bbox edge and the outermost centers the nearest center row or
/// column is used (no extrapolation).
struct BilinearStencil {
    std::size_t idx[4];
    double w[4];
};

inline BilinearStencil bilinear_stencil(const GridSpec& g, const Vec2& p) {
    if (!g.bbox.contains(p))
        throw OutOfBoundsError("point (" + std::to_string(p.x()) + ", " + std::to_string(p.y()) +
                               ") outside raster bbox");
    auto axis = [](double u, int n, int& i0, int& i1, double& f) {
        // u is the continuous index measured in cells from the first center.
        if (u <= 0.0) {
            i0 = i1 = 0;
            f = 0.0;
        } else if (u >= n - 1) {
            i0 = i1 = n - 1;
            f = 0.0;
        } else {
            i0 = static_cast<int>(std::floor(u));
            i1 = i0 + 1;
            f = u - i0;
        }
    };
    int c0, c1, r0, r1;
    double fx, fy;
    axis((p.x() - g.bbox.min_x) / g.dx() - 0.5, g.cols, c0, c1, fx);
    axis((p.y() - g.bbox.min_y) / g.dy() - 0.5, g.rows, r0, r1, fy);
    return {{g.index(r0, c0), g.index(r0, c1), g.index(r1, c0), g.index(r1, c1)},
            {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy}};
}

/// Applies a stencil to a value array. Zero-weight terms are skipped so
/// infinite sentinels in unused cells do not poison the result.
template <typename Values>
double apply_stencil(const BilinearStencil& s, const Values& values) {
    double acc = 0.0;
    bool any = false;
    for (int k = 0; k < 4; ++k) {
        if (s.w[k] == 0.0) continue;
        if (!any && s.w[k] == 1.0) return values[s.idx[k]];
        acc += s.w[k] * values[s.idx[k]];
        any = true;
    }
    return acc;
}

}  // namespace cofi::geo
