#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cofi/core/json.hpp"
#include "cofi/geo/grid.hpp"
#include "cofi/geo/raster_io.hpp"
#include "cofi/geo/starmap.hpp"
#include "cofi/logic/environment.hpp"

namespace cofi::logic {

/// How the measurement enters a precomputed field.
struct MeasurementPolicy {
    enum class Kind { SameAsState, Fixed };
    Kind kind = Kind::SameAsState;
    Vec2 fixed = Vec2::Zero();

    Vec2 measurement_for(const Vec2& state) const { return kind == Kind::SameAsState ? state : fixed; }
};

/// Raster of P(C | x, z) at cell centers.
struct ConstitutionField {
    geo::GridSpec grid;
    std::vector<double> values;
    std::vector<geo::CellFlag> flags;

    /// Bilinear interpolation; throws OutOfBoundsError outside the bbox.
    double at(const Vec2& p) const { return geo::apply_stencil(geo::bilinear_stencil(grid, p), values); }

    /// Interpolated value at the nearest point of the bbox.
    double at_clamped(const Vec2& p) const { return at(grid.bbox.clamp(p)); }

    static ConstitutionField constant(const geo::GridSpec& g, double v) {
        return {g, std::vector<double>(g.size(), v), std::vector<geo::CellFlag>(g.size(), geo::CellFlag::Ok)};
    }
};

/// Evaluates the constitution at every cell center of `grid`. Cells whose
/// location cannot be evaluated are flagged and hold 0.
inline ConstitutionField precompute_field(const Program& program,
                                          const std::vector<geo::StaRMapLayer>& layers,
                                          const geo::GridSpec& grid,
                                          const MeasurementPolicy& policy = {},
                                          const EnvironmentOptions& opts = {}) {
    grid.validate();
    ConstitutionField f{grid, std::vector<double>(grid.size(), 0.0),
                        std::vector<geo::CellFlag>(grid.size(), geo::CellFlag::Ok)};
    for (int row = 0; row < grid.rows; ++row)
        for (int col = 0; col < grid.cols; ++col) {
            const Vec2 x = grid.cell_center(row, col);
            const auto idx = grid.index(row, col);
            try {
                f.values[idx] = constitution_probability(program, layers, x, policy.measurement_for(x), opts);
            } catch (const OutOfBoundsError&) {
                f.flags[idx] = geo::CellFlag::NoFeature;
            } catch (const DomainError&) {
                f.flags[idx] = geo::CellFlag::DomainError;
            }
        }
    return f;
}

inline json field_to_json(const ConstitutionField& f,
                          const std::optional<ingest::GeoOrigin>& origin = std::nullopt) {
    std::vector<int> flags;
    for (auto fl : f.flags) flags.push_back(static_cast<int>(fl));
    return {{"format", "cofi-field/1"},
            {"origin", geo::origin_to_json(origin)},
            {"grid", geo::grid_to_json(f.grid)},
            {"row_order", "south_to_north"},
            {"values", geo::values_to_json(f.values)},
            {"flags", flags}};
}

inline ConstitutionField field_from_json(const json& j, const std::string& what = "field") {
    if (j.value("format", "") != "cofi-field/1") throw FormatError(what + ": not a cofi-field/1 document");
    ConstitutionField f;
    f.grid = geo::grid_from_json(get_field<json>(j, "grid", what), what + ": grid");
    f.values = geo::values_from_json(get_field<json>(j, "values", what), f.grid.size(), what);
    const auto flags = get_field_or<std::vector<int>>(j, "flags", std::vector<int>(f.grid.size(), 0), what);
    if (flags.size() != f.grid.size()) throw FormatError(what + ": flag count mismatch");
    for (int fl : flags) f.flags.push_back(static_cast<geo::CellFlag>(fl));
    for (double v : f.values)
        if (!(v >= 0.0 && v <= 1.0)) throw FormatError(what + ": field values must lie in [0, 1]");
    return f;
}

inline ConstitutionField load_field(const std::filesystem::path& path) {
    return field_from_json(read_json_file(path), path.string());
}

}  // namespace cofi::logic
