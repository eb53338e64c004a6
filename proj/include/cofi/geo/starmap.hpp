#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cofi/core/error.hpp"
#include "cofi/core/rng.hpp"
#include "cofi/geo/grid.hpp"
#include "cofi/geo/perturbation.hpp"
#include "cofi/geo/relations.hpp"
#include "cofi/geo/vector_map.hpp"

namespace cofi::geo {

struct Moments {
    double mean = 0.0;
    double std = 0.0;
};

enum class CellFlag : std::uint8_t { Ok = 0, NoFeature = 1, DomainError = 2 };

/// Per-cell empirical (mean, std) of one relation/tag pair.
struct StaRMapLayer {
    RelationKind relation = RelationKind::Over;
    std::string tag;
    GridSpec grid;
    std::vector<double> mean;
    std::vector<double> std;
    std::vector<CellFlag> flags;
    int sample_count = 0;

    std::string name() const { return std::string(to_string(relation)) + ":" + tag; }
};

struct RelationSpec {
    RelationKind relation = RelationKind::Over;
    std::string tag;
};

/// Seed of the n-th map variant drawn from `rng_seed`. Shared by
/// estimate_moments and build_starmap so both see the same variants.
inline std::uint64_t variant_seed(std::uint64_t rng_seed, std::size_t n) {
    return derive_seed(rng_seed, "map-variant", n);
}

/// Sample mean and the unbiased (1/(N-1)) standard deviation, two-pass.
inline Moments sample_moments(const std::vector<double>& r) {
    if (r.size() < 2) throw ArgumentError("moments need at least 2 samples");
    const double n = static_cast<double>(r.size());
    // Shifted by the first sample: identical samples give their value exactly.
    const double shift = r.front();
    double sum = 0.0;
    for (double x : r) sum += x - shift;
    const double mean = shift + sum / n;
    double ss = 0.0;
    for (double x : r) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

inline std::vector<VectorMap> sample_variants(const VectorMap& map, const PerturbationSet& perturb,
                                              int n, std::uint64_t rng_seed) {
    std::vector<VectorMap> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        out.push_back(sample_map_variant(map, perturb, variant_seed(rng_seed, static_cast<std::size_t>(i))));
    return out;
}

/// Monte Carlo moments of r(M^(n), point, tag) over N perturbed variants.
inline Moments estimate_moments(const VectorMap& map, const PerturbationSet& perturb,
                                RelationKind rel, const std::string& tag, const Vec2& point,
                                int n, std::uint64_t rng_seed) {
    if (n < 2) throw ArgumentError("estimate_moments: N must be >= 2");
    std::vector<double> r;
    r.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto variant = sample_map_variant(map, perturb, variant_seed(rng_seed, static_cast<std::size_t>(i)));
        r.push_back(eval_relation(variant, rel, point, tag));
    }
    return sample_moments(r);
}

/// One layer per relation spec, each cell holding the moments at its center.
/// The same N variants serve every cell and layer. Cells whose relation is
/// undefined are flagged (mean = +inf, std = 0) rather than aborting.
inline std::vector<StaRMapLayer> build_starmap(const VectorMap& map, const PerturbationSet& perturb,
                                               const std::vector<RelationSpec>& relations,
                                               const GridSpec& grid, int n,
                                               std::uint64_t rng_seed) {
    grid.validate();
    if (n < 2) throw ArgumentError("build_starmap: N must be >= 2");
    const auto variants = sample_variants(map, perturb, n, rng_seed);
    std::vector<StaRMapLayer> layers;
    std::vector<double> r(static_cast<std::size_t>(n));
    for (const auto& spec : relations) {
        StaRMapLayer layer{spec.relation, spec.tag, grid, {}, {}, {}, n};
        layer.mean.resize(grid.size());
        layer.std.resize(grid.size());
        layer.flags.assign(grid.size(), CellFlag::Ok);
        for (int row = 0; row < grid.rows; ++row) {
            for (int col = 0; col < grid.cols; ++col) {
                const auto idx = grid.index(row, col);
                const Vec2 x = grid.cell_center(row, col);
                CellFlag flag = CellFlag::Ok;
                try {
                    for (int i = 0; i < n; ++i) {
                        r[static_cast<std::size_t>(i)] = eval_relation(variants[static_cast<std::size_t>(i)], spec.relation, x, spec.tag);
                        if (is_no_feature(r[static_cast<std::size_t>(i)])) flag = CellFlag::NoFeature;
                    }
                } catch (const DomainError&) {
                    flag = CellFlag::DomainError;
                }
                layer.flags[idx] = flag;
                if (flag == CellFlag::Ok) {
                    const auto m = sample_moments(r);
                    layer.mean[idx] = m.mean;
                    layer.std[idx] = m.std;
                } else {
                    layer.mean[idx] = kNoFeature;
                    layer.std[idx] = 0.0;
                }
            }
        }
        layers.push_back(std::move(layer));
    }
    return layers;
}

/// Bilinear interpolation of mean and std between cell centers.
inline Moments interpolate(const StaRMapLayer& layer, const Vec2& point) {
    const auto s = bilinear_stencil(layer.grid, point);
    return {apply_stencil(s, layer.mean), apply_stencil(s, layer.std)};
}

/// Lookup of a layer by relation and tag; nullptr when absent.
inline const StaRMapLayer* find_layer(const std::vector<StaRMapLayer>& layers, RelationKind rel,
                                      const std::string& tag) {
    for (const auto& l : layers)
        if (l.relation == rel && l.tag == tag) return &l;
    return nullptr;
}

}  // namespace cofi::geo
