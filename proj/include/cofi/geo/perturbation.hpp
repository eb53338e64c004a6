#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cofi/core/error.hpp"
#include "cofi/core/rng.hpp"
#include "cofi/geo/vector_map.hpp"

namespace cofi::geo {

/// Point about which the linear part of a perturbation acts.
enum class Pivot { Origin, Centroid };

/// Distribution of the rigid-ish transform applied to one feature:
/// v' = Phi (v - c) + c + t with Phi = s * Rot(theta), theta ~ N(0, rotation_std^2),
/// s ~ N(1, scale_std^2), t ~ N(translation_mean, translation_cov). c is the
/// frame origin (the literal generation rule) or the feature centroid.
struct FeaturePerturbation {
    double rotation_std_rad = 0.0;
    double scale_std = 0.0;
    Vec2 translation_mean = Vec2::Zero();
    Eigen::Matrix2d translation_cov = Eigen::Matrix2d::Zero();
    Pivot pivot = Pivot::Origin;

    static FeaturePerturbation identity() { return {}; }

    static FeaturePerturbation isotropic(double translation_std_m, double rotation_std_rad = 0.0,
                                         double scale_std = 0.0) {
        FeaturePerturbation p;
        p.rotation_std_rad = rotation_std_rad;
        p.scale_std = scale_std;
        p.translation_cov = Eigen::Matrix2d::Identity() * translation_std_m * translation_std_m;
        return p;
    }

    void validate() const {
        if (!(rotation_std_rad >= 0.0) || !(scale_std >= 0.0))
            throw ConfigError("perturbation: standard deviations must be nonnegative");
        if (!translation_mean.allFinite() || !translation_cov.allFinite())
            throw ConfigError("perturbation: non-finite translation parameters");
        if (translation_cov(0, 1) != translation_cov(1, 0))
            throw ConfigError("perturbation: translation covariance is not symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(translation_cov);
        if (es.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, translation_cov.norm()))
            throw ConfigError("perturbation: translation covariance is not positive semidefinite");
    }

    /// Square root factor L with L L^T = translation_cov (PSD allowed).
    Eigen::Matrix2d translation_factor() const {
        if (translation_cov.isZero(0.0)) return Eigen::Matrix2d::Zero();
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(translation_cov);
        const Eigen::Vector2d root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        return es.eigenvectors() * root.asDiagonal();
    }
};

/// One entry per feature id of the map it was resolved against.
using PerturbationSet = std::vector<FeaturePerturbation>;

/// Glob match supporting '*' only.
inline bool tag_matches(std::string_view pattern, std::string_view tag) {
    std::size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
    while (t < tag.size()) {
        if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (p < pattern.size() && pattern[p] == tag[t]) {
            ++p;
            ++t;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

/// Ordered tag-pattern rules; the first rule matching any tag of a feature wins.
using PerturbationRules = std::vector<std::pair<std::string, FeaturePerturbation>>;

inline PerturbationSet resolve_perturbations(const VectorMap& map, const PerturbationRules& rules) {
    PerturbationSet out;
    out.reserve(map.features().size());
    for (std::size_t f = 0; f < map.features().size(); ++f) {
        const auto& tags = map.features()[f].tags;
        const FeaturePerturbation* hit = nullptr;
        for (const auto& [pattern, pert] : rules) {
            for (const auto& tag : tags)
                if (tag_matches(pattern, tag)) {
                    hit = &pert;
                    break;
                }
            if (hit) break;
        }
        if (!hit) {
            std::string names;
            for (const auto& t : tags) names += (names.empty() ? "" : ",") + t;
            throw ConfigError("no perturbation entry for feature " + std::to_string(f) + " (tags: " +
                              names + ")");
        }
        hit->validate();
        out.push_back(*hit);
    }
    return out;
}

namespace detail {

inline Vec2 feature_centroid(const VectorMap& map, const Feature& f) {
    Vec2 c = Vec2::Zero();
    for (auto v : f.vertices) c += map.vertices()[v];
    return c / static_cast<double>(f.vertices.size());
}

}  // namespace detail

/// Draws one randomized copy of `map`. Each feature gets one transform per
/// call; edges, tags and depth attributes are carried over unchanged.
inline VectorMap sample_map_variant(const VectorMap& map, const PerturbationSet& perturb,
                                    std::uint64_t rng_seed) {
    if (perturb.size() != map.features().size())
        throw ConfigError("perturbation set has " + std::to_string(perturb.size()) +
                          " entries for " + std::to_string(map.features().size()) + " features");
    Rng rng(rng_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Vec2> moved = map.vertices();
    for (std::size_t fi = 0; fi < map.features().size(); ++fi) {
        const auto& pert = perturb[fi];
        const auto& feat = map.features()[fi];
        const double theta = pert.rotation_std_rad * gauss(rng);
        const double scale = 1.0 + pert.scale_std * gauss(rng);
        const Vec2 n(gauss(rng), gauss(rng));
        const Vec2 t = pert.translation_mean + pert.translation_factor() * n;
        const bool linear_identity = theta == 0.0 && scale == 1.0;
        Eigen::Matrix2d phi;
        phi << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
        phi *= scale;
        const Vec2 pivot = pert.pivot == Pivot::Centroid ? detail::feature_centroid(map, feat)
                                                         : Vec2::Zero();
        for (auto v : feat.vertices) {
            const Vec2 src = map.vertices()[v];
            moved[v] = linear_identity ? Vec2(src + t) : Vec2(phi * (src - pivot) + pivot + t);
        }
    }
    return map.with_vertices(std::move(moved));
}

}  // namespace cofi::geo
