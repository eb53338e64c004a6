#pragma once

#include <algorithm>
#include <vector>

#include "cofi/core/types.hpp"
#include "cofi/geo/starmap.hpp"
#include "cofi/logic/environment.hpp"
#include "cofi/logic/field.hpp"

namespace cofi::filter {

/// Source of P(C | x, z) for the constitutional update.
class ConstitutionEvaluator {
public:
    virtual ~ConstitutionEvaluator() = default;
    virtual double probability(const Vec2& state, const Vec2& measurement) const = 0;
};

class ConstantEvaluator final : public ConstitutionEvaluator {
public:
    explicit ConstantEvaluator(double p) : p_(p) {
        if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("constant constitution probability must lie in [0, 1]");
    }
    double probability(const Vec2&, const Vec2&) const override { return p_; }

private:
    double p_;
};

/// Bilinear lookup in a precomputed field. The measurement is ignored (the
/// field fixes it by its policy); states outside the field are clamped.
/// Interpolation is a convex combination, so clamping to [0, 1] only
/// removes rounding.
class FieldEvaluator final : public ConstitutionEvaluator {
public:
    explicit FieldEvaluator(logic::ConstitutionField field) : field_(std::move(field)) {}
    double probability(const Vec2& state, const Vec2&) const override {
        return std::clamp(field_.at_clamped(state), 0.0, 1.0);
    }
    const logic::ConstitutionField& field() const noexcept { return field_; }

private:
    logic::ConstitutionField field_;
};

/// Full inference per query. State and measurement are clamped into the
/// region covered by every layer.
class DirectEvaluator final : public ConstitutionEvaluator {
public:
    DirectEvaluator(logic::Program program, std::vector<geo::StaRMapLayer> layers,
                    logic::EnvironmentOptions opts = {})
        : program_(std::move(program)), layers_(std::move(layers)), opts_(std::move(opts)) {
        bool first = true;
        for (const auto& l : layers_) {
            const auto& b = l.grid.bbox;
            if (first) bbox_ = b;
            else bbox_ = {std::max(bbox_.min_x, b.min_x), std::max(bbox_.min_y, b.min_y),
                          std::min(bbox_.max_x, b.max_x), std::min(bbox_.max_y, b.max_y)};
            first = false;
        }
        if (!first && !(bbox_.width() >= 0.0 && bbox_.height() >= 0.0))
            throw ConfigError("StaR Map layers do not overlap");
        bounded_ = !first;
    }

    double probability(const Vec2& state, const Vec2& measurement) const override {
        const Vec2 x = bounded_ ? bbox_.clamp(state) : state;
        const Vec2 z = bounded_ ? bbox_.clamp(measurement) : measurement;
        return logic::constitution_probability(program_, layers_, x, z, opts_);
    }

private:
    logic::Program program_;
    std::vector<geo::StaRMapLayer> layers_;
    logic::EnvironmentOptions opts_;
    BBox bbox_;
    bool bounded_ = false;
};

}  // namespace cofi::filter
