#pragma once

#include <cmath>
#include <numbers>

namespace cofi {

/// Standard normal CDF.
inline double normal_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// CDF of Normal(mean, std) at x. std must be positive.
inline double normal_cdf(double x, double mean, double std) noexcept {
    return normal_cdf((x - mean) / std);
}

inline double normal_pdf(double x, double mean, double std) noexcept {
    const double u = (x - mean) / std;
    return std::exp(-0.5 * u * u) / (std * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace cofi
