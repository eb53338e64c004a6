#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "cofi/core/error.hpp"

namespace cofi::filter {

inline constexpr double kBandwidthFloor = 1e-3;

/// Silverman's rule 0.9 min(sd, IQR / 1.34) n^(-1/5), floored.
inline double silverman_bandwidth(const std::vector<double>& xs) {
    const auto n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    std::vector<double> s(xs);
    std::sort(s.begin(), s.end());
    auto quantile = [&](double q) {
        const double pos = q * (n - 1.0);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, s.size() - 1);
        return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
    };
    const double iqr = quantile(0.75) - quantile(0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) spread = sd;
    return std::max(kBandwidthFloor, 0.9 * spread * std::pow(n, -0.2));
}

/// Gaussian KDE on [0, 1] with reflection at both boundaries. Reflecting
/// repeatedly at 0 and 1 places kernel images at 2k + x and 2k - x, so the
/// density integrates to one over the unit interval.
class BoundedKde {
public:
    BoundedKde(std::vector<double> samples, std::optional<double> bandwidth = std::nullopt)
        : samples_(std::move(samples)) {
        if (samples_.size() < 2) throw ArgumentError("density estimation needs at least two samples");
        for (double x : samples_)
            if (!(x >= 0.0 && x <= 1.0)) throw ArgumentError("density samples must lie in [0, 1]");
        h_ = bandwidth ? *bandwidth : silverman_bandwidth(samples_);
        if (!(h_ > 0.0) || !std::isfinite(h_)) throw ArgumentError("bandwidth must be positive");
        images_ = static_cast<int>(std::ceil(10.0 * h_ / 2.0)) + 1;
    }

    double bandwidth() const noexcept { return h_; }
    const std::vector<double>& samples() const noexcept { return samples_; }

    /// Density at u; zero outside [0, 1].
    double operator()(double u) const {
        if (!(u >= 0.0 && u <= 1.0)) return 0.0;
        const double norm = 1.0 / (h_ * std::sqrt(2.0 * M_PI) * static_cast<double>(samples_.size()));
        double s = 0.0;
        for (double x : samples_)
            for (int k = -images_; k <= images_; ++k) {
                const double a = (u - (2.0 * k + x)) / h_;
                const double b = (u - (2.0 * k - x)) / h_;
                s += std::exp(-0.5 * a * a) + std::exp(-0.5 * b * b);
            }
        return s * norm;
    }

    /// Location of the highest density on a uniform grid of `points` values.
    double mode(int points = 1001) const {
        double best_u = 0.0, best = -1.0;
        for (int i = 0; i < points; ++i) {
            const double u = static_cast<double>(i) / (points - 1);
            const double d = (*this)(u);
            if (d > best) best = d, best_u = u;
        }
        return best_u;
    }

private:
    std::vector<double> samples_;
    double h_ = kBandwidthFloor;
    int images_ = 1;
};

}  // namespace cofi::filter
