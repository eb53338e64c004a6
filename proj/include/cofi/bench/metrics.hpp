#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "cofi/core/error.hpp"
#include "cofi/core/types.hpp"

namespace cofi::bench {

/// Mean Euclidean distance between aligned position sequences.
inline double mae(const std::vector<Vec2>& estimates, const std::vector<Vec2>& truth) {
    if (estimates.size() != truth.size()) throw ArgumentError("estimate and ground-truth sequences differ in length");
    if (estimates.empty()) throw ArgumentError("cannot take the error of empty sequences");
    double s = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) s += (estimates[i] - truth[i]).norm();
    return s / static_cast<double>(truth.size());
}

struct Summary {
    std::size_t n = 0;
    double mean = 0.0;
    /// Sample standard deviation (n - 1); 0 for fewer than two values.
    double std = 0.0;
    double median = 0.0;
};

/// Summary of the finite entries of `xs`.
inline Summary summarize(const std::vector<double>& xs) {
    std::vector<double> v;
    for (double x : xs)
        if (std::isfinite(x)) v.push_back(x);
    Summary s;
    s.n = v.size();
    if (v.empty()) return {0, NAN, NAN, NAN};
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    std::sort(v.begin(), v.end());
    s.median = s.n % 2 ? v[s.n / 2] : 0.5 * (v[s.n / 2 - 1] + v[s.n / 2]);
    return s;
}

}  // namespace cofi::bench
