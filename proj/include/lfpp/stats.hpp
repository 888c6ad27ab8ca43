#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "lfpp/core.hpp"

namespace lfpp {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    std::size_t points = 0;
};

/// Unweighted least squares y = slope * x + intercept; the standard error comes from residuals.
inline LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw ConfigError("least_squares: need at least two (x, y) pairs");
    const double m = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw ConfigError("least_squares: x values are all equal");
    LinearFit fit;
    fit.points = x.size();
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (x.size() > 2) {
        double ssr = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - (fit.slope * x[i] + fit.intercept);
            ssr += r * r;
        }
        fit.slope_stderr = std::sqrt(ssr / (m - 2.0) / sxx);
    }
    return fit;
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw ConfigError("median of an empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size() / 2;
    return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

inline double mean(std::span<const double> v) {
    if (v.empty()) throw ConfigError("mean of an empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Linear-interpolated quantile of a sample, q in [0, 1].
inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw ConfigError("quantile of an empty sample");
    std::sort(v.begin(), v.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool excludes_zero() const { return lo > 0.0 || hi < 0.0; }
};

/// Wilson score interval for a binomial proportion; z = 1.96 gives 95%.
inline Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.96) {
    if (trials == 0) return {0.0, 1.0};
    const double nt = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / nt;
    const double z2 = z * z;
    const double centre = (p + z2 / (2 * nt)) / (1 + z2 / nt);
    const double half = z / (1 + z2 / nt) * std::sqrt(p * (1 - p) / nt + z2 / (4 * nt * nt));
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/**
 * Percentile bootstrap. `statistic(indices)` receives, for each of `groups` groups, a
 * resampled list of member indices drawn with replacement from [0, sizes[g]).
 */
template <class Statistic>
Interval bootstrap_interval(std::span<const std::size_t> sizes, Statistic&& statistic,
                            std::size_t resamples, double level, std::int64_t seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    std::vector<double> stats;
    stats.reserve(resamples);
    std::vector<std::vector<std::size_t>> draw(sizes.size());
    for (std::size_t b = 0; b < resamples; ++b) {
        for (std::size_t g = 0; g < sizes.size(); ++g) {
            std::uniform_int_distribution<std::size_t> pick(0, sizes[g] - 1);
            draw[g].resize(sizes[g]);
            for (auto& i : draw[g]) i = pick(rng);
        }
        const double s = statistic(draw);
        if (std::isfinite(s)) stats.push_back(s);
    }
    const double tail = (1.0 - level) / 2.0;
    return {quantile(stats, tail), quantile(stats, 1.0 - tail)};
}

}  // namespace lfpp
