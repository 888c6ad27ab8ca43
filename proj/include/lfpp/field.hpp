#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "lfpp/core.hpp"

namespace lfpp {

enum class FieldKind : std::uint8_t { raw_gff = 0, mollified = 1, custom = 2 };

enum class Topology : std::uint8_t { torus = 0, zero_boundary = 1 };

/**
 * Real-valued n x n lattice field with physical grid spacing.
 *
 * Cell (row, col) sits at physical position (x, y) = (col * spacing, row * spacing).
 * Values are row-major and immutable after construction.
 */
class ScalarField2D {
public:
    ScalarField2D(int n, double spacing, std::vector<double> values,
                  FieldKind kind = FieldKind::custom, std::int64_t seed = 0,
                  Topology topology = Topology::torus)
        : n_(n), spacing_(spacing), values_(std::move(values)), kind_(kind), seed_(seed),
          topology_(topology) {
        if (n_ <= 0) throw ConfigError("field side length must be positive");
        if (!(spacing_ > 0.0) || !std::isfinite(spacing_))
            throw ConfigError("field spacing must be a positive finite number");
        if (values_.size() != static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_))
            throw ConfigError("field has " + std::to_string(values_.size()) +
                              " values, expected n^2 = " + std::to_string(n_ * n_));
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i]))
                throw ConfigError("non-finite field value at " +
                                  to_string(cell_of(n_, static_cast<std::uint32_t>(i))));
        }
    }

    int n() const { return n_; }
    double spacing() const { return spacing_; }
    FieldKind kind() const { return kind_; }
    std::int64_t seed() const { return seed_; }
    Topology topology() const { return topology_; }
    std::span<const double> values() const { return values_; }

    double operator()(Cell c) const { return values_[index_of(n_, c)]; }
    double operator()(int row, int col) const { return (*this)(Cell{row, col}); }

    double mean() const {
        // compensated sum
        double sum = 0.0, comp = 0.0;
        for (double v : values_) {
            double y = v - comp;
            double t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        return sum / static_cast<double>(values_.size());
    }

    friend bool operator==(const ScalarField2D&, const ScalarField2D&) = default;

private:
    int n_;
    double spacing_;
    std::vector<double> values_;
    FieldKind kind_;
    std::int64_t seed_;
    Topology topology_;
};

namespace detail {

// The FFTW planner is not re-entrant.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

class FftwPlan {
public:
    explicit FftwPlan(fftw_plan p) : plan_(p) {}
    FftwPlan(const FftwPlan&) = delete;
    FftwPlan& operator=(const FftwPlan&) = delete;
    ~FftwPlan() {
        if (plan_) {
            std::lock_guard lock(fftw_planner_mutex());
            fftw_destroy_plan(plan_);
        }
    }
    void execute() const { fftw_execute(plan_); }

private:
    fftw_plan plan_;
};

inline std::vector<double> white_noise(std::size_t count, std::int64_t seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> out(count);
    for (double& v : out) v = normal(rng);
    return out;
}

// Covariance 2*pi*L^+ where L is the graph Laplacian of the periodic n x n lattice.
inline std::vector<double> sample_torus(int n, std::int64_t seed) {
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    const int half = n / 2 + 1;
    std::vector<double> noise = white_noise(nn, seed);
    std::vector<double> out(nn);
    std::unique_ptr<fftw_complex[], FftwFree> spec(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n * half)));

    fftw_plan fwd_raw, bwd_raw;
    {
        std::lock_guard lock(fftw_planner_mutex());
        fwd_raw = fftw_plan_dft_r2c_2d(n, n, noise.data(), spec.get(), FFTW_ESTIMATE);
        bwd_raw = fftw_plan_dft_c2r_2d(n, n, spec.get(), out.data(), FFTW_ESTIMATE);
    }
    FftwPlan fwd(fwd_raw), bwd(bwd_raw);
    fwd.execute();

    const double two_pi = 2.0 * std::numbers::pi;
    const double norm = 1.0 / static_cast<double>(nn);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < half; ++b) {
            const double lambda = 4.0 - 2.0 * std::cos(two_pi * a / n) - 2.0 * std::cos(two_pi * b / n);
            const double amp = (a == 0 && b == 0) ? 0.0 : std::sqrt(two_pi / lambda) * norm;
            fftw_complex& z = spec[static_cast<std::size_t>(a) * half + b];
            z[0] *= amp;
            z[1] *= amp;
        }
    }
    bwd.execute();
    return out;
}

// Covariance 2*pi*L_D^{-1}, L_D the Dirichlet Laplacian (zero outside the n x n block).
inline std::vector<double> sample_zero_boundary(int n, std::int64_t seed) {
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    std::vector<double> coeff = white_noise(nn, seed);
    std::vector<double> out(nn);
    const double two_pi = 2.0 * std::numbers::pi;
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            const double lambda = 4.0 - 2.0 * std::cos(std::numbers::pi * (a + 1) / (n + 1)) -
                                  2.0 * std::cos(std::numbers::pi * (b + 1) / (n + 1));
            coeff[static_cast<std::size_t>(a) * n + b] *= std::sqrt(two_pi / lambda);
        }
    }
    fftw_plan raw;
    {
        std::lock_guard lock(fftw_planner_mutex());
        raw = fftw_plan_r2r_2d(n, n, coeff.data(), out.data(), FFTW_RODFT00, FFTW_RODFT00,
                               FFTW_ESTIMATE);
    }
    FftwPlan plan(raw);
    plan.execute();
    // RODFT00 carries a factor 2 per axis; orthonormal sine basis needs sqrt(2/(n+1)) per axis.
    const double scale = 1.0 / (2.0 * (n + 1));
    for (double& v : out) v *= scale;
    return out;
}

}  // namespace detail

/**
 * Discrete Gaussian free field sample.
 *
 * The covariance is 2*pi times the Green's function of the lattice Laplacian, so that
 * E[(h(u) - h(v))^2] ~ 2 log|u - v| in lattice units. On the torus the zero mode is
 * removed (grid mean pinned to zero); with zero_boundary the field vanishes outside
 * the block.
 */
inline ScalarField2D sample_dgff(int n, double spacing, std::int64_t seed,
                                 Topology topology = Topology::torus) {
    if (n < 8) throw ConfigError("sample_dgff: n must be at least 8, got " + std::to_string(n));
    if (topology == Topology::torus && !is_power_of_two(n))
        throw ConfigError("sample_dgff: torus topology needs n to be a power of two, got " +
                          std::to_string(n));
    if (!(spacing > 0.0)) throw ConfigError("sample_dgff: spacing must be positive");

    std::vector<double> values;
    if (topology == Topology::torus) {
        values = detail::sample_torus(n, seed);
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        for (double& v : values) v -= mean;
    } else {
        values = detail::sample_zero_boundary(n, seed);
    }
    return ScalarField2D(n, spacing, std::move(values), FieldKind::raw_gff, seed, topology);
}

/// Half-width, in cells, of the truncated mollifier window: floor(4 * (eps / sqrt 2) / spacing).
inline int mollifier_half_width(double eps, double spacing) {
    return static_cast<int>(std::floor(4.0 * (eps / std::numbers::sqrt2) / spacing));
}

/// Normalised 1-D factor of the heat kernel p_{eps^2/2}; the 2-D kernel is its outer product.
inline std::vector<double> mollifier_taps(double eps, double spacing) {
    const int k = mollifier_half_width(eps, spacing);
    std::vector<double> taps(2 * static_cast<std::size_t>(k) + 1);
    double total = 0.0;
    for (int i = -k; i <= k; ++i) {
        const double d = i * spacing;
        taps[i + k] = std::exp(-(d * d) / (eps * eps));
        total += taps[i + k];
    }
    for (double& t : taps) t /= total;
    return taps;
}

/**
 * Convolution with the heat kernel p_{eps^2/2}(z) = exp(-|z|^2/eps^2) / (pi eps^2),
 * truncated to a square window of half-width floor(4 sigma / spacing), sigma = eps/sqrt(2),
 * and renormalised to unit mass. Torus fields wrap; zero-boundary fields are zero-padded.
 */
inline ScalarField2D heat_mollify(const ScalarField2D& field, double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw ConfigError("heat_mollify: eps must be positive, got " + std::to_string(eps));
    if (field.kind() == FieldKind::mollified)
        throw ConfigError("heat_mollify: field is already mollified");

    const int n = field.n();
    const std::vector<double> taps = mollifier_taps(eps, field.spacing());
    const int k = static_cast<int>(taps.size() / 2);
    const bool periodic = field.topology() == Topology::torus;
    std::span<const double> in = field.values();
    std::vector<double> tmp(in.size(), 0.0), out(in.size(), 0.0);

    auto wrap = [n](int i) { return ((i % n) + n) % n; };

    for (int r = 0; r < n; ++r) {
        const double* row = in.data() + static_cast<std::size_t>(r) * n;
        double* dst = tmp.data() + static_cast<std::size_t>(r) * n;
        for (int c = 0; c < n; ++c) {
            double acc = 0.0;
            for (int t = -k; t <= k; ++t) {
                const int cc = c + t;
                if (cc >= 0 && cc < n)
                    acc += taps[t + k] * row[cc];
                else if (periodic)
                    acc += taps[t + k] * row[wrap(cc)];
            }
            dst[c] = acc;
        }
    }
    std::vector<double> column(n);
    for (int c = 0; c < n; ++c) {
        for (int r = 0; r < n; ++r) column[r] = tmp[static_cast<std::size_t>(r) * n + c];
        for (int r = 0; r < n; ++r) {
            double acc = 0.0;
            for (int t = -k; t <= k; ++t) {
                const int rr = r + t;
                if (rr >= 0 && rr < n)
                    acc += taps[t + k] * column[rr];
                else if (periodic)
                    acc += taps[t + k] * column[wrap(rr)];
            }
            out[static_cast<std::size_t>(r) * n + c] = acc;
        }
    }
    return ScalarField2D(n, field.spacing(), std::move(out), FieldKind::mollified, field.seed(),
                         field.topology());
}

/// Bilinear interpolation at fractional lattice coordinates (row, col) inside [0, n-1]^2.
inline double bilinear(const ScalarField2D& field, double row, double col) {
    const int n = field.n();
    int r0 = std::min(static_cast<int>(std::floor(row)), n - 2);
    int c0 = std::min(static_cast<int>(std::floor(col)), n - 2);
    r0 = std::max(r0, 0);
    c0 = std::max(c0, 0);
    const double fr = row - r0, fc = col - c0;
    return (1 - fr) * ((1 - fc) * field(r0, c0) + fc * field(r0, c0 + 1)) +
           fr * ((1 - fc) * field(r0 + 1, c0) + fc * field(r0 + 1, c0 + 1));
}

/// Mean of the bilinear interpolant over `samples` equally spaced points on the circle.
inline double circle_average(const ScalarField2D& field, Cell center, double r, int samples) {
    const double rad = r / field.spacing();
    const int n = field.n();
    if (!in_grid(n, center) || center.row - rad < 0.0 || center.col - rad < 0.0 ||
        center.row + rad > n - 1 || center.col + rad > n - 1)
        throw DomainError("circle_average: circle of radius " + std::to_string(r) + " about " +
                          to_string(center) + " leaves the grid");
    double acc = 0.0;
    const double step = 2.0 * std::numbers::pi / samples;
    for (int k = 0; k < samples; ++k) {
        const double theta = step * k;
        acc += bilinear(field, center.row + rad * std::sin(theta), center.col + rad * std::cos(theta));
    }
    return acc / samples;
}

inline double circle_average(const ScalarField2D& field, Cell center, double r) {
    if (!(r >= field.spacing()))
        throw DomainError("circle_average: radius must be at least one lattice spacing");
    const int samples = std::max(
        64, static_cast<int>(std::ceil(2.0 * std::numbers::pi * r / field.spacing())));
    return circle_average(field, center, r, samples);
}

/// Cellwise h + f. The result is tagged custom and keeps the seed and topology.
inline ScalarField2D add_function(const ScalarField2D& field, std::span<const double> f) {
    if (f.size() != field.values().size())
        throw ConfigError("add_function: size mismatch");
    std::vector<double> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!std::isfinite(f[i]))
            throw DomainError("add_function: non-finite value at " +
                              to_string(cell_of(field.n(), static_cast<std::uint32_t>(i))));
        out[i] = field.values()[i] + f[i];
    }
    return ScalarField2D(field.n(), field.spacing(), std::move(out), FieldKind::custom,
                         field.seed(), field.topology());
}

template <class F>
    requires std::invocable<F, Cell>
inline ScalarField2D add_function(const ScalarField2D& field, F&& f) {
    const int n = field.n();
    std::vector<double> values(static_cast<std::size_t>(n) * n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) values[index_of(n, {r, c})] = static_cast<double>(f(Cell{r, c}));
    return add_function(field, std::span<const double>(values));
}

}  // namespace lfpp
