#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lfpp/balls.hpp"
#include "lfpp/core.hpp"
#include "lfpp/field.hpp"
#include "lfpp/metric.hpp"
#include "lfpp/parallel.hpp"
#include "lfpp/stats.hpp"

namespace lfpp {

/**
 * Least LFPP length of a left-right crossing of the square covered by the grid.
 *
 * Cell centres sit half a cell inside the square, so each crossing is charged the extra
 * half cell spacing * W / 2 at both ends; with unit weights the answer is the side length.
 */
inline double crossing_length(const WeightField& w) {
    const int n = w.n();
    const double half = 0.5 * w.spacing();
    std::vector<DijkstraSeed> seeds;
    seeds.reserve(n);
    for (int r = 0; r < n; ++r) {
        const std::uint32_t idx = index_of(n, {r, 0});
        seeds.push_back({idx, half * w[idx]});
    }
    double best = kInfinity;
    ShortestPathEngine engine(w);
    engine.run(seeds, detail::kAllowAll, [&](std::uint32_t v, double d) {
        if (d >= best) return false;
        if (static_cast<int>(v % static_cast<std::uint32_t>(n)) == n - 1)
            best = std::min(best, d + half * w[v]);
        return true;
    });
    return best;
}

/// Field for replica `replica` of a run with master seed `seed`, mollified at eps (eps = 0: raw).
inline ScalarField2D replica_field(int n, double eps, std::int64_t seed, std::size_t replica) {
    const ScalarField2D raw = sample_dgff(n, 1.0 / n, split_seed(seed, replica), Topology::torus);
    return eps > 0.0 ? heat_mollify(raw, eps) : raw;
}

/**
 * Crossing lengths of the unit square, lengths[x][e][r] for xi_list[x], eps_list[e] and
 * replica r. Each replica's base field is shared across all eps and xi values.
 */
inline std::vector<std::vector<std::vector<double>>> crossing_table(
    std::span<const double> xi_list, std::span<const double> eps_list, int n, int replicas,
    std::int64_t seed, Connectivity conn = Connectivity::eight) {
    if (replicas < 1) throw ConfigError("crossing_table: replicas must be positive");
    for (double e : eps_list)
        if (!(e >= 0.0)) throw ConfigError("crossing_table: eps must be >= 0");
    for (double x : xi_list)
        if (!(x >= 0.0)) throw ConfigError("crossing_table: xi must be >= 0");
    std::vector<std::vector<std::vector<double>>> lengths(
        xi_list.size(), std::vector<std::vector<double>>(eps_list.size(), std::vector<double>(replicas)));
    parallel_for(static_cast<std::size_t>(replicas), [&](std::size_t r) {
        const ScalarField2D raw = sample_dgff(n, 1.0 / n, split_seed(seed, r), Topology::torus);
        for (std::size_t e = 0; e < eps_list.size(); ++e) {
            const ScalarField2D h = eps_list[e] > 0.0 ? heat_mollify(raw, eps_list[e]) : raw;
            for (std::size_t x = 0; x < xi_list.size(); ++x)
                lengths[x][e][r] = crossing_length(build_weights(h, xi_list[x], conn));
        }
    });
    return lengths;
}

inline std::vector<double> crossing_lengths(double xi, int n, double eps, int replicas, std::int64_t seed,
                                            Connectivity conn = Connectivity::eight) {
    const double xs[] = {xi};
    const double es[] = {eps};
    return crossing_table(xs, es, n, replicas, seed, conn)[0][0];
}

/// Sample median over replicas of the least left-right crossing length of [0,1]^2.
inline double crossing_median(double xi, int n, double eps, int replicas, std::int64_t seed,
                              Connectivity conn = Connectivity::eight) {
    if (replicas < 5) throw ConfigError("crossing_median: need at least 5 replicas");
    return median(crossing_lengths(xi, n, eps, replicas, seed, conn));
}

inline double central_charge(double q) { return 25.0 - 6.0 * q * q; }

struct ScalingRow {
    double eps = 0.0;
    double a_hat = 0.0;
    int replicas = 0;
};

struct ScalingEstimate {
    double xi = 0.0;
    std::vector<ScalingRow> table;
    double slope = 0.0;  // fitted exponent of a_hat in eps, i.e. 1 - xi Q
    double Q_hat = 0.0;
    double Q_stderr = 0.0;
    double c_M_hat = 0.0;
};

/// Fits log a_hat = (1 - xi Q) log eps + const and reads off Q.
inline ScalingEstimate estimate_Q_from_table(double xi, std::vector<ScalingRow> table) {
    if (!(xi > 0.0)) throw ConfigError("estimate_Q: xi must be > 0 (Q is not identifiable at xi = 0)");
    if (table.size() < 4) throw ConfigError("estimate_Q: need at least 4 eps values");
    std::vector<double> x, y;
    for (const ScalingRow& row : table) {
        if (!(row.a_hat > 0.0) || !(row.eps > 0.0))
            throw ConfigError("estimate_Q: eps and a_hat must be positive");
        x.push_back(std::log(row.eps));
        y.push_back(std::log(row.a_hat));
    }
    const LinearFit fit = least_squares(x, y);
    ScalingEstimate est;
    est.xi = xi;
    est.table = std::move(table);
    est.slope = fit.slope;
    est.Q_hat = (1.0 - fit.slope) / xi;
    est.Q_stderr = fit.slope_stderr / xi;
    est.c_M_hat = central_charge(est.Q_hat);
    return est;
}

inline void check_eps_sweep(std::span<const double> eps_list, int n) {
    if (eps_list.size() < 4) throw ConfigError("eps sweep: need at least 4 values");
    const auto [lo, hi] = std::minmax_element(eps_list.begin(), eps_list.end());
    if (*hi < 10.0 * *lo * (1.0 - 1e-12)) throw ConfigError("eps sweep: values must span a decade");
    if (*lo < 2.0 / n * (1.0 - 1e-12))
        throw ConfigError("eps sweep: eps must be at least two lattice spacings");
}

/// One ScalingEstimate per xi, sharing replica fields across the sweep.
inline std::vector<ScalingEstimate> estimate_Q_sweep(std::span<const double> xi_list,
                                                     std::span<const double> eps_list, int n,
                                                     int replicas, std::int64_t seed,
                                                     Connectivity conn = Connectivity::eight) {
    for (double xi : xi_list)
        if (!(xi > 0.0)) throw ConfigError("estimate_Q: xi must be > 0 (Q is not identifiable at xi = 0)");
    check_eps_sweep(eps_list, n);
    if (replicas < 5) throw ConfigError("estimate_Q: need at least 5 replicas per eps");
    const auto lengths = crossing_table(xi_list, eps_list, n, replicas, seed, conn);
    std::vector<ScalingEstimate> out;
    for (std::size_t x = 0; x < xi_list.size(); ++x) {
        std::vector<ScalingRow> table;
        for (std::size_t e = 0; e < eps_list.size(); ++e)
            table.push_back({eps_list[e], median(lengths[x][e]), replicas});
        out.push_back(estimate_Q_from_table(xi_list[x], std::move(table)));
    }
    return out;
}

inline ScalingEstimate estimate_Q(double xi, std::span<const double> eps_list, int n, int replicas,
                                  std::int64_t seed, Connectivity conn = Connectivity::eight) {
    const double xs[] = {xi};
    return estimate_Q_sweep(xs, eps_list, n, replicas, seed, conn).front();
}

struct XiBracket {
    bool conclusive = false;
    double lo = 0.0;
    double hi = 0.0;
};

/// First adjacent pair of the grid across which Q_hat - 2 changes sign.
inline XiBracket xi_crit_bracket_from(std::span<const double> xi_grid, std::span<const double> q_hat) {
    if (xi_grid.size() != q_hat.size() || xi_grid.size() < 2)
        throw ConfigError("xi_crit_bracket: grid and Q values must match, at least 2 points");
    if (!std::is_sorted(xi_grid.begin(), xi_grid.end()))
        throw ConfigError("xi_crit_bracket: xi grid must be sorted");
    for (std::size_t i = 0; i + 1 < xi_grid.size(); ++i) {
        const double a = q_hat[i] - 2.0, b = q_hat[i + 1] - 2.0;
        if ((a >= 0.0 && b <= 0.0) || (a <= 0.0 && b >= 0.0)) return {true, xi_grid[i], xi_grid[i + 1]};
    }
    return {};
}

struct XiCritResult {
    XiBracket bracket;
    std::vector<ScalingEstimate> estimates;
};

inline XiCritResult xi_crit_bracket(std::span<const double> xi_grid, std::span<const double> eps_list,
                                    int n, int replicas, std::int64_t seed,
                                    Connectivity conn = Connectivity::eight) {
    if (xi_grid.size() < 4) throw ConfigError("xi_crit_bracket: need at least 4 grid points");
    XiCritResult out;
    out.estimates = estimate_Q_sweep(xi_grid, eps_list, n, replicas, seed, conn);
    std::vector<double> q;
    for (const auto& e : out.estimates) q.push_back(e.Q_hat);
    out.bracket = xi_crit_bracket_from(xi_grid, q);
    return out;
}

struct AnnulusEvent {
    bool occurred = false;
    double around = 0.0;
    double across = 0.0;
};

/// Whether the distance around A_{r,2r}(center) is at most 1/c times the distance across it.
inline AnnulusEvent event_Ec(const WeightField& w, Cell center, double r, double c) {
    if (!(c > 0.0)) throw ConfigError("event_Ec: c must be positive");
    AnnulusEvent ev;
    ev.around = annulus_around(w, center, r, 2.0 * r);
    ev.across = annulus_across(w, center, r, 2.0 * r);
    ev.occurred = ev.around <= ev.across / c;
    return ev;
}

/// Around/across ratio of the annulus between eps*r and eps^alpha*r about z.
inline double hit_ball_ratio(const WeightField& w, Cell z, double eps, double r, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("hit_ball_ratio: alpha must lie in (0, 1)");
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("hit_ball_ratio: eps must lie in (0, 1)");
    const double r1 = eps * r, r2 = std::pow(eps, alpha) * r;
    return annulus_around(w, z, r1, r2) / annulus_across(w, z, r1, r2);
}

/**
 * Squared Euclidean distance transform (in cells^2) to the nearest set cell; lower-envelope
 * algorithm of Felzenszwalb and Huttenlocher, separable over rows and columns.
 */
inline std::vector<double> squared_distance_transform(const RegionMask& set) {
    const int n = set.n;
    const double big = 1e300;
    std::vector<double> f(static_cast<std::size_t>(n) * n);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = set.bits[i] ? 0.0 : big;

    std::vector<double> line(n), out(n), z(n + 1);
    std::vector<int> v(n);
    auto transform_1d = [&]() {
        int k = 0;
        v[0] = 0;
        z[0] = -big;
        z[1] = big;
        for (int q = 1; q < n; ++q) {
            double s;
            while (true) {
                const int p = v[k];
                s = ((line[q] + static_cast<double>(q) * q) - (line[p] + static_cast<double>(p) * p)) /
                    (2.0 * (q - p));
                if (s <= z[k] && k > 0) {
                    --k;
                    continue;
                }
                break;
            }
            if (s <= z[k]) {
                // k == 0 and the new parabola dominates everywhere
                v[0] = q;
                z[1] = big;
                continue;
            }
            ++k;
            v[k] = q;
            z[k] = s;
            z[k + 1] = big;
        }
        k = 0;
        for (int q = 0; q < n; ++q) {
            while (z[k + 1] < q) ++k;
            const double d = q - v[k];
            out[q] = d * d + line[v[k]];
        }
    };
    for (int c = 0; c < n; ++c) {
        for (int r = 0; r < n; ++r) line[r] = f[static_cast<std::size_t>(r) * n + c];
        transform_1d();
        for (int r = 0; r < n; ++r) f[static_cast<std::size_t>(r) * n + c] = out[r];
    }
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) line[c] = f[static_cast<std::size_t>(r) * n + c];
        transform_1d();
        for (int c = 0; c < n; ++c) f[static_cast<std::size_t>(r) * n + c] = out[c];
    }
    return f;
}

/// Minimal Euclidean distance between two nonempty cell sets, in physical units.
inline double set_separation(const RegionMask& a, const RegionMask& b, double spacing) {
    if (a.count() == 0 || b.count() == 0) throw DomainError("set_separation: empty boundary");
    const std::vector<double> dt = squared_distance_transform(b);
    double best = kInfinity;
    for (std::size_t i = 0; i < a.bits.size(); ++i)
        if (a.bits[i]) best = std::min(best, dt[i]);
    return std::sqrt(best) * spacing;
}

/// Euclidean distance between the boundaries of the t- and s-filled balls (t <= s).
inline double boundary_separation(const DistanceField& d, std::optional<Cell> target, double s, double t) {
    if (!(t > 0.0) || t > s) throw ConfigError("boundary_separation: need 0 < t <= s");
    const RegionMask outer = boundary_cells(fill_ball(metric_ball(d, s), target));
    const RegionMask inner = boundary_cells(fill_ball(metric_ball(d, t), target));
    return set_separation(inner, outer, d.spacing);
}

struct ThickPointReport {
    double eps = 0.0;
    double alpha = 0.0;
    double threshold = 0.0;
    std::vector<Cell> cells;
    std::size_t count = 0;
};

/// Cells whose mollified value reaches alpha * log(1/eps).
inline ThickPointReport thick_points(const ScalarField2D& field, double eps, double alpha) {
    if (field.kind() != FieldKind::mollified)
        throw ConfigError("thick_points: field must be mollified");
    if (!(eps > 0.0)) throw ConfigError("thick_points: eps must be positive");
    if (!(alpha >= 0.0)) throw ConfigError("thick_points: alpha must be >= 0");
    ThickPointReport rep;
    rep.eps = eps;
    rep.alpha = alpha;
    rep.threshold = alpha * std::log(1.0 / eps);
    const int n = field.n();
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            if (field(r, c) >= rep.threshold) rep.cells.push_back({r, c});
    rep.count = rep.cells.size();
    return rep;
}

}  // namespace lfpp
