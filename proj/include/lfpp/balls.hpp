#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lfpp/core.hpp"
#include "lfpp/metric.hpp"
#include "lfpp/region.hpp"
#include "lfpp/stats.hpp"

namespace lfpp {

/// Closed metric ball {v : dist(v) <= s} about the single source of `d`.
inline RegionMask metric_ball(const DistanceField& d, double s) {
    if (d.sources.size() != 1) throw ConfigError("metric_ball: distance field must have one source");
    if (!(s >= 0.0)) throw ConfigError("metric_ball: radius must be >= 0");
    RegionMask m = RegionMask::empty(d.n);
    m.kind = MaskKind::ball;
    m.center = d.sources.front();
    m.radius = s;
    for (std::size_t i = 0; i < d.dist.size(); ++i) m.bits[i] = d.dist[i] <= s ? 1 : 0;
    return m;
}

/**
 * Complement cells on the target's side: the 4-connected component of the complement
 * containing `target`, or every complement component touching the grid edge when the
 * target is at infinity.
 */
inline std::vector<std::uint8_t> target_side(const RegionMask& mask, std::optional<Cell> target) {
    const int n = mask.n;
    std::vector<std::uint8_t> side(mask.bits.size(), 0);
    std::deque<std::uint32_t> queue;
    auto seed = [&](Cell c) {
        const std::uint32_t idx = index_of(n, c);
        if (!mask.bits[idx] && !side[idx]) {
            side[idx] = 1;
            queue.push_back(idx);
        }
    };
    if (target) {
        if (!in_grid(n, *target)) throw DomainError("target " + to_string(*target) + " outside grid");
        seed(*target);
    } else {
        for (int i = 0; i < n; ++i) {
            seed({0, i});
            seed({n - 1, i});
            seed({i, 0});
            seed({i, n - 1});
        }
    }
    while (!queue.empty()) {
        const Cell c = cell_of(n, queue.front());
        queue.pop_front();
        for (const Offset& o : kOffsets4) {
            const Cell nb{c.row + o.drow, c.col + o.dcol};
            if (in_grid(n, nb)) seed(nb);
        }
    }
    return side;
}

/**
 * Filled ball: the ball together with every complement component it disconnects from
 * the target. The complement is taken 4-connected (the mask itself is 8-connected).
 * A target inside the ball yields the whole grid.
 */
inline RegionMask fill_ball(const RegionMask& ball, std::optional<Cell> target) {
    if (ball.kind != MaskKind::ball) throw ConfigError("fill_ball: mask is not a metric ball");
    RegionMask filled = ball;
    filled.kind = MaskKind::filled_ball;
    filled.target = target;
    if (target && ball.contains(*target)) {
        std::fill(filled.bits.begin(), filled.bits.end(), std::uint8_t{1});
        return filled;
    }
    const std::vector<std::uint8_t> side = target_side(ball, target);
    for (std::size_t i = 0; i < side.size(); ++i) filled.bits[i] = side[i] ? 0 : 1;
    return filled;
}

namespace detail {

// When the target side is empty (target swallowed), the outside of the grid plays its role.
struct TargetSide {
    std::vector<std::uint8_t> side;
    bool outside_counts = false;

    bool operator()(int n, Cell c) const {
        return in_grid(n, c) ? side[index_of(n, c)] != 0 : outside_counts;
    }
};

inline TargetSide target_side_of(const RegionMask& mask) {
    TargetSide ts;
    const std::optional<Cell> target = mask.kind == MaskKind::filled_ball ? mask.target : std::nullopt;
    if (target && mask.contains(*target)) {
        ts.side.assign(mask.bits.size(), 0);
        ts.outside_counts = true;
        return ts;
    }
    ts.side = target_side(mask, target);
    ts.outside_counts = !target.has_value();
    return ts;
}

}  // namespace detail

/// Mask cells that have a 4-neighbour on the target side of the complement.
inline RegionMask boundary_cells(const RegionMask& filled) {
    const int n = filled.n;
    const detail::TargetSide ts = detail::target_side_of(filled);
    RegionMask out = RegionMask::empty(n);
    out.kind = MaskKind::custom;
    out.center = filled.center;
    out.target = filled.target;
    out.radius = filled.radius;
    for (std::uint32_t i = 0; i < filled.bits.size(); ++i) {
        if (!filled.bits[i]) continue;
        const Cell c = cell_of(n, i);
        for (const Offset& o : kOffsets4) {
            if (ts(n, {c.row + o.drow, c.col + o.dcol})) {
                out.bits[i] = 1;
                break;
            }
        }
    }
    return out;
}

/// Topological boundary of a mask: cells with any 4-neighbour outside it (or off the grid).
inline RegionMask region_boundary(const RegionMask& mask) {
    const int n = mask.n;
    RegionMask out = RegionMask::empty(n);
    for (std::uint32_t i = 0; i < mask.bits.size(); ++i) {
        if (!mask.bits[i]) continue;
        const Cell c = cell_of(n, i);
        for (const Offset& o : kOffsets4) {
            if (!mask.contains({c.row + o.drow, c.col + o.dcol})) {
                out.bits[i] = 1;
                break;
            }
        }
    }
    return out;
}

struct BoundaryLoop {
    std::vector<Cell> cells;
    bool closed = false;
    bool simple = false;
};

namespace detail {

// Clockwise on screen (row axis pointing down), starting north.
inline constexpr int kMooreRow[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
inline constexpr int kMooreCol[8] = {0, 1, 1, 1, 0, -1, -1, -1};

inline int moore_direction(Cell from, Cell to) {
    for (int k = 0; k < 8; ++k)
        if (from.row + kMooreRow[k] == to.row && from.col + kMooreCol[k] == to.col) return k;
    return -1;
}

inline BoundaryLoop moore_trace(const RegionMask& mask, Cell start, Cell backtrack) {
    BoundaryLoop loop;
    Cell p = start;
    Cell b = backtrack;
    std::optional<Cell> first_next;
    const std::size_t guard = 4 * mask.bits.size() + 16;
    for (std::size_t iter = 0; iter < guard; ++iter) {
        const int k = moore_direction(p, b);
        std::optional<Cell> next;
        Cell last_bg = b;
        for (int i = 1; i <= 8; ++i) {
            const int dir = (k + i) % 8;
            const Cell q{p.row + kMooreRow[dir], p.col + kMooreCol[dir]};
            if (mask.contains(q)) {
                next = q;
                break;
            }
            last_bg = q;
        }
        if (!next) {
            loop.cells = {start};
            loop.closed = true;
            break;
        }
        if (first_next && p == start && *next == *first_next) {
            loop.closed = true;
            break;
        }
        if (!first_next) first_next = next;
        loop.cells.push_back(p);
        b = last_bg;
        p = *next;
    }
    std::unordered_set<std::uint32_t> seen;
    loop.simple = true;
    for (Cell c : loop.cells) {
        if (!seen.insert(index_of(mask.n, c)).second) {
            loop.simple = false;
            break;
        }
    }
    return loop;
}

}  // namespace detail

/**
 * Moore-neighbour tracing of the contour between each 8-connected component of the mask
 * and the target side of its complement (the grid exterior when the target is infinity).
 * Components are visited in row-major order of their first contour cell. A loop that
 * revisits a cell is reported with simple = false; pinches are not repaired.
 */
inline std::vector<BoundaryLoop> boundary_trace(const RegionMask& filled) {
    const int n = filled.n;
    if (filled.count() == 0) throw DomainError("boundary_trace: mask is empty");
    const detail::TargetSide ts = detail::target_side_of(filled);

    std::vector<std::int32_t> comp(filled.bits.size(), -1);
    std::int32_t ncomp = 0;
    for (std::uint32_t i = 0; i < filled.bits.size(); ++i) {
        if (!filled.bits[i] || comp[i] >= 0) continue;
        std::deque<std::uint32_t> queue{i};
        comp[i] = ncomp;
        while (!queue.empty()) {
            const Cell c = cell_of(n, queue.front());
            queue.pop_front();
            for (const Offset& o : kOffsets8) {
                const Cell nb{c.row + o.drow, c.col + o.dcol};
                if (!filled.contains(nb)) continue;
                const std::uint32_t j = index_of(n, nb);
                if (comp[j] < 0) {
                    comp[j] = ncomp;
                    queue.push_back(j);
                }
            }
        }
        ++ncomp;
    }

    std::vector<std::uint8_t> traced(static_cast<std::size_t>(ncomp), 0);
    std::vector<BoundaryLoop> loops;
    for (std::uint32_t i = 0; i < filled.bits.size(); ++i) {
        if (!filled.bits[i] || traced[comp[i]]) continue;
        const Cell c = cell_of(n, i);
        for (const Offset& o : kOffsets4) {
            const Cell nb{c.row + o.drow, c.col + o.dcol};
            if (ts(n, nb)) {
                loops.push_back(detail::moore_trace(filled, c, nb));
                traced[comp[i]] = 1;
                break;
            }
        }
    }
    return loops;
}

/// Metric net as a mask together with the radius grid it was built from.
struct NetMask : RegionMask {
    std::vector<double> radii;
};

/// Distinct distances <= s on grids up to 64 x 64, otherwise 256 quantile-spaced radii ending at s.
inline std::vector<double> default_net_radii(const DistanceField& d, double s) {
    std::vector<double> within;
    for (double v : d.dist)
        if (v <= s) within.push_back(v);
    std::sort(within.begin(), within.end());
    within.erase(std::unique(within.begin(), within.end()), within.end());
    if (d.n <= 64 || within.size() <= 256) return within;
    std::vector<double> radii;
    for (int k = 1; k <= 256; ++k) {
        const double r = quantile(within, k / 256.0);
        if (radii.empty() || r > radii.back()) radii.push_back(r);
    }
    radii.back() = s;
    return radii;
}

/// Union over t in `radii` of the boundary cells of the t-filled ball targeted at y.
inline NetMask metric_net(const DistanceField& d, std::optional<Cell> target, double s,
                          std::vector<double> radii) {
    if (!std::is_sorted(radii.begin(), radii.end()))
        throw ConfigError("metric_net: radii must be sorted");
    if (!radii.empty() && (radii.front() < 0.0 || radii.back() > s))
        throw ConfigError("metric_net: radii must lie in [0, s]");
    NetMask net;
    static_cast<RegionMask&>(net) = RegionMask::empty(d.n);
    net.kind = MaskKind::net;
    net.center = d.sources.empty() ? Cell{} : d.sources.front();
    net.target = target;
    net.radius = s;
    for (double t : radii) {
        const RegionMask bdy = boundary_cells(fill_ball(metric_ball(d, t), target));
        for (std::size_t i = 0; i < bdy.bits.size(); ++i) net.bits[i] |= bdy.bits[i];
    }
    net.radii = std::move(radii);
    return net;
}

inline NetMask metric_net(const DistanceField& d, std::optional<Cell> target, double s) {
    return metric_net(d, target, s, default_net_radii(d, s));
}

/// A metric that can enumerate the lattice points within distance r of a centre.
template <class M>
concept BallEnumerator = requires(M& m, Cell c, double r) {
    m.for_each_within(c, r, [](Cell) {});
};

/// LFPP graph metric over the whole grid; each query is a bounded Dijkstra search.
class GraphMetric {
public:
    explicit GraphMetric(const WeightField& w) : engine_(w) {}

    template <class F>
    void for_each_within(Cell c, double r, F&& f) {
        const int n = engine_.weights().n();
        const std::vector<DijkstraSeed> seeds{{index_of(n, c), 0.0}};
        engine_.run(seeds, detail::kAllowAll, [&](std::uint32_t v, double d) {
            if (d > r) return false;
            f(cell_of(n, v));
            return true;
        });
    }

private:
    ShortestPathEngine engine_;
};

class EuclideanMetric {
public:
    EuclideanMetric(int n, double spacing) : n_(n), spacing_(spacing) {}

    template <class F>
    void for_each_within(Cell c, double r, F&& f) const {
        const int k = static_cast<int>(std::floor(r / spacing_));
        for (int dr = -k; dr <= k; ++dr)
            for (int dc = -k; dc <= k; ++dc) {
                const Cell q{c.row + dr, c.col + dc};
                if (in_grid(n_, q) && euclidean(c, q, spacing_) <= r) f(q);
            }
    }

private:
    int n_;
    double spacing_;
};

/// Explicit pairwise distances over a fixed point list.
class MatrixMetric {
public:
    MatrixMetric(std::vector<Cell> points, std::vector<std::vector<double>> dist)
        : points_(std::move(points)), dist_(std::move(dist)) {}

    template <class F>
    void for_each_within(Cell c, double r, F&& f) const {
        const auto it = std::find(points_.begin(), points_.end(), c);
        if (it == points_.end()) return;
        const std::size_t i = static_cast<std::size_t>(it - points_.begin());
        for (std::size_t j = 0; j < points_.size(); ++j)
            if (dist_[i][j] <= r) f(points_[j]);
    }

private:
    std::vector<Cell> points_;
    std::vector<std::vector<double>> dist_;
};

/**
 * Greedy cover: take the first uncovered point in row-major order, cover everything within
 * distance r of it, repeat. An upper bound on the minimal number of r-balls centred in the set.
 */
template <BallEnumerator Metric>
std::size_t covering_number(std::span<const Cell> set, Metric& metric, double r) {
    if (set.empty()) throw ConfigError("covering_number: empty point set");
    if (!(r > 0.0)) throw ConfigError("covering_number: radius must be positive");
    std::vector<Cell> pts(set.begin(), set.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    auto key = [](Cell c) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.row)) << 32) |
               static_cast<std::uint32_t>(c.col);
    };
    std::unordered_map<std::uint64_t, std::size_t> pos;
    pos.reserve(pts.size() * 2);
    for (std::size_t i = 0; i < pts.size(); ++i) pos.emplace(key(pts[i]), i);
    std::vector<std::uint8_t> covered(pts.size(), 0);
    std::size_t count = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (covered[i]) continue;
        ++count;
        covered[i] = 1;
        metric.for_each_within(pts[i], r, [&](Cell q) {
            const auto it = pos.find(key(q));
            if (it != pos.end()) covered[it->second] = 1;
        });
    }
    return count;
}

struct DimensionEstimate {
    double slope = 0.0;
    double standard_error = 0.0;
};

/// Least-squares slope of log(count) against log(1/r).
inline DimensionEstimate dimension_fit(std::span<const std::pair<double, std::size_t>> counts) {
    if (counts.size() < 4) throw ConfigError("dimension_fit: need at least 4 radii");
    std::vector<double> x, y;
    double rmin = kInfinity, rmax = 0.0;
    for (const auto& [r, c] : counts) {
        if (!(r > 0.0) || c == 0) throw ConfigError("dimension_fit: radii and counts must be positive");
        x.push_back(std::log(1.0 / r));
        y.push_back(std::log(static_cast<double>(c)));
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
    }
    if (rmax < 10.0 * rmin * (1.0 - 1e-12))
        throw ConfigError("dimension_fit: radii must span at least one decade");
    const LinearFit fit = least_squares(x, y);
    return {fit.slope, fit.slope_stderr};
}

}  // namespace lfpp
