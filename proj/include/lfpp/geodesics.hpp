#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "lfpp/balls.hpp"
#include "lfpp/core.hpp"
#include "lfpp/metric.hpp"

namespace lfpp {

struct GeodesicPath {
    std::vector<Cell> cells;  // source first, target last
    double length = 0.0;
};

/// Sum of edge costs along consecutive cells of a path.
inline double path_length(const WeightField& w, std::span<const Cell> cells) {
    double total = 0.0;
    for (std::size_t i = 1; i < cells.size(); ++i) {
        const int dr = std::abs(cells[i].row - cells[i - 1].row);
        const int dc = std::abs(cells[i].col - cells[i - 1].col);
        if (dr > 1 || dc > 1 || dr + dc == 0 ||
            (w.connectivity() == Connectivity::four && dr + dc != 1))
            throw DomainError("path_length: cells " + to_string(cells[i - 1]) + " and " +
                              to_string(cells[i]) + " are not adjacent");
        total += w.edge_cost(index_of(w.n(), cells[i - 1]), index_of(w.n(), cells[i]),
                             dr + dc == 2 ? kSqrt2 : 1.0);
    }
    return total;
}

/// Backtracks the predecessor map from `target` to the source.
inline GeodesicPath extract_geodesic(const DistanceField& d, Cell target) {
    if (!in_grid(d.n, target)) throw DomainError("extract_geodesic: target outside grid");
    if (!std::isfinite(d(target)))
        throw DomainError("extract_geodesic: target " + to_string(target) + " is unreachable");
    GeodesicPath path;
    path.length = d(target);
    std::uint32_t idx = index_of(d.n, target);
    const std::size_t guard = d.dist.size();
    while (idx != kNoPredecessor) {
        path.cells.push_back(cell_of(d.n, idx));
        if (path.cells.size() > guard) throw DomainError("extract_geodesic: predecessor cycle");
        idx = d.pred[idx];
    }
    std::reverse(path.cells.begin(), path.cells.end());
    return path;
}

/// Union of geodesics from the root; `parent` maps child index to parent index.
struct GeodesicTree {
    Cell root{};
    std::vector<Cell> targets;
    std::map<std::uint32_t, std::uint32_t> parent;

    std::size_t edge_count() const { return parent.size(); }

    std::size_t vertex_count() const {
        std::set<std::uint32_t> v;
        for (const auto& [child, par] : parent) {
            v.insert(child);
            v.insert(par);
        }
        return v.empty() ? 1 : v.size();
    }
};

inline GeodesicTree geodesic_tree(const DistanceField& d, std::span<const Cell> targets) {
    if (d.sources.size() != 1) throw ConfigError("geodesic_tree: distance field must have one source");
    GeodesicTree tree;
    tree.root = d.sources.front();
    tree.targets.assign(targets.begin(), targets.end());
    for (Cell t : targets) {
        if (!in_grid(d.n, t) || !std::isfinite(d(t)))
            throw DomainError("geodesic_tree: target " + to_string(t) + " is unreachable");
        std::uint32_t idx = index_of(d.n, t);
        while (d.pred[idx] != kNoPredecessor && !tree.parent.contains(idx)) {
            tree.parent.emplace(idx, d.pred[idx]);
            idx = d.pred[idx];
        }
    }
    return tree;
}

namespace detail {

/// Cell where the path leaves the mask for the first time (the last cell inside), else its end.
inline Cell exit_cell(std::span<const Cell> cells, const RegionMask& mask) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!mask(cells[i])) return i == 0 ? cells[0] : cells[i - 1];
    }
    return cells.back();
}

}  // namespace detail

/**
 * Number of distinct cells at which the geodesics from the source to `targets` cross the
 * boundary of the t-filled ball. The crossing cell is the last cell of the path before its
 * filled-ball membership first flips; a path that never leaves contributes its endpoint.
 * Targets must be boundary cells of the s-filled ball.
 */
inline std::size_t confluence_points(const DistanceField& d, std::optional<Cell> target_y, double t,
                                     double s, std::span<const Cell> targets) {
    if (!(t > 0.0) || t > s) throw ConfigError("confluence_points: need 0 < t <= s");
    const RegionMask outer = boundary_cells(fill_ball(metric_ball(d, s), target_y));
    for (Cell z : targets)
        if (!outer.contains(z))
            throw DomainError("confluence_points: target " + to_string(z) +
                              " is not on the filled-ball boundary");
    const RegionMask inner = fill_ball(metric_ball(d, t), target_y);
    std::set<Cell> hits;
    for (Cell z : targets) hits.insert(detail::exit_cell(extract_geodesic(d, z).cells, inner));
    return hits.size();
}

/// Largest t such that all geodesics to `targets` share their initial segment up to distance t.
inline double coalescence_radius(const DistanceField& d, double s, std::span<const Cell> targets) {
    if (targets.size() < 2) throw ConfigError("coalescence_radius: need at least two targets");
    std::vector<GeodesicPath> paths;
    for (Cell z : targets) {
        paths.push_back(extract_geodesic(d, z));
        if (paths.back().length < s)
            throw DomainError("coalescence_radius: target " + to_string(z) + " is closer than s");
    }
    std::size_t common = paths.front().cells.size();
    for (const GeodesicPath& p : paths) {
        std::size_t k = 0;
        while (k < common && k < p.cells.size() && p.cells[k] == paths.front().cells[k]) ++k;
        common = k;
    }
    if (common == 0) return 0.0;
    return d(paths.front().cells[common - 1]);
}

/// Signed area of a closed loop with x = col and y = -row; positive means counterclockwise.
inline double signed_area(std::span<const Cell> loop) {
    double a = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        const Cell p = loop[i], q = loop[(i + 1) % loop.size()];
        a += static_cast<double>(p.col) * (-q.row) - static_cast<double>(q.col) * (-p.row);
    }
    return 0.5 * a;
}

struct LeftmostSelection {
    GeodesicPath selected;              // lattice limit of the approaching sequence
    std::vector<GeodesicPath> approach; // geodesics to the approaching cells, farthest first
};

/**
 * Approximates the leftmost geodesic to a boundary cell z: geodesics to the `steps` loop
 * cells on the counterclockwise side of z, approaching z, together with their lattice
 * limit, the geodesic to z itself. With continuous weights lattice geodesics are a.s.
 * unique, so `selected` coincides with extract_geodesic(d, z).
 */
inline LeftmostSelection leftmost_selection(const DistanceField& d, const BoundaryLoop& loop, Cell z,
                                            std::size_t steps = 3) {
    const auto it = std::find(loop.cells.begin(), loop.cells.end(), z);
    if (it == loop.cells.end())
        throw DomainError("leftmost_selection: " + to_string(z) + " is not on the boundary loop");
    const std::size_t m = loop.cells.size();
    const std::size_t at = static_cast<std::size_t>(it - loop.cells.begin());
    const bool ccw = signed_area(loop.cells) > 0.0;
    LeftmostSelection out;
    for (std::size_t k = std::min(steps, m - 1); k >= 1; --k) {
        const std::size_t j = ccw ? (at + k) % m : (at + m - (k % m)) % m;
        out.approach.push_back(extract_geodesic(d, loop.cells[j]));
    }
    out.selected = extract_geodesic(d, z);
    return out;
}

}  // namespace lfpp
