#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lfpp/core.hpp"
#include "lfpp/field.hpp"
#include "lfpp/region.hpp"

namespace lfpp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/**
 * LFPP vertex weights exp(xi * h(v)) on the lattice.
 *
 * Edge (u, v) costs spacing * |u - v| * (W(u) + W(v)) / 2 with |u - v| in {1, sqrt 2}:
 * midpoint quadrature of the continuum integrand along the lattice step.
 */
class WeightField {
public:
    /// Wraps precomputed weights (e.g. W * exp(xi f) for Weyl-scaling checks).
    static WeightField from_weights(int n, double spacing, std::vector<double> weights,
                                    Connectivity conn = Connectivity::eight, double xi = 0.0,
                                    std::int64_t base_seed = 0) {
        if (n <= 0) throw ConfigError("weight field: n must be positive");
        if (!(spacing > 0.0)) throw ConfigError("weight field: spacing must be positive");
        if (weights.size() != static_cast<std::size_t>(n) * n)
            throw ConfigError("weight field: expected n^2 weights");
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (!std::isfinite(weights[i]) || !(weights[i] > 0.0))
                throw RangeError("weight at " +
                                 to_string(cell_of(n, static_cast<std::uint32_t>(i))) +
                                 " is not a finite positive number");
        }
        WeightField w;
        w.n_ = n;
        w.spacing_ = spacing;
        w.xi_ = xi;
        w.conn_ = conn;
        w.base_seed_ = base_seed;
        w.weights_ = std::move(weights);
        return w;
    }

    int n() const { return n_; }
    double spacing() const { return spacing_; }
    double xi() const { return xi_; }
    Connectivity connectivity() const { return conn_; }
    std::int64_t base_seed() const { return base_seed_; }
    std::span<const double> weights() const { return weights_; }
    double operator()(Cell c) const { return weights_[index_of(n_, c)]; }
    double operator[](std::uint32_t idx) const { return weights_[idx]; }

    double edge_cost(std::uint32_t u, std::uint32_t v, double unit_length) const {
        return 0.5 * spacing_ * unit_length * (weights_[u] + weights_[v]);
    }

    /// Largest cost among edges incident to c.
    double max_incident_cost(Cell c) const {
        double best = 0.0;
        for (const Offset& o : neighbours(conn_)) {
            const Cell nb{c.row + o.drow, c.col + o.dcol};
            if (in_grid(n_, nb))
                best = std::max(best, edge_cost(index_of(n_, c), index_of(n_, nb), o.length));
        }
        return best;
    }

private:
    int n_ = 0;
    double spacing_ = 1.0;
    double xi_ = 0.0;
    Connectivity conn_ = Connectivity::eight;
    std::int64_t base_seed_ = 0;
    std::vector<double> weights_;
};

inline WeightField build_weights(const ScalarField2D& field, double xi,
                                 Connectivity conn = Connectivity::eight) {
    if (!(xi >= 0.0) || !std::isfinite(xi))
        throw ConfigError("build_weights: xi must be a finite number >= 0");
    std::vector<double> w(field.values().size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = std::exp(xi * field.values()[i]);
        if (!std::isfinite(w[i]) || w[i] == 0.0)
            throw RangeError("build_weights: exp(xi * h) out of range at cell " +
                             to_string(cell_of(field.n(), static_cast<std::uint32_t>(i))) +
                             " (xi * h = " + std::to_string(xi * field.values()[i]) + ")");
    }
    return WeightField::from_weights(field.n(), field.spacing(), std::move(w), conn, xi,
                                     field.seed());
}

/// Shortest-path distances from a source set together with the predecessor map.
struct DistanceField {
    int n = 0;
    double spacing = 1.0;
    std::vector<Cell> sources;
    std::vector<double> dist;
    std::vector<std::uint32_t> pred;  // row-major index, kNoPredecessor for none
    std::int64_t weight_seed = 0;
    double xi = 0.0;

    double operator()(Cell c) const { return dist[index_of(n, c)]; }

    std::optional<Cell> predecessor(Cell c) const {
        const std::uint32_t p = pred[index_of(n, c)];
        if (p == kNoPredecessor) return std::nullopt;
        return cell_of(n, p);
    }

    /// Largest finite distance in the field.
    double max_finite() const {
        double m = 0.0;
        for (double d : dist)
            if (std::isfinite(d)) m = std::max(m, d);
        return m;
    }

    bool operator==(const DistanceField&) const = default;
};

struct DijkstraSeed {
    std::uint32_t index;
    double dist;
};

/**
 * Reusable Dijkstra state over one WeightField. Only touched entries are reset between
 * runs, so many small bounded searches on a large grid stay cheap.
 *
 * Frontier entries are ordered by (distance, row-major index). On an exact tie in a
 * tentative distance the predecessor with the smaller row-major index wins.
 */
class ShortestPathEngine {
public:
    explicit ShortestPathEngine(const WeightField& w)
        : w_(&w),
          dist_(w.weights().size(), kInfinity),
          pred_(w.weights().size(), kNoPredecessor),
          done_(w.weights().size(), 0),
          mark_(w.weights().size(), 0) {}

    /**
     * Runs from the seeds. `allowed(idx)` filters vertices that may be entered;
     * `on_settle(idx, d)` is called when a vertex becomes final and returns false to stop.
     */
    template <class Allowed, class OnSettle>
    void run(std::span<const DijkstraSeed> seeds, Allowed&& allowed, OnSettle&& on_settle) {
        reset();
        using Entry = std::pair<double, std::uint32_t>;
        std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> frontier;
        for (const DijkstraSeed& s : seeds) {
            touch(s.index);
            if (s.dist < dist_[s.index]) {
                dist_[s.index] = s.dist;
                frontier.emplace(s.dist, s.index);
            }
        }
        const int n = w_->n();
        const auto offsets = neighbours(w_->connectivity());
        while (!frontier.empty()) {
            const auto [d, u] = frontier.top();
            frontier.pop();
            if (done_[u] || d > dist_[u]) continue;
            done_[u] = 1;
            if (!on_settle(u, d)) return;
            const Cell cu = cell_of(n, u);
            for (const Offset& o : offsets) {
                const Cell cv{cu.row + o.drow, cu.col + o.dcol};
                if (!in_grid(n, cv)) continue;
                const std::uint32_t v = index_of(n, cv);
                if (done_[v] || !allowed(v)) continue;
                const double nd = d + w_->edge_cost(u, v, o.length);
                touch(v);
                if (nd < dist_[v]) {
                    dist_[v] = nd;
                    pred_[v] = u;
                    frontier.emplace(nd, v);
                } else if (nd == dist_[v] && u < pred_[v]) {
                    pred_[v] = u;
                }
            }
        }
    }

    double dist(std::uint32_t idx) const { return dist_[idx]; }
    std::uint32_t pred(std::uint32_t idx) const { return pred_[idx]; }
    bool settled(std::uint32_t idx) const { return done_[idx] != 0; }
    const WeightField& weights() const { return *w_; }

    /// Copies the (fully settled) state out; unsettled vertices read as +infinity.
    DistanceField snapshot(std::vector<Cell> sources) const {
        DistanceField out;
        out.n = w_->n();
        out.spacing = w_->spacing();
        out.sources = std::move(sources);
        out.dist.assign(dist_.size(), kInfinity);
        out.pred.assign(pred_.size(), kNoPredecessor);
        for (std::uint32_t idx : touched_) {
            if (done_[idx]) {
                out.dist[idx] = dist_[idx];
                out.pred[idx] = pred_[idx];
            }
        }
        out.weight_seed = w_->base_seed();
        out.xi = w_->xi();
        return out;
    }

private:
    void touch(std::uint32_t idx) {
        if (!mark_[idx]) {
            touched_.push_back(idx);
            mark_[idx] = 1;
        }
    }
    void reset() {
        for (std::uint32_t idx : touched_) {
            dist_[idx] = kInfinity;
            pred_[idx] = kNoPredecessor;
            done_[idx] = 0;
            mark_[idx] = 0;
        }
        touched_.clear();
    }

    const WeightField* w_;
    std::vector<double> dist_;
    std::vector<std::uint32_t> pred_;
    std::vector<std::uint8_t> done_;
    std::vector<std::uint8_t> mark_;
    std::vector<std::uint32_t> touched_;
};

namespace detail {

inline std::vector<DijkstraSeed> zero_seeds(int n, std::span<const Cell> sources) {
    if (sources.empty()) throw ConfigError("shortest path: source set is empty");
    std::vector<DijkstraSeed> seeds;
    seeds.reserve(sources.size());
    for (Cell s : sources) {
        if (!in_grid(n, s)) throw ConfigError("shortest path: source " + to_string(s) + " outside grid");
        seeds.push_back({index_of(n, s), 0.0});
    }
    return seeds;
}

inline constexpr auto kAllowAll = [](std::uint32_t) { return true; };
inline constexpr auto kNeverStop = [](std::uint32_t, double) { return true; };

}  // namespace detail

/// Exact single- or multi-source shortest-path distances over the whole grid.
inline DistanceField shortest_distances(const WeightField& w, std::span<const Cell> sources) {
    const auto seeds = detail::zero_seeds(w.n(), sources);
    ShortestPathEngine engine(w);
    engine.run(seeds, detail::kAllowAll, detail::kNeverStop);
    return engine.snapshot(std::vector<Cell>(sources.begin(), sources.end()));
}

inline DistanceField shortest_distances(const WeightField& w, Cell source) {
    return shortest_distances(w, std::span<const Cell>(&source, 1));
}

/// Single-pair distance; the search stops as soon as x is settled.
inline double distance(const WeightField& w, Cell z, Cell x) {
    if (!in_grid(w.n(), x)) throw ConfigError("distance: target " + to_string(x) + " outside grid");
    const auto seeds = detail::zero_seeds(w.n(), std::span<const Cell>(&z, 1));
    const std::uint32_t target = index_of(w.n(), x);
    ShortestPathEngine engine(w);
    engine.run(seeds, detail::kAllowAll, [target](std::uint32_t v, double) { return v != target; });
    return engine.dist(target);
}

/// Distance in the subgraph induced by `region`; +infinity when z and x are disconnected.
inline double internal_distance(const WeightField& w, const RegionMask& region, Cell z, Cell x) {
    if (region.n != w.n()) throw ConfigError("internal_distance: region size mismatch");
    if (!region.contains(z) || !region.contains(x))
        throw DomainError("internal_distance: endpoints must lie in the region");
    const std::uint32_t target = index_of(w.n(), x);
    const std::vector<DijkstraSeed> seeds{{index_of(w.n(), z), 0.0}};
    ShortestPathEngine engine(w);
    engine.run(seeds, [&region](std::uint32_t v) { return region[v]; },
               [target](std::uint32_t v, double) { return v != target; });
    return engine.settled(target) ? engine.dist(target) : kInfinity;
}

/// Discrete closed annulus about `center` with its two boundary cell sets.
struct AnnulusCells {
    RegionMask region;                 // inner boundary + open annulus + outer boundary
    std::vector<std::uint32_t> inner;  // |v| <= r1 with a neighbour beyond r1
    std::vector<std::uint32_t> outer;  // |v| >= r2 with a neighbour inside r2
};

/// Euclidean distance between cell centres in physical units.
inline double euclidean(Cell a, Cell b, double spacing) {
    return spacing * std::hypot(static_cast<double>(a.row - b.row), static_cast<double>(a.col - b.col));
}

inline AnnulusCells annulus_cells(const WeightField& w, Cell center, double r1, double r2) {
    const int n = w.n();
    const double h = w.spacing();
    if (!(r1 >= h) || !(r2 > r1))
        throw DomainError("annulus: need spacing <= r1 < r2");
    const int margin = static_cast<int>(std::ceil(r2 / h)) + 1;
    if (center.row - margin < 0 || center.col - margin < 0 || center.row + margin >= n ||
        center.col + margin >= n)
        throw DomainError("annulus: annulus of outer radius " + std::to_string(r2) + " about " +
                          to_string(center) + " exits the grid");

    AnnulusCells out;
    out.region = RegionMask::empty(n);
    out.region.center = center;
    out.region.radius = r2;
    const auto offsets = neighbours(w.connectivity());
    for (int r = center.row - margin; r <= center.row + margin; ++r) {
        for (int c = center.col - margin; c <= center.col + margin; ++c) {
            const Cell v{r, c};
            const double rho = euclidean(v, center, h);
            bool beyond_r1 = false, inside_r2 = false;
            for (const Offset& o : offsets) {
                const double rn = euclidean({r + o.drow, c + o.dcol}, center, h);
                beyond_r1 = beyond_r1 || rn > r1;
                inside_r2 = inside_r2 || rn < r2;
            }
            const std::uint32_t idx = index_of(n, v);
            if (rho <= r1) {
                if (beyond_r1) {
                    out.inner.push_back(idx);
                    out.region.bits[idx] = 1;
                }
            } else if (rho >= r2) {
                if (inside_r2) {
                    out.outer.push_back(idx);
                    out.region.bits[idx] = 1;
                }
            } else {
                out.region.bits[idx] = 1;
            }
        }
    }
    return out;
}

/// Least cost of a path inside the closed annulus from its inner to its outer boundary.
inline double annulus_across(const WeightField& w, Cell center, double r1, double r2) {
    const AnnulusCells ann = annulus_cells(w, center, r1, r2);
    std::vector<DijkstraSeed> seeds;
    for (std::uint32_t idx : ann.inner) seeds.push_back({idx, 0.0});
    std::vector<std::uint8_t> is_outer(ann.region.bits.size(), 0);
    for (std::uint32_t idx : ann.outer) is_outer[idx] = 1;
    ShortestPathEngine engine(w);
    double best = kInfinity;
    engine.run(seeds, [&](std::uint32_t v) { return ann.region[v]; },
               [&](std::uint32_t v, double d) {
                   if (is_outer[v]) {
                       best = d;
                       return false;
                   }
                   return true;
               });
    return best;
}

/// A closed lattice walk (last cell joins back to the first) and its length.
struct SeparatingCycle {
    double length = kInfinity;
    std::vector<Cell> cells;
};

/**
 * Shortest closed walk in `region` that winds once around `center`.
 *
 * The winding is measured against the ray from (center.row - 1/2, center.col - 1/4) in the
 * +col direction, which no lattice edge passes through. The region is unrolled into a
 * covering graph whose sheet index changes by +-1 on every ray-crossing edge; for each
 * cell next to the ray the shortest path from sheet 0 to sheet 1 of that cell closes a
 * winding cycle, and the minimum over those cells is the answer. The center cell is
 * never used.
 */
inline SeparatingCycle shortest_separating_cycle(const WeightField& w, const RegionMask& region,
                                                 Cell center) {
    const int n = w.n();
    if (region.n != n) throw ConfigError("separating cycle: region size mismatch");

    std::vector<std::uint32_t> cells;
    std::vector<std::int32_t> local(region.bits.size(), -1);
    const std::uint32_t center_idx = index_of(n, center);
    for (std::uint32_t i = 0; i < region.bits.size(); ++i) {
        if (region.bits[i] && i != center_idx) {
            local[i] = static_cast<std::int32_t>(cells.size());
            cells.push_back(i);
        }
    }
    constexpr int kSheets = 6;  // sheet offsets -2 .. 3
    constexpr int kBase = 2;
    const auto offsets = neighbours(w.connectivity());

    auto crossing = [&](Cell a, Cell b) -> int {
        const int colsum = a.col + b.col;
        if (colsum < 2 * center.col) return 0;
        if (a.row == center.row - 1 && b.row == center.row) return +1;
        if (a.row == center.row && b.row == center.row - 1) return -1;
        return 0;
    };

    std::vector<std::uint32_t> starts;
    for (std::uint32_t idx : cells) {
        const Cell a = cell_of(n, idx);
        if (a.row != center.row - 1) continue;
        for (const Offset& o : offsets) {
            const Cell b{a.row + o.drow, a.col + o.dcol};
            if (in_grid(n, b) && local[index_of(n, b)] >= 0 && crossing(a, b) == +1) {
                starts.push_back(idx);
                break;
            }
        }
    }

    const std::size_t nodes = cells.size() * kSheets;
    std::vector<double> dist(nodes);
    std::vector<std::int64_t> pred(nodes);
    SeparatingCycle best;

    for (std::uint32_t s : starts) {
        std::fill(dist.begin(), dist.end(), kInfinity);
        std::fill(pred.begin(), pred.end(), -1);
        const std::size_t src = static_cast<std::size_t>(local[s]) * kSheets + kBase;
        const std::size_t dst = src + 1;
        using Entry = std::pair<double, std::size_t>;
        std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> frontier;
        dist[src] = 0.0;
        frontier.emplace(0.0, src);
        while (!frontier.empty()) {
            const auto [d, node] = frontier.top();
            frontier.pop();
            if (d > dist[node]) continue;
            if (d >= best.length) break;
            if (node == dst) break;
            const std::uint32_t u = cells[node / kSheets];
            const int sheet = static_cast<int>(node % kSheets);
            const Cell cu = cell_of(n, u);
            for (const Offset& o : offsets) {
                const Cell cv{cu.row + o.drow, cu.col + o.dcol};
                if (!in_grid(n, cv)) continue;
                const std::uint32_t v = index_of(n, cv);
                if (local[v] < 0) continue;
                const int next_sheet = sheet + crossing(cu, cv);
                if (next_sheet < 0 || next_sheet >= kSheets) continue;
                const std::size_t next = static_cast<std::size_t>(local[v]) * kSheets + next_sheet;
                const double nd = d + w.edge_cost(u, v, o.length);
                if (nd < dist[next]) {
                    dist[next] = nd;
                    pred[next] = static_cast<std::int64_t>(node);
                    frontier.emplace(nd, next);
                }
            }
        }
        if (dist[dst] < best.length) {
            best.length = dist[dst];
            best.cells.clear();
            for (std::int64_t node = static_cast<std::int64_t>(dst); node != static_cast<std::int64_t>(src);
                 node = pred[static_cast<std::size_t>(node)])
                best.cells.push_back(cell_of(n, cells[static_cast<std::size_t>(node) / kSheets]));
            std::reverse(best.cells.begin(), best.cells.end());
        }
    }
    return best;
}

/// Length of the shortest loop inside the closed annulus separating its two boundaries.
inline SeparatingCycle annulus_around_cycle(const WeightField& w, Cell center, double r1, double r2) {
    if (r2 - r1 < 2.0 * w.spacing())
        throw DomainError("annulus_around: annulus thinner than two lattice spacings");
    const AnnulusCells ann = annulus_cells(w, center, r1, r2);
    SeparatingCycle cyc = shortest_separating_cycle(w, ann.region, center);
    if (!std::isfinite(cyc.length))
        throw DomainError("annulus_around: no separating cycle inside the annulus");
    return cyc;
}

inline double annulus_around(const WeightField& w, Cell center, double r1, double r2) {
    return annulus_around_cycle(w, center, r1, r2).length;
}

}  // namespace lfpp
