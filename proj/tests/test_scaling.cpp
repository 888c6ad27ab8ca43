#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lfpp/scaling.hpp"
#include "oracles.hpp"

using namespace lfpp;

TEST(Crossing, UnitWeightsGiveSideLength) {
    for (int n : {8, 32, 64}) {
        const auto w = WeightField::from_weights(n, 1.0 / n, std::vector<double>(n * n, 1.0));
        EXPECT_NEAR(crossing_length(w), 1.0, 1e-12);
    }
    const auto f = sample_dgff(32, 1.0 / 32, 1);
    EXPECT_NEAR(crossing_length(build_weights(f, 0.0)), 1.0, 1e-12);
}

TEST(Crossing, MatchesFloydWarshallWithEndCaps) {
    const int n = 16;
    for (std::size_t rep = 0; rep < 5; ++rep) {
        const auto f = replica_field(n, 0.0, 42, rep);
        const auto w = build_weights(f, 0.8);
        std::vector<double> wv(w.weights().begin(), w.weights().end());
        const auto D = oracle::floyd_warshall(n, 1.0 / n, wv, true);
        double best = oracle::kInf;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                const int i = a * n, j = b * n + n - 1;
                best = std::min(best, D[i][j] + 0.5 / n * (wv[i] + wv[j]));
            }
        EXPECT_NEAR(crossing_length(w), best, 1e-12);
        EXPECT_NEAR(crossing_lengths(0.8, n, 0.0, 5, 42)[rep], best, 1e-12);
    }
}

TEST(Crossing, TableSharesReplicaFields) {
    const std::vector<double> xs{0.3, 0.6}, es{0.0, 0.125};
    const auto t = crossing_table(xs, es, 32, 3, 9);
    for (std::size_t x = 0; x < xs.size(); ++x)
        for (std::size_t e = 0; e < es.size(); ++e) {
            const auto direct = crossing_lengths(xs[x], 32, es[e], 3, 9);
            for (int r = 0; r < 3; ++r) EXPECT_EQ(t[x][e][r], direct[r]);
        }
    EXPECT_THROW(crossing_median(0.3, 32, 0.0, 4, 1), ConfigError);
    EXPECT_THROW(crossing_table(xs, std::vector<double>{-0.1}, 32, 3, 9), ConfigError);
}

TEST(Crossing, MedianIsDeterministic) {
    EXPECT_EQ(crossing_median(0.5, 32, 0.0625, 5, 3), crossing_median(0.5, 32, 0.0625, 5, 3));
}

TEST(Q, SyntheticPowerLawGivesPlantedValue) {
    // a_hat = eps^{1 - xi Q} with xi = 0.4, Q = 2 gives a_hat = eps^0.2
    std::vector<ScalingRow> rows;
    for (double e : {0.01, 0.02, 0.04, 0.08, 0.16}) rows.push_back({e, 3.0 * std::pow(e, 0.2), 11});
    const auto est = estimate_Q_from_table(0.4, rows);
    EXPECT_NEAR(est.Q_hat, 2.0, 1e-12);
    EXPECT_NEAR(est.slope, 0.2, 1e-12);
    EXPECT_NEAR(est.Q_stderr, 0.0, 1e-10);
    EXPECT_NEAR(est.c_M_hat, 1.0, 1e-10);
}

TEST(Q, PlantedExponentsAcrossXi) {
    for (double xi : {0.1, 0.35, 0.7}) {
        for (double q : {1.5, 2.3, 3.1}) {
            std::vector<ScalingRow> rows;
            for (int k = 0; k < 6; ++k) {
                const double e = 0.005 * std::pow(2.0, k);
                rows.push_back({e, 0.7 * std::pow(e, 1.0 - xi * q), 5});
            }
            EXPECT_NEAR(estimate_Q_from_table(xi, rows).Q_hat, q, 1e-12);
        }
    }
}

TEST(Q, RejectsUnidentifiableInput) {
    std::vector<ScalingRow> rows;
    for (double e : {0.01, 0.02, 0.04, 0.08}) rows.push_back({e, e, 5});
    EXPECT_THROW(estimate_Q_from_table(0.0, rows), ConfigError);
    EXPECT_THROW(estimate_Q_from_table(0.3, {rows.begin(), rows.begin() + 3}), ConfigError);
    rows[1].a_hat = 0.0;
    EXPECT_THROW(estimate_Q_from_table(0.3, rows), ConfigError);
    const std::vector<double> narrow{0.02, 0.04, 0.08, 0.12};
    EXPECT_THROW(check_eps_sweep(narrow, 256), ConfigError);
    const std::vector<double> fine{0.001, 0.004, 0.016, 0.064};
    EXPECT_THROW(check_eps_sweep(fine, 256), ConfigError);
    const std::vector<double> ok{0.01, 0.02, 0.05, 0.1};
    EXPECT_NO_THROW(check_eps_sweep(ok, 256));
    const std::vector<double> xi0{0.0};
    EXPECT_THROW(estimate_Q_sweep(xi0, ok, 256, 5, 1), ConfigError);
}

TEST(Q, CentralCharge) {
    EXPECT_EQ(central_charge(2.0), 1.0);
    EXPECT_EQ(central_charge(0.0), 25.0);
    EXPECT_NEAR(central_charge(std::sqrt(2.0 / 3.0) + std::sqrt(3.0 / 2.0)), 0.0, 1e-12);
}

TEST(Q, SmallLatticeEstimateIsFinite) {
    const std::vector<double> eps{4.0 / 64, 8.0 / 64, 16.0 / 64, 40.0 / 64};
    const auto est = estimate_Q(0.4, eps, 64, 5, 7);
    EXPECT_TRUE(std::isfinite(est.Q_hat));
    EXPECT_EQ(est.table.size(), 4u);
    for (const auto& row : est.table) EXPECT_GT(row.a_hat, 0.0);
}

TEST(Bracket, FindsFirstSignChange) {
    const std::vector<double> grid{0.3, 0.4, 0.5, 0.6};
    const auto b = xi_crit_bracket_from(grid, std::vector<double>{3.0, 2.4, 1.7, 1.1});
    EXPECT_TRUE(b.conclusive);
    EXPECT_EQ(b.lo, 0.4);
    EXPECT_EQ(b.hi, 0.5);
    const auto none = xi_crit_bracket_from(grid, std::vector<double>{3.0, 2.8, 2.5, 2.1});
    EXPECT_FALSE(none.conclusive);
    const auto exact = xi_crit_bracket_from(grid, std::vector<double>{3.0, 2.0, 1.5, 1.0});
    EXPECT_TRUE(exact.conclusive);
    EXPECT_EQ(exact.lo, 0.3);
    EXPECT_THROW(xi_crit_bracket_from(std::vector<double>{0.5, 0.4}, std::vector<double>{1, 2}), ConfigError);
}

TEST(Annuli, EventComparesAroundAndAcross) {
    const int n = 64;
    const auto w = WeightField::from_weights(n, 1.0 / n, std::vector<double>(n * n, 1.0));
    const auto ev = event_Ec(w, {32, 32}, 8.0 / n, 1.0);
    EXPECT_NEAR(ev.across, 8.0 / n, 1e-12);
    EXPECT_GT(ev.around, ev.across);
    EXPECT_FALSE(ev.occurred);
    EXPECT_TRUE(event_Ec(w, {32, 32}, 8.0 / n, 0.1).occurred);
    EXPECT_THROW(event_Ec(w, {32, 32}, 8.0 / n, 0.0), ConfigError);
}

TEST(Annuli, HitBallRatioInvariantUnderConstantShift) {
    const int n = 128;
    const auto f = heat_mollify(sample_dgff(n, 1.0 / n, 12), 0.03);
    const double xi = 1.2;
    const auto w = build_weights(f, xi);
    const auto ws = build_weights(add_function(f, [](Cell) { return 0.8; }), xi);
    for (double eps : {0.125, 0.0625}) {
        const double a = hit_ball_ratio(w, {64, 64}, eps, 0.35, 0.5);
        const double b = hit_ball_ratio(ws, {64, 64}, eps, 0.35, 0.5);
        EXPECT_NEAR(a, b, 1e-12 * a);
    }
    EXPECT_THROW(hit_ball_ratio(w, {64, 64}, 0.1, 0.35, 1.0), ConfigError);
    EXPECT_THROW(hit_ball_ratio(w, {64, 64}, 1.5, 0.35, 0.5), ConfigError);
}

TEST(Separation, DistanceTransformMatchesBruteForce) {
    const int n = 64;
    RegionMask a = RegionMask::empty(n), b = RegionMask::empty(n);
    std::mt19937_64 rng(5);
    for (int k = 0; k < 40; ++k) a.set({static_cast<int>(rng() % n), static_cast<int>(rng() % n)});
    for (int k = 0; k < 25; ++k) b.set({static_cast<int>(rng() % n), static_cast<int>(rng() % n)});
    const auto dt = squared_distance_transform(b);
    double best = oracle::kInf;
    for (int i = 0; i < n * n; ++i) {
        double m = oracle::kInf;
        for (Cell q : b.cells()) {
            const double dr = cell_of(n, i).row - q.row, dc = cell_of(n, i).col - q.col;
            m = std::min(m, dr * dr + dc * dc);
        }
        ASSERT_EQ(dt[i], m);
        if (a[i]) best = std::min(best, m);
    }
    EXPECT_NEAR(set_separation(a, b, 0.5), 0.5 * std::sqrt(best), 1e-15);
    EXPECT_THROW(set_separation(a, RegionMask::empty(n), 1.0), DomainError);
}

TEST(Separation, NestedSquares) {
    const int n = 32;
    RegionMask outer = RegionMask::empty(n), inner = RegionMask::empty(n);
    for (int k = 4; k <= 27; ++k) {
        outer.set({4, k});
        outer.set({27, k});
        outer.set({k, 4});
        outer.set({k, 27});
    }
    for (int k = 7; k <= 24; ++k) {
        inner.set({7, k});
        inner.set({24, k});
        inner.set({k, 7});
        inner.set({k, 24});
    }
    EXPECT_NEAR(set_separation(inner, outer, 0.25), 3 * 0.25, 1e-15);
}

TEST(Separation, FilledBoundariesOfNestedBalls) {
    const int n = 64;
    const auto w = WeightField::from_weights(n, 1.0 / n, std::vector<double>(n * n, 1.0));
    const auto d = shortest_distances(w, Cell{32, 32});
    // zero field: balls are octagons, boundaries sit 8 cells apart along the axes
    EXPECT_NEAR(boundary_separation(d, std::nullopt, 20.0 / n, 12.0 / n), 8.0 / n, 1.5 / n);
    EXPECT_EQ(boundary_separation(d, std::nullopt, 20.0 / n, 20.0 / n), 0.0);
    EXPECT_THROW(boundary_separation(d, std::nullopt, 0.1, 0.2), ConfigError);
}

TEST(ThickPoints, ThresholdAndCount) {
    const int n = 128;
    const double eps = 0.02;
    const auto f = heat_mollify(sample_dgff(n, 1.0 / n, 3), eps);
    const auto rep = thick_points(f, eps, 0.5);
    std::size_t want = 0;
    for (double v : f.values()) want += v >= 0.5 * std::log(1 / eps);
    EXPECT_EQ(rep.count, want);
    EXPECT_EQ(rep.cells.size(), want);
    EXPECT_NEAR(rep.threshold, 0.5 * std::log(50.0), 1e-12);
    EXPECT_LE(thick_points(f, eps, 1.0).count, rep.count);
    EXPECT_THROW(thick_points(sample_dgff(n, 1.0 / n, 3), eps, 0.5), ConfigError);
    EXPECT_THROW(thick_points(f, eps, -1.0), ConfigError);
}
