// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "lfpp/lfpp.hpp"
#include "oracles.hpp"

using namespace lfpp;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using Params = std::map<std::string, std::string>;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 4) {
    std::ostringstream s;
    s << std::setprecision(digits) << v;
    return s.str();
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw std::runtime_error("csv: no column " + name);
    }
    double num(std::size_t row, const std::string& name) const {
        return std::strtod(rows[row].at(column(name)).c_str(), nullptr);
    }
};

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream in(line);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(item);
    return out;
}

Table read_csv(const fs::path& p) {
    std::istringstream in(detail::read_file(p));
    Table t;
    std::string line;
    if (std::getline(in, line)) t.header = split_commas(line);
    while (std::getline(in, line))
        if (!line.empty()) t.rows.push_back(split_commas(line));
    return t;
}

// The in-process criteria keep their parameters in a plain key = value manifest.
void write_params(const fs::path& dir, const Params& p) {
    std::string text = "# acceptance manifest\n";
    for (const auto& [k, v] : p) text += k + " = " + v + "\n";
    detail::write_file(dir / "manifest.txt", text);
}

Params read_params(const fs::path& path) {
    std::istringstream in(detail::read_file(path));
    Params p;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        p[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
    }
    return p;
}

int geti(const Params& p, const char* k) { return std::stoi(p.at(k)); }
double getd(const Params& p, const char* k) { return std::strtod(p.at(k).c_str(), nullptr); }
std::int64_t getl(const Params& p, const char* k) { return std::stoll(p.at(k)); }

std::vector<double> as_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

// ---- criterion 1 ----

Outcome oracle_equivalence(const Params& p, const fs::path& dir) {
    const auto t0 = Clock::now();
    const int fields = geti(p, "fields"), n = geti(p, "n");
    const double xi = getd(p, "xi"), h = 1.0 / n;
    CsvWriter csv({"field", "seed", "max_distance_error", "max_geodesic_error"});
    double worst_d = 0.0, worst_g = 0.0;
    for (int f = 0; f < fields; ++f) {
        const std::int64_t seed = split_seed(getl(p, "seed"), static_cast<std::uint64_t>(f));
        const WeightField w = build_weights(sample_dgff(n, h, seed), xi);
        const auto D = oracle::floyd_warshall(n, h, as_vector(w.weights()), true);
        double ed = 0.0, eg = 0.0;
        for (int a = 0; a < n * n; ++a) {
            const DistanceField d = shortest_distances(w, cell_of(n, a));
            for (int b = 0; b < n * n; ++b) {
                ed = std::max(ed, std::abs(d.dist[b] - D[a][b]));
                const GeodesicPath g = extract_geodesic(d, cell_of(n, b));
                eg = std::max(eg, std::abs(path_length(w, g.cells) - d.dist[b]));
            }
        }
        csv.row(f, seed, ed, eg);
        worst_d = std::max(worst_d, ed);
        worst_g = std::max(worst_g, eg);
    }
    detail::write_file(dir / "oracle.csv", csv.str());
    write_params(dir, p);
    const double secs = seconds_since(t0);
    return {worst_d <= 1e-12 && worst_g <= 1e-9 && secs < 10.0,
            std::to_string(fields) + " fields " + std::to_string(n) + "x" + std::to_string(n) +
                ": max |Dijkstra - Floyd-Warshall| = " + fmt(worst_d) + " (<= 1e-12), max |geodesic - distance| = " +
                fmt(worst_g) + " (<= 1e-9), runtime " + fmt(secs, 3) + " s (< 10 s)"};
}

// ---- criterion 2 ----

Outcome degeneracy_and_covariance(const Params& p, const fs::path& dir) {
    const int fields = geti(p, "fields"), n = geti(p, "n"), sources = geti(p, "sources");
    const double xi = getd(p, "xi"), c = getd(p, "shift"), h = 1.0 / n;
    std::mt19937_64 rng(static_cast<std::uint64_t>(getl(p, "seed")));
    std::uniform_int_distribution<int> pick(0, n * n - 1);
    double chamfer_err = 0.0, weyl_err = 0.0;
    for (int f = 0; f < fields; ++f) {
        const ScalarField2D field = sample_dgff(n, h, split_seed(getl(p, "seed"), static_cast<std::uint64_t>(f)));
        const WeightField flat = build_weights(field, 0.0);
        const WeightField w = build_weights(field, xi);
        const WeightField shifted = build_weights(add_function(field, [c](Cell) { return c; }), xi);
        const double factor = std::exp(xi * c);
        for (int k = 0; k < sources; ++k) {
            const Cell z = cell_of(n, static_cast<std::uint32_t>(pick(rng)));
            const DistanceField d0 = shortest_distances(flat, z);
            const DistanceField d = shortest_distances(w, z), ds = shortest_distances(shifted, z);
            for (int i = 0; i < n * n; ++i) {
                const Cell x = cell_of(n, static_cast<std::uint32_t>(i));
                const double dr = std::abs(x.row - z.row), dc = std::abs(x.col - z.col);
                const double graph = h * (std::max(dr, dc) - std::min(dr, dc) + std::sqrt(2.0) * std::min(dr, dc));
                chamfer_err = std::max(chamfer_err, std::abs(d0.dist[i] - graph));
                if (d.dist[i] > 0.0) weyl_err = std::max(weyl_err, std::abs(ds.dist[i] / (factor * d.dist[i]) - 1.0));
            }
        }
    }
    const double cross = crossing_median(0.0, geti(p, "crossing_n"), 0.0, geti(p, "crossing_replicas"),
                                         getl(p, "seed"));
    CsvWriter csv({"check", "value"});
    csv.row("max_abs_error_xi0_vs_graph_distance", chamfer_err);
    csv.row("max_rel_error_weyl_shift", weyl_err);
    csv.row("crossing_median_xi0", cross);
    detail::write_file(dir / "degeneracy.csv", csv.str());
    write_params(dir, p);
    return {chamfer_err <= 1e-12 && weyl_err <= 1e-12 && std::abs(cross - 1.0) <= 1e-9,
            "xi=0 vs spacing-weighted graph distance " + fmt(chamfer_err) + " (<= 1e-12), Weyl shift relative error " +
                fmt(weyl_err) + " (<= 1e-12), crossing_median(xi=0) = " + fmt(cross, 17) + " (|.-1| <= 1e-9)"};
}

// ---- criterion 3 ----

Outcome metric_axioms(const Params& p, const fs::path& dir) {
    const int n = geti(p, "n"), seeds = geti(p, "seeds"), pool = geti(p, "pool"), triples = geti(p, "triples");
    const double xi = getd(p, "xi"), eps = getd(p, "eps"), h = 1.0 / n;
    CsvWriter csv({"field", "seed", "max_asymmetry", "max_triangle_violation", "locality_pairs",
                   "locality_mismatches"});
    double worst_sym = 0.0, worst_tri = 0.0;
    std::size_t mismatches = 0, pairs = 0;
    for (int f = 0; f < seeds; ++f) {
        const std::int64_t seed = split_seed(getl(p, "seed"), static_cast<std::uint64_t>(f));
        const WeightField w = build_weights(heat_mollify(sample_dgff(n, h, seed), eps), xi);
        std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
        std::uniform_int_distribution<int> cell(0, n * n - 1);
        std::set<int> chosen;
        while (static_cast<int>(chosen.size()) < pool) chosen.insert(cell(rng));
        const std::vector<int> pts(chosen.begin(), chosen.end());
        std::vector<DistanceField> from;
        for (int a : pts) from.push_back(shortest_distances(w, cell_of(n, a)));
        std::uniform_int_distribution<int> any(0, pool - 1);
        double sym = 0.0, tri = 0.0;
        for (int k = 0; k < triples; ++k) {
            const int a = any(rng), b = any(rng), c = any(rng);
            const double ab = from[a].dist[pts[b]], ba = from[b].dist[pts[a]];
            const double bc = from[b].dist[pts[c]], ac = from[a].dist[pts[c]];
            sym = std::max(sym, std::abs(ab - ba));
            tri = std::max(tri, ac - ab - bc);
        }

        // internal distances inside a disk must ignore everything outside it
        const Cell centre{n / 4 + cell(rng) % (n / 2), n / 4 + cell(rng) % (n / 2)};
        RegionMask region = RegionMask::empty(n);
        for (int i = 0; i < n * n; ++i)
            if (euclidean(cell_of(n, i), centre, h) <= 0.2) region.bits[i] = 1;
        std::vector<double> scrambled = as_vector(w.weights());
        std::uniform_real_distribution<double> junk(1e-3, 1e3);
        for (int i = 0; i < n * n; ++i)
            if (!region.bits[i]) scrambled[i] = junk(rng);
        const WeightField other = WeightField::from_weights(n, h, scrambled, w.connectivity(), xi, seed);
        const auto inside = region.cells();
        std::uniform_int_distribution<std::size_t> in_pick(0, inside.size() - 1);
        std::size_t bad = 0;
        for (int k = 0; k < 20; ++k) {
            const Cell a = inside[in_pick(rng)], b = inside[in_pick(rng)];
            bad += internal_distance(w, region, a, b) != internal_distance(other, region, a, b);
        }
        csv.row(f, seed, sym, std::max(tri, 0.0), 20, bad);
        worst_sym = std::max(worst_sym, sym);
        worst_tri = std::max(worst_tri, tri);
        mismatches += bad;
        pairs += 20;
    }
    detail::write_file(dir / "axioms.csv", csv.str());
    write_params(dir, p);
    return {worst_sym <= 1e-9 && worst_tri <= 1e-9 && mismatches == 0,
            std::to_string(seeds) + " fields n=" + std::to_string(n) + ", " + std::to_string(triples) +
                " triples each: max asymmetry " + fmt(worst_sym) + ", max triangle violation " +
                fmt(std::max(worst_tri, 0.0)) + " (<= 1e-9); locality " + std::to_string(pairs - mismatches) + "/" +
                std::to_string(pairs) + " bit-exact"};
}

// ---- experiment-driven criteria ----

ExperimentConfig base(Command cmd, int n, double eps, const fs::path& dir) {
    ExperimentConfig cfg;
    cfg.command = cmd;
    cfg.n = n;
    cfg.xi = 1.6;
    cfg.eps = eps;
    cfg.seed = 1;
    cfg.output_dir = dir.string();
    return cfg;
}

struct Timed {
    RunResult result;
    double seconds = 0.0;
};

Timed run_timed(const ExperimentConfig& cfg) {
    const auto t0 = Clock::now();
    Timed t;
    t.result = run(cfg, std::cout);
    t.seconds = seconds_since(t0);
    return t;
}

Outcome failed_run(const Timed& t) {
    return {false, "run exited with status " + std::to_string(t.result.status) + ": " + t.result.message};
}

Outcome jordan(const fs::path& dir) {
    auto cfg = base(Command::ball, 256, 0.02, dir);
    cfg.s = {{RadiusSpec::quantile, 0.3}, {RadiusSpec::quantile, 0.4}, {RadiusSpec::quantile, 0.5},
             {RadiusSpec::quantile, 0.6}, {RadiusSpec::quantile, 0.7}};
    cfg.t = {0.5};
    cfg.replicas = 10;
    const Timed t = run_timed(cfg);
    if (t.result.status != kExitOk) return failed_run(t);
    const Table tab = read_csv(dir / "jordan.csv");
    std::size_t ok = 0;
    for (std::size_t r = 0; r < tab.rows.size(); ++r) ok += tab.num(r, "jordan") == 1.0;
    const double rate = static_cast<double>(ok) / tab.rows.size();
    std::size_t masks = 0;
    for (const auto& e : fs::directory_iterator(dir)) masks += e.path().extension() == ".lfm" &&
                                                          e.path().filename().string().rfind("failure_", 0) == 0;
    return {rate >= 0.95 && t.seconds < 300.0,
            "n=256 eps=0.02: one simple closed loop in " + std::to_string(ok) + "/" + std::to_string(tab.rows.size()) +
                " configurations (" + fmt(rate, 3) + " >= 0.95), failure masks logged: " +
                std::to_string(masks) + ", runtime " + fmt(t.seconds, 3) + " s (< 300 s)"};
}

void jordan_finer_mollifier(const fs::path& dir) {
    auto cfg = base(Command::ball, 256, 0.01, dir);
    cfg.s = {{RadiusSpec::quantile, 0.3}, {RadiusSpec::quantile, 0.4}, {RadiusSpec::quantile, 0.5},
             {RadiusSpec::quantile, 0.6}, {RadiusSpec::quantile, 0.7}};
    cfg.replicas = 10;
    std::ostringstream quiet;
    if (run(cfg, quiet).status != kExitOk) return;
    const Table tab = read_csv(dir / "jordan.csv");
    std::size_t ok = 0;
    for (std::size_t r = 0; r < tab.rows.size(); ++r) ok += tab.num(r, "jordan") == 1.0;
    std::cout << "INFO criterion 4: at n=256 eps=0.01 the rate is " << ok << "/" << tab.rows.size() << std::endl;
}

Outcome compactness(const fs::path& dir) {
    auto cfg = base(Command::dims, 512, 0.01, dir);
    cfg.s = {{RadiusSpec::fraction, 0.8}};
    cfg.replicas = 10;
    const Timed t = run_timed(cfg);
    if (t.result.status != kExitOk) return failed_run(t);
    const Table tab = read_csv(dir / "dims.csv");
    double margin = 0.0, ball = 0.0, filled = 0.0;
    for (std::size_t r = 0; r < tab.rows.size(); ++r) {
        margin += tab.num(r, "margin");
        ball += tab.num(r, "ball_slope");
        filled += tab.num(r, "filled_slope");
    }
    const double R = static_cast<double>(tab.rows.size());
    margin /= R;
    return {margin > 0.2, "n=512 over " + fmt(R) + " seeds: mean covering slope of ball boundary " + fmt(ball / R) +
                              ", filled boundary " + fmt(filled / R) + ", margin " + fmt(margin) + " (> 0.2)"};
}

Outcome confluence(const fs::path& dir) {
    auto cfg = base(Command::confluence, 512, 0.01, dir);
    cfg.s = {{RadiusSpec::quantile, 0.25}};
    cfg.t = {0.5};
    cfg.target_stride = 20;
    cfg.replicas = 20;
    const Timed t = run_timed(cfg);
    if (t.result.status != kExitOk) return failed_run(t);
    const Table tab = read_csv(dir / "confluence.csv");
    std::size_t few = 0, positive = 0;
    double points = 0.0, targets = 0.0;
    for (std::size_t r = 0; r < tab.rows.size(); ++r) {
        few += tab.num(r, "confluence_points") <= 30 && tab.num(r, "targets") >= 100;
        positive += tab.num(r, "coalescence_radius") > 0.0;
        points += tab.num(r, "confluence_points");
        targets += tab.num(r, "targets");
    }
    const double R = static_cast<double>(tab.rows.size());
    return {few >= 0.9 * R && positive >= 0.9 * R && t.seconds < 900.0,
            "n=512 t=s/2 stride 20: (points <= 30 and targets >= 100) in " + std::to_string(few) + "/" + fmt(R) +
                ", coalescence > 0 in " + std::to_string(positive) + "/" + fmt(R) + " (each >= 90%); mean points " +
                fmt(points / R) + ", mean targets " + fmt(targets / R) + ", runtime " + fmt(t.seconds, 3) +
                " s (< 900 s)"};
}

Outcome q_at_cm_zero(const fs::path& dir) {
    auto cfg = base(Command::scaling, 1024, 0.0, dir);
    cfg.xi = 1.0 / std::sqrt(6.0);
    cfg.replicas = 21;
    const Timed t = run_timed(cfg);
    if (t.result.status != kExitOk) return failed_run(t);
    const Table tab = read_csv(dir / "q.csv");
    const double q = tab.num(0, "Q_hat"), cm = tab.num(0, "c_M_hat");
    const double target = 5.0 / std::sqrt(6.0);
    return {std::abs(q - target) <= 0.3 && std::abs(cm) <= 4.0 && t.seconds < 3600.0,
            "n=1024, eps 2/n..32/n, 21 replicas: Q_hat = " + fmt(q) + " +- " + fmt(tab.num(0, "Q_stderr"), 2) +
                " (|. - " + fmt(target, 5) + "| <= 0.3), c_M_hat = " + fmt(cm) + " (|.| <= 4), runtime " +
                fmt(t.seconds, 4) + " s (< 3600 s)"};
}

Outcome q_monotone(const fs::path& dir) {
    auto cfg = base(Command::scaling, 512, 0.0, dir);
    cfg.xi_list = {0.2, 0.4, 0.8, 1.6};
    cfg.replicas = 10;
    const Timed t = run_timed(cfg);
    if (t.result.status != kExitOk && t.result.status != kExitInconclusive) return failed_run(t);
    const Table tab = read_csv(dir / "q.csv");
    bool ok = true;
    std::string values;
    for (std::size_t i = 0; i < tab.rows.size(); ++i) {
        values += (i ? ", " : "") + fmt(tab.num(i, "Q_hat")) + " +- " + fmt(tab.num(i, "Q_stderr"), 2);
        if (i + 1 < tab.rows.size()) {
            const double se = std::hypot(tab.num(i, "Q_stderr"), tab.num(i + 1, "Q_stderr"));
            ok = ok && tab.num(i + 1, "Q_hat") <= tab.num(i, "Q_hat") + se;
        }
    }
    return {ok, "Q_hat over xi = 0.2, 0.4, 0.8, 1.6 (n=512): " + values +
                    (ok ? "; non-increasing within joint standard errors" : "; increase beyond joint standard error")};
}

Outcome xi_crit(const fs::path& dir) {
    auto cfg = base(Command::scaling, 512, 0.0, dir);
    cfg.xi_list = {0.30, 0.38, 0.46, 0.55};
    cfg.replicas = 10;
    const Timed t = run_timed(cfg);
    if (t.result.status != kExitOk && t.result.status != kExitInconclusive) return failed_run(t);
    const Table b = read_csv(dir / "bracket.csv");
    const bool conclusive = b.num(0, "conclusive") == 1.0;
    const double lo = b.num(0, "lo"), hi = b.num(0, "hi");
    if (!conclusive) return {false, "Q_hat - 2 does not change sign on {0.30, 0.38, 0.46, 0.55}"};
    return {lo >= 0.30 && hi <= 0.55,
            "sign change of Q_hat - 2 in [" + fmt(lo) + ", " + fmt(hi) + "], inside [0.30, 0.55]"};
}

std::vector<double> mean_ratios(const Table& tab, const std::vector<double>& eps_r) {
    std::vector<double> m(eps_r.size(), 0.0), c(eps_r.size(), 0.0);
    for (std::size_t r = 0; r < tab.rows.size(); ++r)
        for (std::size_t k = 0; k < eps_r.size(); ++k)
            if (tab.num(r, "eps_r") == eps_r[k]) {
                m[k] += tab.num(r, "ratio");
                c[k] += 1.0;
            }
    for (std::size_t k = 0; k < m.size(); ++k) m[k] /= c[k];
    return m;
}

ExperimentConfig annuli_config(const fs::path& dir) {
    auto cfg = base(Command::annuli, 512, 0.01, dir);
    cfg.alpha = 0.5;
    cfg.replicas = 30;
    return cfg;
}

Outcome hit_ball(const fs::path& dir) {
    const auto cfg = annuli_config(dir);
    const Timed t = run_timed(cfg);
    if (t.result.status != kExitOk) return failed_run(t);
    const auto m = mean_ratios(read_csv(dir / "annuli.csv"), cfg.eps_r);
    bool decreasing = true;
    std::string means;
    for (std::size_t k = 0; k < m.size(); ++k) {
        means += (k ? ", " : "") + fmt(m[k]);
        if (k > 0) decreasing = decreasing && m[k] < m[k - 1];
    }
    const Table beta = read_csv(dir / "beta.csv");
    const double b = beta.num(0, "beta_hat"), lo = beta.num(0, "lo90"), hi = beta.num(0, "hi90");
    return {decreasing && b > 0.0 && lo > 0.0,
            "mean around/across at eps = 1/8, 1/16, 1/32: " + means + (decreasing ? " (decreasing)" : " (not decreasing)") +
                "; beta_hat = " + fmt(b) + ", 90% interval [" + fmt(lo) + ", " + fmt(hi) + "]"};
}

void hit_ball_zero_field(const fs::path& dir) {
    auto cfg = annuli_config(dir);
    cfg.xi = 0.0;
    std::ostringstream quiet;
    if (run(cfg, quiet).status != kExitOk) return;
    const Table beta = read_csv(dir / "beta.csv");
    std::cout << "INFO criterion 10: the same estimator on the flat metric (xi = 0) gives beta_hat = "
              << fmt(beta.num(0, "beta_hat")) << std::endl;
}

Outcome separation(const fs::path& dir) {
    auto cfg = base(Command::ball, 512, 0.01, dir);
    cfg.s = {{RadiusSpec::fraction, 0.9}};
    cfg.t = {0.1, 0.2, 0.3, 0.4, 0.5};
    cfg.replicas = 10;
    const Timed t = run_timed(cfg);
    if (t.result.status != kExitOk) return failed_run(t);
    const Table tab = read_csv(dir / "separation.csv");
    const std::size_t R = static_cast<std::size_t>(cfg.replicas), G = cfg.t.size();
    std::vector<std::vector<double>> sep(R, std::vector<double>(G)), dt(R, std::vector<double>(G));
    for (std::size_t i = 0; i < tab.rows.size(); ++i) {
        sep[i / G][i % G] = tab.num(i, "separation");
        dt[i / G][i % G] = tab.num(i, "dt");
    }
    // per-gap means over the drawn seeds, zeros included; log-log least squares
    auto slope = [&](const std::vector<std::size_t>& pick) {
        std::vector<double> x, y;
        for (std::size_t g = 0; g < G; ++g) {
            double s = 0.0, d = 0.0;
            for (std::size_t r : pick) {
                s += sep[r][g];
                d += dt[r][g];
            }
            x.push_back(std::log(d / pick.size()));
            y.push_back(std::log(s / pick.size()));
        }
        return least_squares(x, y).slope;
    };
    std::vector<std::size_t> all(R);
    for (std::size_t r = 0; r < R; ++r) all[r] = r;
    const double b = slope(all);
    const std::size_t sizes[] = {R};
    const Interval ci = bootstrap_interval(
        sizes, [&](const std::vector<std::vector<std::size_t>>& d) { return slope(d[0]); }, 2000, 0.90, 11);
    std::size_t zeros = 0;
    for (const auto& row : sep)
        for (double v : row) zeros += v == 0.0;
    return {b > 0.0 && ci.lo > 0.0,
            "log separation vs log(s - t) over 5 gaps x " + std::to_string(R) + " seeds: slope " + fmt(b) +
                ", 90% bootstrap interval [" + fmt(ci.lo) + ", " + fmt(ci.hi) + "]; " + std::to_string(zeros) +
                " zero separations"};
}

// ---- reproducibility ----

struct Criterion {
    int id;
    std::function<Outcome(const fs::path&)> run;
    std::function<void(const fs::path&, const fs::path&)> rerun;
};

void rerun_experiment(const fs::path& from, const fs::path& to) {
    ExperimentConfig cfg = load_config(from / "manifest.txt");
    cfg.output_dir = to.string();
    std::ostringstream quiet;
    run(cfg, quiet);
}

std::set<std::string> csv_names(const fs::path& dir) {
    std::set<std::string> out;
    if (fs::exists(dir))
        for (const auto& e : fs::directory_iterator(dir))
            if (e.path().extension() == ".csv") out.insert(e.path().filename().string());
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lfpp acceptance criteria"};
    std::string out = "acceptance_runs";
    std::vector<int> only;
    app.add_option("--output-dir", out, "directory for every criterion's run");
    app.add_option("--only", only, "run just these criteria");
    CLI11_PARSE(app, argc, argv);
    const fs::path root(out);

    auto direct = [](Outcome (*fn)(const Params&, const fs::path&), Params p) {
        return Criterion{0, [fn, p](const fs::path& d) { return fn(p, d); },
                         [fn](const fs::path& from, const fs::path& to) { fn(read_params(from / "manifest.txt"), to); }};
    };
    auto experiment = [](Outcome (*fn)(const fs::path&)) { return Criterion{0, fn, rerun_experiment}; };

    std::vector<Criterion> criteria{
        direct(oracle_equivalence, {{"fields", "20"}, {"n", "8"}, {"xi", "1"}, {"seed", "1"}}),
        direct(degeneracy_and_covariance, {{"fields", "5"}, {"n", "32"}, {"sources", "5"}, {"xi", "1.6"},
                                           {"shift", "0.7"}, {"crossing_n", "64"}, {"crossing_replicas", "5"},
                                           {"seed", "1"}}),
        direct(metric_axioms, {{"n", "128"}, {"seeds", "10"}, {"pool", "40"}, {"triples", "1000"}, {"xi", "1.6"},
                               {"eps", "0.04"}, {"seed", "1"}}),
        experiment(jordan),
        experiment(compactness),
        experiment(confluence),
        experiment(q_at_cm_zero),
        experiment(q_monotone),
        experiment(xi_crit),
        experiment(hit_ball),
        experiment(separation),
    };
    for (std::size_t i = 0; i < criteria.size(); ++i) criteria[i].id = static_cast<int>(i) + 1;
    auto wanted = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };
    auto dir_of = [&](int id) { return root / ("c" + std::to_string(id)); };

    int failures = 0;
    auto report = [&](int id, const Outcome& o) {
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << o.detail << std::endl;
        failures += !o.pass;
    };

    std::vector<int> ran;
    for (const Criterion& c : criteria) {
        if (!wanted(c.id)) continue;
        const fs::path dir = dir_of(c.id);
        fs::remove_all(dir);
        fs::create_directories(dir);
        Outcome o;
        try {
            o = c.run(dir);
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        report(c.id, o);
        ran.push_back(c.id);
        if (c.id == 4) jordan_finer_mollifier(root / "c4_eps0.01");
        if (c.id == 10) hit_ball_zero_field(root / "c10_flat");
    }

    if (wanted(12)) {
        std::size_t files = 0;
        std::vector<std::string> problems;
        for (int id : ran) {
            const Criterion& c = criteria[id - 1];
            const fs::path from = dir_of(id), to = root / ("c" + std::to_string(id) + "_rerun");
            if (!fs::exists(from / "manifest.txt")) {
                problems.push_back("c" + std::to_string(id) + " has no manifest");
                continue;
            }
            fs::remove_all(to);
            try {
                c.rerun(from, to);
            } catch (const std::exception& e) {
                problems.push_back("c" + std::to_string(id) + " rerun threw: " + e.what());
                continue;
            }
            const auto a = csv_names(from), b = csv_names(to);
            if (a != b) problems.push_back("c" + std::to_string(id) + " rerun wrote a different set of CSV files");
            for (const std::string& name : a) {
                ++files;
                if (!b.count(name) || detail::read_file(from / name) != detail::read_file(to / name))
                    problems.push_back("c" + std::to_string(id) + "/" + name + " differs");
            }
        }
        std::string detail = std::to_string(ran.size()) + " criterion runs replayed from their manifests, " +
                             std::to_string(files) + " CSV files compared byte for byte";
        for (const auto& p : problems) detail += "; " + p;
        report(12, {!ran.empty() && problems.empty(), detail});
    }
    return failures == 0 ? 0 : 1;
}
