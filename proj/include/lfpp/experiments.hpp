#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lfpp/balls.hpp"
#include "lfpp/core.hpp"
#include "lfpp/field.hpp"
#include "lfpp/geodesics.hpp"
#include "lfpp/io.hpp"
#include "lfpp/metric.hpp"
#include "lfpp/parallel.hpp"
#include "lfpp/scaling.hpp"
#include "lfpp/stats.hpp"

namespace lfpp {

inline constexpr const char* kVersion = "1.0.0";

enum class Command { sample, ball, geodesics, confluence, scaling, dims, annuli };

inline constexpr std::pair<Command, const char*> kCommandNames[] = {
    {Command::sample, "sample"},         {Command::ball, "ball"},       {Command::geodesics, "geodesics"},
    {Command::confluence, "confluence"}, {Command::scaling, "scaling"}, {Command::dims, "dims"},
    {Command::annuli, "annuli"}};

inline std::string to_string(Command c) {
    for (const auto& [cmd, name] : kCommandNames)
        if (cmd == c) return name;
    return "?";
}

/// A ball radius: an absolute LFPP distance ("0.3"), a quantile of the distances from the
/// centre to the grid edge ("q0.25"), or a fraction of the smallest such distance ("f0.8").
struct RadiusSpec {
    enum Kind : std::uint8_t { absolute, quantile, fraction };
    Kind kind = quantile;
    double value = 0.25;

    bool operator==(const RadiusSpec&) const = default;
};

struct ExperimentConfig {
    Command command = Command::sample;
    int n = 256;
    double xi = 1.6;
    double eps = 0.01;  // 0 selects the raw lattice field
    std::int64_t seed = 1;
    std::vector<RadiusSpec> s{{RadiusSpec::quantile, 0.25}};
    std::vector<double> t{0.5};  // fractions of s
    int target_stride = 20;
    int replicas = 1;
    std::string output_dir = "out";
    Connectivity connectivity = Connectivity::eight;
    std::vector<double> xi_list;   // scaling sweep; empty means {xi}
    std::vector<double> eps_list;  // scaling sweep; empty means {2,4,8,16,32} / n
    double alpha = 0.5;
    std::vector<double> eps_r{0.125, 0.0625, 0.03125};
    double annulus_radius = 0.25;

    bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError(key + ": '" + v + "' is not a number");
    }
    if (used != v.size() || !std::isfinite(x)) throw ConfigError(key + ": '" + v + "' is not a finite number");
    return x;
}

inline long long parse_integer(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &used);
    } catch (const std::exception&) {
        throw ConfigError(key + ": '" + v + "' is not an integer");
    }
    if (used != v.size()) throw ConfigError(key + ": '" + v + "' is not an integer");
    return x;
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline std::vector<double> parse_reals(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const std::string& item : split_list(v)) out.push_back(parse_real(key, item));
    return out;
}

inline std::string join_reals(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
    return out;
}

inline std::string radius_label(const RadiusSpec& r) {
    switch (r.kind) {
        case RadiusSpec::quantile: return "q" + format_double(r.value);
        case RadiusSpec::fraction: return "f" + format_double(r.value);
        default: return format_double(r.value);
    }
}

inline void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key + ": " + what);
}

}  // namespace detail

inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "command", "n",        "xi",       "eps",   "seed",  "s",    "t",
        "target_stride", "replicas", "output_dir", "connectivity", "xi_list", "eps_list", "alpha",
        "eps_r",   "annulus_radius"};
    return keys;
}

/// Sets one field from its textual value; throws ConfigError naming the key.
inline void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& raw) {
    using namespace detail;
    const std::string v = trim(raw);
    if (key == "command") {
        for (const auto& [cmd, name] : kCommandNames)
            if (v == name) {
                cfg.command = cmd;
                return;
            }
        throw ConfigError("command: unknown command '" + v + "'");
    } else if (key == "n") {
        const long long n = parse_integer(key, v);
        require(n >= 8 && n <= 8192 && is_power_of_two(static_cast<int>(n)), key,
                "must be a power of two in [8, 8192]");
        cfg.n = static_cast<int>(n);
    } else if (key == "xi") {
        cfg.xi = parse_real(key, v);
        require(cfg.xi >= 0.0 && cfg.xi <= 10.0, key, "must lie in [0, 10]");
    } else if (key == "eps") {
        cfg.eps = parse_real(key, v);
        require(cfg.eps >= 0.0 && cfg.eps < 1.0, key, "must lie in [0, 1)");
    } else if (key == "seed") {
        cfg.seed = parse_integer(key, v);
    } else if (key == "s") {
        std::vector<RadiusSpec> specs;
        for (const std::string& item : split_list(v)) {
            if (item == "auto") {
                specs.push_back({RadiusSpec::quantile, 0.25});
            } else if (item.front() == 'q') {
                const double q = parse_real(key, item.substr(1));
                require(q > 0.0 && q < 1.0, key, "quantile must lie in (0, 1)");
                specs.push_back({RadiusSpec::quantile, q});
            } else if (item.front() == 'f') {
                const double f = parse_real(key, item.substr(1));
                require(f > 0.0 && f <= 1.0, key, "fraction must lie in (0, 1]");
                specs.push_back({RadiusSpec::fraction, f});
            } else {
                const double s = parse_real(key, item);
                require(s > 0.0, key, "radius must be positive");
                specs.push_back({RadiusSpec::absolute, s});
            }
        }
        require(!specs.empty(), key, "needs at least one radius");
        cfg.s = std::move(specs);
    } else if (key == "t") {
        auto t = parse_reals(key, v);
        require(!t.empty(), key, "needs at least one fraction");
        for (double x : t) require(x > 0.0 && x <= 1.0, key, "fractions of s must lie in (0, 1]");
        cfg.t = std::move(t);
    } else if (key == "target_stride" || key == "stride") {
        const long long k = parse_integer(key, v);
        require(k >= 1 && k <= 1000000, key, "must lie in [1, 1000000]");
        cfg.target_stride = static_cast<int>(k);
    } else if (key == "replicas") {
        const long long k = parse_integer(key, v);
        require(k >= 1 && k <= 100000, key, "must lie in [1, 100000]");
        cfg.replicas = static_cast<int>(k);
    } else if (key == "output_dir") {
        require(!v.empty(), key, "must not be empty");
        cfg.output_dir = v;
    } else if (key == "connectivity") {
        if (v == "4") cfg.connectivity = Connectivity::four;
        else if (v == "8") cfg.connectivity = Connectivity::eight;
        else throw ConfigError("connectivity: must be 4 or 8");
    } else if (key == "xi_list") {
        auto xs = parse_reals(key, v);
        for (double x : xs) require(x >= 0.0 && x <= 10.0, key, "values must lie in [0, 10]");
        require(std::is_sorted(xs.begin(), xs.end()), key, "must be sorted");
        cfg.xi_list = std::move(xs);
    } else if (key == "eps_list") {
        auto es = parse_reals(key, v);
        for (double e : es) require(e > 0.0 && e < 1.0, key, "values must lie in (0, 1)");
        cfg.eps_list = std::move(es);
    } else if (key == "alpha") {
        cfg.alpha = parse_real(key, v);
        require(cfg.alpha > 0.0 && cfg.alpha < 1.0, key, "must lie in (0, 1)");
    } else if (key == "eps_r") {
        auto es = parse_reals(key, v);
        require(es.size() >= 2, key, "needs at least two scales");
        for (double e : es) require(e > 0.0 && e < 1.0, key, "values must lie in (0, 1)");
        cfg.eps_r = std::move(es);
    } else if (key == "annulus_radius") {
        cfg.annulus_radius = parse_real(key, v);
        require(cfg.annulus_radius > 0.0 && cfg.annulus_radius <= 1.0, key, "must lie in (0, 1]");
    } else {
        throw ConfigError("unknown key '" + key + "'");
    }
}

/// key = value lines; '#' starts a comment. Errors carry the line number.
inline ExperimentConfig parse_config(const std::string& text, ExperimentConfig cfg = {}) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        try {
            set_config_value(cfg, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig cfg = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str(), std::move(cfg));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
    using namespace detail;
    std::string s_list;
    for (std::size_t i = 0; i < cfg.s.size(); ++i) s_list += (i ? "," : "") + radius_label(cfg.s[i]);
    std::ostringstream out;
    out << "command = " << to_string(cfg.command) << '\n'
        << "n = " << cfg.n << '\n'
        << "xi = " << format_double(cfg.xi) << '\n'
        << "eps = " << format_double(cfg.eps) << '\n'
        << "seed = " << cfg.seed << '\n'
        << "s = " << s_list << '\n'
        << "t = " << join_reals(cfg.t) << '\n'
        << "target_stride = " << cfg.target_stride << '\n'
        << "replicas = " << cfg.replicas << '\n'
        << "output_dir = " << cfg.output_dir << '\n'
        << "connectivity = " << (cfg.connectivity == Connectivity::four ? 4 : 8) << '\n'
        << "xi_list = " << join_reals(cfg.xi_list) << '\n'
        << "eps_list = " << join_reals(cfg.eps_list) << '\n'
        << "alpha = " << format_double(cfg.alpha) << '\n'
        << "eps_r = " << join_reals(cfg.eps_r) << '\n'
        << "annulus_radius = " << format_double(cfg.annulus_radius) << '\n';
    return out.str();
}

enum ExitStatus : int { kExitOk = 0, kExitConfig = 2, kExitRuntime = 3, kExitInconclusive = 4 };

struct RunResult {
    int status = kExitOk;
    std::vector<std::string> artifacts;  // file names relative to output_dir
    std::string message;
};

namespace detail {

/// Collects artifacts in memory; nothing touches the disk until commit().
class ArtifactSet {
public:
    void add(std::string name, std::string bytes) { files_.emplace_back(std::move(name), std::move(bytes)); }
    void csv(std::string name, const CsvWriter& w) { add(std::move(name), w.str()); }

    std::vector<std::string> commit(const std::filesystem::path& dir) const {
        std::vector<std::string> names;
        for (const auto& [name, bytes] : files_) {
            write_file(dir / name, bytes);
            names.push_back(name);
        }
        return names;
    }

private:
    std::vector<std::pair<std::string, std::string>> files_;
};

struct Replica {
    std::size_t index = 0;
    std::int64_t seed = 0;
    ScalarField2D field;
    WeightField weights;
};

inline Replica make_replica(const ExperimentConfig& cfg, std::size_t r) {
    const std::int64_t seed = split_seed(cfg.seed, r);
    const ScalarField2D raw = sample_dgff(cfg.n, 1.0 / cfg.n, seed, Topology::torus);
    ScalarField2D field = cfg.eps > 0.0 ? heat_mollify(raw, cfg.eps) : raw;
    WeightField w = build_weights(field, cfg.xi, cfg.connectivity);
    return {r, seed, std::move(field), std::move(w)};
}

inline Cell grid_center(int n) { return {n / 2, n / 2}; }

inline std::vector<double> edge_distances(const DistanceField& d) {
    std::vector<double> out;
    const int n = d.n;
    for (int i = 0; i < n; ++i) {
        out.push_back(d({0, i}));
        out.push_back(d({n - 1, i}));
        if (i > 0 && i < n - 1) {
            out.push_back(d({i, 0}));
            out.push_back(d({i, n - 1}));
        }
    }
    return out;
}

inline double resolve_radius(const RadiusSpec& spec, const DistanceField& d) {
    switch (spec.kind) {
        case RadiusSpec::quantile: return quantile(edge_distances(d), spec.value);
        case RadiusSpec::fraction: {
            const auto e = edge_distances(d);
            return spec.value * *std::min_element(e.begin(), e.end());
        }
        default: return spec.value;
    }
}

/// Traced filled-ball boundary cells that are 4-adjacent to the target side, every stride-th.
inline std::vector<Cell> boundary_targets(const RegionMask& filled, int stride) {
    const RegionMask bdy = boundary_cells(filled);
    const std::vector<BoundaryLoop> loops = boundary_trace(filled);
    std::vector<Cell> on_loop;
    std::set<Cell> seen;
    for (const BoundaryLoop& loop : loops)
        for (Cell c : loop.cells)
            if (bdy(c) && seen.insert(c).second) on_loop.push_back(c);
    std::vector<Cell> out;
    for (std::size_t i = 0; i < on_loop.size(); i += static_cast<std::size_t>(stride)) out.push_back(on_loop[i]);
    return out;
}

inline std::string field_pgm(const ScalarField2D& f) {
    const auto v = f.values();
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double span = *hi > *lo ? *hi - *lo : 1.0;
    std::vector<std::uint8_t> gray(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        gray[i] = static_cast<std::uint8_t>(std::lround(255.0 * (v[i] - *lo) / span));
    return encode_pgm(f.n(), gray);
}

inline std::string mask_pgm(const RegionMask& m) {
    std::vector<std::uint8_t> gray(m.bits.size());
    for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = m.bits[i] ? 255 : 0;
    return encode_pgm(m.n, gray);
}

/// Ball cells shaded by distance (darker near the centre), path cells at 255.
inline std::string render_ball(const DistanceField& d, double s, const std::vector<std::vector<Cell>>& paths) {
    std::vector<std::uint8_t> gray(d.dist.size(), 0);
    for (std::size_t i = 0; i < gray.size(); ++i)
        if (d.dist[i] <= s) gray[i] = static_cast<std::uint8_t>(40 + std::lround(160.0 * d.dist[i] / s));
    for (const auto& p : paths)
        for (Cell c : p) gray[index_of(d.n, c)] = 255;
    return encode_pgm(d.n, gray);
}

inline void require_single_xi(const ExperimentConfig& cfg) {
    if (!cfg.xi_list.empty()) throw ConfigError("xi_list: only the scaling command sweeps xi");
}

// ---- commands ----

inline void run_sample(const ExperimentConfig& cfg, ArtifactSet& out) {
    const ScalarField2D raw = sample_dgff(cfg.n, 1.0 / cfg.n, split_seed(cfg.seed, 0), Topology::torus);
    const ScalarField2D f = cfg.eps > 0.0 ? heat_mollify(raw, cfg.eps) : raw;
    const auto v = f.values();
    const double m = f.mean();
    double var = 0.0;
    for (double x : v) var += (x - m) * (x - m);
    var /= static_cast<double>(v.size());
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    CsvWriter csv({"n", "seed", "eps", "mean", "variance", "min", "max"});
    csv.row(cfg.n, f.seed(), cfg.eps, m, var, *lo, *hi);
    out.add("field.lfp", encode_field(f));
    out.add("field.pgm", field_pgm(f));
    out.csv("summary.csv", csv);
}

struct BallRecord {
    std::size_t spec = 0;
    double s = 0.0;
    std::size_t ball_cells = 0, filled_cells = 0, loops = 0;
    bool closed = false, simple = false;
    std::vector<double> separation;  // one per t fraction
    std::optional<RegionMask> failed_mask;
};

inline void run_ball(const ExperimentConfig& cfg, ArtifactSet& out) {
    require_single_xi(cfg);
    const std::size_t R = static_cast<std::size_t>(cfg.replicas);
    std::vector<std::int64_t> seeds(R);
    std::vector<std::vector<BallRecord>> records(R);
    std::optional<Replica> first;
    std::optional<DistanceField> first_d;
    parallel_for(R, [&](std::size_t r) {
        Replica rep = make_replica(cfg, r);
        seeds[r] = rep.seed;
        DistanceField d = shortest_distances(rep.weights, grid_center(cfg.n));
        for (std::size_t k = 0; k < cfg.s.size(); ++k) {
            BallRecord rec;
            rec.spec = k;
            rec.s = resolve_radius(cfg.s[k], d);
            const RegionMask ball = metric_ball(d, rec.s);
            const RegionMask filled = fill_ball(ball, std::nullopt);
            const auto loops = boundary_trace(filled);
            rec.ball_cells = ball.count();
            rec.filled_cells = filled.count();
            rec.loops = loops.size();
            rec.closed = std::all_of(loops.begin(), loops.end(), [](const auto& l) { return l.closed; });
            rec.simple = std::all_of(loops.begin(), loops.end(), [](const auto& l) { return l.simple; });
            if (!(rec.loops == 1 && rec.closed && rec.simple)) rec.failed_mask = filled;
            for (double frac : cfg.t) {
                const double t = frac * rec.s;
                rec.separation.push_back(t > 0.0 ? boundary_separation(d, std::nullopt, rec.s, t) : 0.0);
            }
            records[r].push_back(std::move(rec));
        }
        if (r == 0) {
            first_d = std::move(d);
            first = std::move(rep);
        }
    });

    CsvWriter jordan({"replica", "seed", "s_spec", "s", "ball_cells", "filled_cells", "loops", "closed", "simple",
                      "jordan"});
    CsvWriter sep({"replica", "seed", "s", "t", "dt", "separation"});
    for (std::size_t r = 0; r < R; ++r) {
        for (const BallRecord& rec : records[r]) {
            const bool jordan_ok = rec.loops == 1 && rec.closed && rec.simple;
            jordan.row(r, seeds[r], radius_label(cfg.s[rec.spec]), rec.s, rec.ball_cells, rec.filled_cells, rec.loops,
                       int(rec.closed), int(rec.simple), int(jordan_ok));
            for (std::size_t j = 0; j < cfg.t.size(); ++j)
                sep.row(r, seeds[r], rec.s, cfg.t[j] * rec.s, rec.s - cfg.t[j] * rec.s, rec.separation[j]);
            if (rec.failed_mask) {
                const std::string stem = "failure_r" + std::to_string(r) + "_s" + std::to_string(rec.spec);
                out.add(stem + ".lfm", encode_mask(*rec.failed_mask));
                out.add(stem + ".pgm", mask_pgm(*rec.failed_mask));
            }
        }
    }
    const double s0 = records[0][0].s;
    const RegionMask ball = metric_ball(*first_d, s0);
    const RegionMask filled = fill_ball(ball, std::nullopt);
    const auto loops = boundary_trace(filled);
    CsvWriter boundary({"index", "row", "col"});
    for (std::size_t i = 0; i < loops.front().cells.size(); ++i)
        boundary.row(i, loops.front().cells[i].row, loops.front().cells[i].col);
    out.add("field.lfp", encode_field(first->field));
    out.add("distances.lfd", encode_distances(*first_d));
    out.add("ball.lfm", encode_mask(ball));
    out.add("ball.pgm", mask_pgm(ball));
    out.add("filled.lfm", encode_mask(filled));
    out.add("filled.pgm", mask_pgm(filled));
    out.csv("boundary.csv", boundary);
    out.csv("jordan.csv", jordan);
    out.csv("separation.csv", sep);
}

inline void run_geodesics(const ExperimentConfig& cfg, ArtifactSet& out) {
    require_single_xi(cfg);
    const Replica rep = make_replica(cfg, 0);
    const DistanceField d = shortest_distances(rep.weights, grid_center(cfg.n));
    const double s = resolve_radius(cfg.s.front(), d);
    const RegionMask filled = fill_ball(metric_ball(d, s), std::nullopt);
    const std::vector<Cell> targets = boundary_targets(filled, cfg.target_stride);
    CsvWriter csv({"target", "row", "col", "length", "cells"});
    std::vector<std::vector<Cell>> paths;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        GeodesicPath p = extract_geodesic(d, targets[i]);
        csv.row(i, targets[i].row, targets[i].col, p.length, p.cells.size());
        paths.push_back(std::move(p.cells));
    }
    const GeodesicTree tree = geodesic_tree(d, targets);
    CsvWriter edges({"parent_row", "parent_col", "child_row", "child_col"});
    for (const auto& [child, parent] : tree.parent) {
        const Cell c = cell_of(cfg.n, child), p = cell_of(cfg.n, parent);
        edges.row(p.row, p.col, c.row, c.col);
    }
    std::vector<std::uint8_t> gray(filled.bits.size());
    for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = filled.bits[i] ? 96 : 0;
    for (const auto& p : paths)
        for (Cell c : p) gray[index_of(cfg.n, c)] = 255;
    out.add("field.lfp", encode_field(rep.field));
    out.add("distances.lfd", encode_distances(d));
    out.csv("geodesics.csv", csv);
    out.csv("tree.csv", edges);
    out.add("overlay.pgm", encode_pgm(cfg.n, gray));
}

struct ConfluenceRecord {
    double s = 0.0;
    std::size_t targets = 0;
    std::vector<std::size_t> points;  // one per t fraction
    double coalescence = 0.0;
};

inline void run_confluence(const ExperimentConfig& cfg, ArtifactSet& out) {
    require_single_xi(cfg);
    const std::size_t R = static_cast<std::size_t>(cfg.replicas);
    std::vector<std::int64_t> seeds(R);
    std::vector<ConfluenceRecord> records(R);
    std::optional<DistanceField> first_d;
    std::vector<Cell> first_targets;
    parallel_for(R, [&](std::size_t r) {
        const Replica rep = make_replica(cfg, r);
        seeds[r] = rep.seed;
        DistanceField d = shortest_distances(rep.weights, grid_center(cfg.n));
        ConfluenceRecord rec;
        rec.s = resolve_radius(cfg.s.front(), d);
        const RegionMask filled = fill_ball(metric_ball(d, rec.s), std::nullopt);
        std::vector<Cell> targets = boundary_targets(filled, cfg.target_stride);
        rec.targets = targets.size();
        for (double frac : cfg.t) rec.points.push_back(confluence_points(d, std::nullopt, frac * rec.s, rec.s, targets));
        if (targets.size() >= 2) {
            double nearest = kInfinity;
            for (Cell z : targets) nearest = std::min(nearest, d(z));
            rec.coalescence = coalescence_radius(d, nearest, targets);
        }
        records[r] = std::move(rec);
        if (r == 0) {
            first_d = std::move(d);
            first_targets = std::move(targets);
        }
    });
    CsvWriter csv({"replica", "seed", "s", "t", "targets", "confluence_points", "coalescence_radius"});
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t j = 0; j < cfg.t.size(); ++j)
            csv.row(r, seeds[r], records[r].s, cfg.t[j] * records[r].s, records[r].targets, records[r].points[j],
                    records[r].coalescence);
    const GeodesicTree tree = geodesic_tree(*first_d, first_targets);
    CsvWriter edges({"parent_row", "parent_col", "child_row", "child_col"});
    std::vector<std::vector<Cell>> paths;
    for (const auto& [child, parent] : tree.parent) {
        const Cell c = cell_of(cfg.n, child), p = cell_of(cfg.n, parent);
        edges.row(p.row, p.col, c.row, c.col);
        paths.push_back({c, p});
    }
    out.csv("confluence.csv", csv);
    out.csv("tree.csv", edges);
    out.add("render.pgm", render_ball(*first_d, records[0].s, paths));
}

inline std::vector<double> default_eps_list(int n) {
    std::vector<double> out;
    for (int k = 2; k <= 32; k *= 2) out.push_back(static_cast<double>(k) / n);
    return out;
}

/// Returns kExitConfig when xi = 0 blocks the Q fit, kExitInconclusive for an open bracket.
inline int run_scaling(const ExperimentConfig& cfg, ArtifactSet& out, std::string& message) {
    const std::vector<double> xs = cfg.xi_list.empty() ? std::vector<double>{cfg.xi} : cfg.xi_list;
    const std::vector<double> es = cfg.eps_list.empty() ? default_eps_list(cfg.n) : cfg.eps_list;
    if (cfg.replicas < 5) throw ConfigError("replicas: the scaling command needs at least 5");
    check_eps_sweep(es, cfg.n);
    const auto lengths = crossing_table(xs, es, cfg.n, cfg.replicas, cfg.seed, cfg.connectivity);

    CsvWriter crossings({"xi", "eps", "replica", "crossing_length"});
    CsvWriter medians({"xi", "eps", "a_hat", "replicas"});
    std::vector<std::vector<ScalingRow>> tables(xs.size());
    for (std::size_t x = 0; x < xs.size(); ++x)
        for (std::size_t e = 0; e < es.size(); ++e) {
            for (std::size_t r = 0; r < lengths[x][e].size(); ++r) crossings.row(xs[x], es[e], r, lengths[x][e][r]);
            const double a = median(lengths[x][e]);
            medians.row(xs[x], es[e], a, cfg.replicas);
            tables[x].push_back({es[e], a, cfg.replicas});
        }
    out.csv("crossings.csv", crossings);
    out.csv("medians.csv", medians);

    if (std::any_of(xs.begin(), xs.end(), [](double x) { return x == 0.0; })) {
        message = "xi = 0: Q is not identifiable from crossing medians (a_eps is identically 1); "
                  "crossing medians written, Q fit skipped";
        return kExitConfig;
    }
    CsvWriter q({"xi", "Q_hat", "Q_stderr", "c_M_hat", "slope"});
    std::vector<double> qs;
    for (std::size_t x = 0; x < xs.size(); ++x) {
        const ScalingEstimate est = estimate_Q_from_table(xs[x], tables[x]);
        q.row(est.xi, est.Q_hat, est.Q_stderr, est.c_M_hat, est.slope);
        qs.push_back(est.Q_hat);
    }
    out.csv("q.csv", q);
    if (xs.size() >= 4) {
        const XiBracket b = xi_crit_bracket_from(xs, qs);
        CsvWriter bracket({"conclusive", "lo", "hi"});
        bracket.row(int(b.conclusive), b.lo, b.hi);
        out.csv("bracket.csv", bracket);
        if (!b.conclusive) {
            message = "xi_crit bracket inconclusive: Q_hat - 2 does not change sign on the grid";
            return kExitInconclusive;
        }
    }
    return kExitOk;
}

inline std::vector<std::pair<double, std::size_t>> cover_counts(const std::vector<Cell>& set, GraphMetric& metric,
                                                                const std::vector<double>& radii) {
    std::vector<std::pair<double, std::size_t>> out;
    for (double r : radii) out.emplace_back(r, covering_number(set, metric, r));
    return out;
}

inline void run_dims(const ExperimentConfig& cfg, ArtifactSet& out) {
    require_single_xi(cfg);
    const std::size_t R = static_cast<std::size_t>(cfg.replicas);
    const char* names[] = {"ball_boundary", "filled_boundary", "net"};
    struct Record {
        std::int64_t seed = 0;
        double s = 0.0;
        std::vector<std::vector<std::pair<double, std::size_t>>> counts;
        std::vector<DimensionEstimate> fits;
    };
    std::vector<Record> records(R);
    parallel_for(R, [&](std::size_t r) {
        const Replica rep = make_replica(cfg, r);
        const DistanceField d = shortest_distances(rep.weights, grid_center(cfg.n));
        Record rec;
        rec.seed = rep.seed;
        rec.s = resolve_radius(cfg.s.front(), d);
        const RegionMask ball = metric_ball(d, rec.s);
        const RegionMask sets[] = {region_boundary(ball), boundary_cells(fill_ball(ball, std::nullopt)),
                                   metric_net(d, std::nullopt, rec.s)};
        std::vector<double> radii;
        for (int k = 1; k <= 7; ++k) radii.push_back(rec.s * std::ldexp(1.0, -k));
        GraphMetric metric(rep.weights);
        for (const RegionMask& set : sets) {
            rec.counts.push_back(cover_counts(set.cells(), metric, radii));
            rec.fits.push_back(dimension_fit(rec.counts.back()));
        }
        records[r] = std::move(rec);
    });
    CsvWriter counts({"replica", "seed", "set", "r", "count"});
    CsvWriter slopes({"replica", "seed", "s", "ball_slope", "filled_slope", "net_slope", "margin"});
    for (std::size_t r = 0; r < R; ++r) {
        const Record& rec = records[r];
        for (std::size_t k = 0; k < rec.counts.size(); ++k)
            for (const auto& [radius, c] : rec.counts[k]) counts.row(r, rec.seed, names[k], radius, c);
        slopes.row(r, rec.seed, rec.s, rec.fits[0].slope, rec.fits[1].slope, rec.fits[2].slope,
                   rec.fits[0].slope - rec.fits[1].slope);
    }
    out.csv("covering.csv", counts);
    out.csv("dims.csv", slopes);
}

inline void run_annuli(const ExperimentConfig& cfg, ArtifactSet& out) {
    require_single_xi(cfg);
    const std::size_t R = static_cast<std::size_t>(cfg.replicas);
    const double h = 1.0 / cfg.n;
    const double widest = std::pow(*std::max_element(cfg.eps_r.begin(), cfg.eps_r.end()), cfg.alpha) *
                          cfg.annulus_radius;
    struct Record {
        std::int64_t seed = 0;
        Cell z{};
        std::vector<double> around, across;
    };
    std::vector<Record> records(R);
    parallel_for(R, [&](std::size_t r) {
        const Replica rep = make_replica(cfg, r);
        const DistanceField d = shortest_distances(rep.weights, grid_center(cfg.n));
        const double s = resolve_radius(cfg.s.front(), d);
        const RegionMask bdy = boundary_cells(fill_ball(metric_ball(d, s), std::nullopt));
        const int margin = static_cast<int>(std::ceil(widest / h)) + 2;
        std::vector<Cell> candidates;
        for (Cell c : bdy.cells())
            if (c.row >= margin && c.col >= margin && c.row < cfg.n - margin && c.col < cfg.n - margin)
                candidates.push_back(c);
        if (candidates.empty())
            throw DomainError("annuli: no filled-ball boundary cell leaves room for the widest annulus");
        std::mt19937_64 rng(static_cast<std::uint64_t>(rep.seed));
        std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
        Record rec;
        rec.seed = rep.seed;
        rec.z = candidates[pick(rng)];
        for (double e : cfg.eps_r) {
            const double r1 = e * cfg.annulus_radius, r2 = std::pow(e, cfg.alpha) * cfg.annulus_radius;
            rec.around.push_back(annulus_around(rep.weights, rec.z, r1, r2));
            rec.across.push_back(annulus_across(rep.weights, rec.z, r1, r2));
        }
        records[r] = std::move(rec);
    });
    CsvWriter csv({"replica", "seed", "row", "col", "eps_r", "around", "across", "ratio"});
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t k = 0; k < cfg.eps_r.size(); ++k)
            csv.row(r, records[r].seed, records[r].z.row, records[r].z.col, cfg.eps_r[k], records[r].around[k],
                    records[r].across[k], records[r].around[k] / records[r].across[k]);

    // ratio ~ eps^beta: beta is the slope of log(mean ratio) against log(eps)
    auto beta_of = [&](const std::vector<std::size_t>& pick) {
        std::vector<double> x, y;
        for (std::size_t k = 0; k < cfg.eps_r.size(); ++k) {
            double m = 0.0;
            for (std::size_t i : pick) m += records[i].around[k] / records[i].across[k];
            x.push_back(std::log(cfg.eps_r[k]));
            y.push_back(std::log(m / static_cast<double>(pick.size())));
        }
        return least_squares(x, y).slope;
    };
    std::vector<std::size_t> all(R);
    for (std::size_t i = 0; i < R; ++i) all[i] = i;
    const double beta = beta_of(all);
    const std::size_t sizes[] = {R};
    const Interval ci = bootstrap_interval(
        sizes, [&](const std::vector<std::vector<std::size_t>>& draw) { return beta_of(draw[0]); }, 2000, 0.90,
        split_seed(cfg.seed, 0xB007));
    CsvWriter fit({"beta_hat", "lo90", "hi90", "samples"});
    fit.row(beta, ci.lo, ci.hi, R);
    out.csv("annuli.csv", csv);
    out.csv("beta.csv", fit);
}

}  // namespace detail

/// Runs one command, writes its artifacts and a manifest into cfg.output_dir.
inline RunResult run(const ExperimentConfig& cfg, std::ostream& log = std::cerr) {
    RunResult result;
    const auto start = std::chrono::steady_clock::now();
    detail::ArtifactSet out;
    try {
        switch (cfg.command) {
            case Command::sample: detail::run_sample(cfg, out); break;
            case Command::ball: detail::run_ball(cfg, out); break;
            case Command::geodesics: detail::run_geodesics(cfg, out); break;
            case Command::confluence: detail::run_confluence(cfg, out); break;
            case Command::scaling: result.status = detail::run_scaling(cfg, out, result.message); break;
            case Command::dims: detail::run_dims(cfg, out); break;
            case Command::annuli: detail::run_annuli(cfg, out); break;
        }
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.artifacts = out.commit(cfg.output_dir);
        std::ostringstream manifest;
        manifest << "# lfpp manifest; rerun with: lfpp --config manifest.txt\n"
                 << "# version = " << kVersion << '\n'
                 << "# wall_time_seconds = " << wall << '\n'
                 << "# status = " << result.status << '\n';
        for (const std::string& a : result.artifacts) manifest << "# artifact = " << a << '\n';
        manifest << serialize_config(cfg);
        detail::write_file(std::filesystem::path(cfg.output_dir) / "manifest.txt", manifest.str());
        result.artifacts.push_back("manifest.txt");
    } catch (const ConfigError& e) {
        result.status = kExitConfig;
        result.message = e.what();
    } catch (const std::exception& e) {
        result.status = kExitRuntime;
        result.message = e.what();
    }
    if (!result.message.empty()) log << "lfpp " << to_string(cfg.command) << ": " << result.message << '\n';
    return result;
}

}  // namespace lfpp
