#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ios>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lfpp/balls.hpp"
#include "lfpp/core.hpp"
#include "lfpp/field.hpp"
#include "lfpp/geodesics.hpp"
#include "lfpp/metric.hpp"
#include "lfpp/region.hpp"

namespace lfpp {

/// Failure to read or write an artifact.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

class ByteWriter {
public:
    void bytes(const char* p, std::size_t k) { buf_.append(p, k); }
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    const std::string& data() const { return buf_; }

private:
    std::string buf_;
};

class ByteReader {
public:
    ByteReader(std::string data, std::string what) : buf_(std::move(data)), what_(std::move(what)) {}
    void need(std::size_t k) const {
        if (pos_ + k > buf_.size()) throw IoError(what_ + ": truncated file");
    }
    std::string bytes(std::size_t k) {
        need(k);
        std::string s = buf_.substr(pos_, k);
        pos_ += k;
        return s;
    }
    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(buf_[pos_++]);
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
        return v;
    }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    double f64() { return std::bit_cast<double>(u64()); }
    bool at_end() const { return pos_ == buf_.size(); }

private:
    std::string buf_;
    std::string what_;
    std::size_t pos_ = 0;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& data) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

inline void expect_magic(ByteReader& r, const char* magic, const std::string& what) {
    if (r.bytes(4) != std::string(magic, 4)) throw IoError(what + ": bad magic, expected " + magic);
}

inline constexpr std::uint8_t kTopologyBit = 0x80;

}  // namespace detail

// ---- field files ("LFP1") ----
// The high bit of the kind byte marks a zero-boundary field.

inline std::string encode_field(const ScalarField2D& f) {
    detail::ByteWriter w;
    w.bytes("LFP1", 4);
    w.u32(1);
    w.u32(static_cast<std::uint32_t>(f.n()));
    w.f64(f.spacing());
    std::uint8_t kind = static_cast<std::uint8_t>(f.kind());
    if (f.topology() == Topology::zero_boundary) kind |= detail::kTopologyBit;
    w.u8(kind);
    w.i64(f.seed());
    for (double v : f.values()) w.f64(v);
    return w.data();
}

inline ScalarField2D decode_field(std::string bytes) {
    detail::ByteReader r(std::move(bytes), "field file");
    detail::expect_magic(r, "LFP1", "field file");
    if (const std::uint32_t v = r.u32(); v != 1)
        throw IoError("field file: unsupported version " + std::to_string(v));
    const std::uint32_t n = r.u32();
    if (n == 0 || n > 65536) throw IoError("field file: bad side length " + std::to_string(n));
    const double spacing = r.f64();
    const std::uint8_t code = r.u8();
    const std::uint8_t kind = code & ~detail::kTopologyBit;
    if (kind > 2) throw IoError("field file: unknown kind code " + std::to_string(kind));
    const std::int64_t seed = r.i64();
    r.need(static_cast<std::size_t>(n) * n * 8);
    std::vector<double> values(static_cast<std::size_t>(n) * n);
    for (double& v : values) v = r.f64();
    if (!r.at_end()) throw IoError("field file: trailing bytes");
    return ScalarField2D(static_cast<int>(n), spacing, std::move(values), static_cast<FieldKind>(kind), seed,
                         (code & detail::kTopologyBit) ? Topology::zero_boundary : Topology::torus);
}

inline void save_field(const ScalarField2D& f, const std::filesystem::path& path) {
    detail::write_file(path, encode_field(f));
}

inline ScalarField2D load_field(const std::filesystem::path& path) {
    return decode_field(detail::read_file(path));
}

// ---- distance files ("LFD1") ----
// Only the grid, sources, distances and predecessors are stored.

inline std::string encode_distances(const DistanceField& d) {
    detail::ByteWriter w;
    w.bytes("LFD1", 4);
    w.u32(1);
    w.u32(static_cast<std::uint32_t>(d.n));
    w.f64(d.spacing);
    w.u32(static_cast<std::uint32_t>(d.sources.size()));
    for (Cell c : d.sources) {
        w.u32(static_cast<std::uint32_t>(c.row));
        w.u32(static_cast<std::uint32_t>(c.col));
    }
    for (double v : d.dist) w.f64(v);
    for (std::uint32_t p : d.pred) w.u32(p);
    return w.data();
}

inline DistanceField decode_distances(std::string bytes) {
    detail::ByteReader r(std::move(bytes), "distance file");
    detail::expect_magic(r, "LFD1", "distance file");
    if (const std::uint32_t v = r.u32(); v != 1)
        throw IoError("distance file: unsupported version " + std::to_string(v));
    DistanceField d;
    const std::uint32_t n = r.u32();
    if (n == 0 || n > 65536) throw IoError("distance file: bad side length " + std::to_string(n));
    d.n = static_cast<int>(n);
    d.spacing = r.f64();
    const std::uint32_t k = r.u32();
    r.need(static_cast<std::size_t>(k) * 8);
    for (std::uint32_t i = 0; i < k; ++i) {
        const int row = static_cast<int>(r.u32());
        const int col = static_cast<int>(r.u32());
        if (!in_grid(d.n, {row, col})) throw IoError("distance file: source outside grid");
        d.sources.push_back({row, col});
    }
    const std::size_t cells = static_cast<std::size_t>(n) * n;
    r.need(cells * 12);
    d.dist.resize(cells);
    for (double& v : d.dist) v = r.f64();
    d.pred.resize(cells);
    for (std::uint32_t& p : d.pred) {
        p = r.u32();
        if (p != kNoPredecessor && p >= cells) throw IoError("distance file: predecessor out of range");
    }
    if (!r.at_end()) throw IoError("distance file: trailing bytes");
    return d;
}

inline void save_distances(const DistanceField& d, const std::filesystem::path& path) {
    detail::write_file(path, encode_distances(d));
}

inline DistanceField load_distances(const std::filesystem::path& path) {
    return decode_distances(detail::read_file(path));
}

// ---- masks ----

/// "LFM1", u32 n, then alternating run lengths (u32) starting with a run of zeros.
inline std::string encode_mask(const RegionMask& m) {
    detail::ByteWriter w;
    w.bytes("LFM1", 4);
    w.u32(static_cast<std::uint32_t>(m.n));
    std::uint8_t cur = 0;
    std::uint32_t run = 0;
    for (std::uint8_t b : m.bits) {
        const std::uint8_t v = b ? 1 : 0;
        if (v != cur) {
            w.u32(run);
            cur = v;
            run = 0;
        }
        ++run;
    }
    w.u32(run);
    return w.data();
}

inline RegionMask decode_mask(std::string bytes) {
    detail::ByteReader r(std::move(bytes), "mask file");
    detail::expect_magic(r, "LFM1", "mask file");
    const std::uint32_t n = r.u32();
    if (n == 0 || n > 65536) throw IoError("mask file: bad side length " + std::to_string(n));
    RegionMask m = RegionMask::empty(static_cast<int>(n));
    std::size_t pos = 0;
    std::uint8_t cur = 0;
    while (!r.at_end()) {
        const std::uint32_t run = r.u32();
        if (pos + run > m.bits.size()) throw IoError("mask file: runs exceed n^2 cells");
        std::fill_n(m.bits.begin() + static_cast<std::ptrdiff_t>(pos), run, cur);
        pos += run;
        cur ^= 1;
    }
    if (pos != m.bits.size()) throw IoError("mask file: runs cover fewer than n^2 cells");
    return m;
}

inline void save_mask(const RegionMask& m, const std::filesystem::path& path) {
    detail::write_file(path, encode_mask(m));
}

inline RegionMask load_mask(const std::filesystem::path& path) { return decode_mask(detail::read_file(path)); }

/// Binary PGM, one byte per cell, row-major.
inline std::string encode_pgm(int n, const std::vector<std::uint8_t>& gray) {
    std::string out = "P5\n" + std::to_string(n) + " " + std::to_string(n) + "\n255\n";
    out.append(reinterpret_cast<const char*>(gray.data()), gray.size());
    return out;
}

/// Mask cells are 255, the rest 0.
inline void save_mask_pgm(const RegionMask& m, const std::filesystem::path& path) {
    std::vector<std::uint8_t> gray(m.bits.size());
    for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = m.bits[i] ? 255 : 0;
    detail::write_file(path, encode_pgm(m.n, gray));
}

/// Mask cells are drawn at 96, cells on the given paths at 255.
inline void save_overlay_pgm(const RegionMask& m, const std::vector<std::vector<Cell>>& paths,
                             const std::filesystem::path& path) {
    std::vector<std::uint8_t> gray(m.bits.size());
    for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = m.bits[i] ? 96 : 0;
    for (const auto& p : paths)
        for (Cell c : p) gray[index_of(m.n, c)] = 255;
    detail::write_file(path, encode_pgm(m.n, gray));
}

// ---- CSV ----

/// Shortest decimal form that reads back to the same double.
inline std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    for (int prec = 1; prec < 17; ++prec) {
        std::ostringstream t;
        t << std::setprecision(prec) << v;
        if (std::strtod(t.str().c_str(), nullptr) == v) return t.str();
    }
    return ss.str();
}

/// Buffered CSV table written in one piece.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) {
        for (std::size_t i = 0; i < header.size(); ++i) buf_ += (i ? "," : "") + header[i];
        buf_ += '\n';
    }

    template <class... T>
    void row(const T&... fields) {
        bool first = true;
        ((buf_ += (first ? "" : ","), buf_ += cell(fields), first = false), ...);
        buf_ += '\n';
    }

    const std::string& str() const { return buf_; }
    void save(const std::filesystem::path& path) const { detail::write_file(path, buf_); }

private:
    static std::string cell(double v) { return format_double(v); }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    template <std::integral I>
    static std::string cell(I v) {
        return std::to_string(v);
    }

    std::string buf_;
};

inline void save_loop_csv(const BoundaryLoop& loop, const std::filesystem::path& path) {
    CsvWriter csv({"index", "row", "col"});
    for (std::size_t i = 0; i < loop.cells.size(); ++i) csv.row(i, loop.cells[i].row, loop.cells[i].col);
    csv.save(path);
}

inline void save_tree_csv(const GeodesicTree& tree, int n, const std::filesystem::path& path) {
    CsvWriter csv({"parent_row", "parent_col", "child_row", "child_col"});
    for (const auto& [child, parent] : tree.parent) {
        const Cell c = cell_of(n, child), p = cell_of(n, parent);
        csv.row(p.row, p.col, c.row, c.col);
    }
    csv.save(path);
}

}  // namespace lfpp
