#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "lfpp/core.hpp"

namespace lfpp {

enum class MaskKind : std::uint8_t { ball, filled_ball, net, custom };

/// Boolean subset of the n x n lattice plus the provenance of how it was made.
struct RegionMask {
    int n = 0;
    std::vector<std::uint8_t> bits;
    MaskKind kind = MaskKind::custom;
    Cell center{};
    std::optional<Cell> target;  // nullopt encodes the point at infinity
    double radius = 0.0;

    static RegionMask empty(int n) {
        RegionMask m;
        m.n = n;
        m.bits.assign(static_cast<std::size_t>(n) * n, 0);
        return m;
    }

    static RegionMask full(int n) {
        RegionMask m = empty(n);
        std::fill(m.bits.begin(), m.bits.end(), std::uint8_t{1});
        return m;
    }

    bool operator()(Cell c) const { return bits[index_of(n, c)] != 0; }
    bool operator[](std::uint32_t idx) const { return bits[idx] != 0; }

    /// Out-of-grid cells count as outside the region.
    bool contains(Cell c) const { return in_grid(n, c) && (*this)(c); }

    void set(Cell c, bool on = true) { bits[index_of(n, c)] = on ? 1 : 0; }

    std::size_t count() const {
        return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
    }

    std::vector<Cell> cells() const {
        std::vector<Cell> out;
        for (std::uint32_t i = 0; i < bits.size(); ++i)
            if (bits[i]) out.push_back(cell_of(n, i));
        return out;
    }

    /// Same lattice subset; provenance is ignored.
    bool same_cells(const RegionMask& other) const { return n == other.n && bits == other.bits; }

    /// Every cell of this mask is also in `other`.
    bool subset_of(const RegionMask& other) const {
        if (n != other.n) return false;
        for (std::size_t i = 0; i < bits.size(); ++i)
            if (bits[i] && !other.bits[i]) return false;
        return true;
    }
};

}  // namespace lfpp
