#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lfpp {

/// Lattice point addressed as (row, col). Row-major index is row * n + col.
struct Cell {
    int row = 0;
    int col = 0;

    friend constexpr auto operator<=>(const Cell&, const Cell&) = default;
};

inline std::string to_string(Cell c) {
    return "(" + std::to_string(c.row) + "," + std::to_string(c.col) + ")";
}

enum class Connectivity : std::uint8_t { four, eight };

/// Invalid parameters or configuration (bad n, eps <= 0, empty source set, ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Geometry or reachability violations (circle leaves the grid, unreachable target, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Numeric overflow, e.g. exp(xi * h) not representable.
class RangeError : public std::range_error {
public:
    using std::range_error::range_error;
};

constexpr std::uint32_t kNoPredecessor = 0xFFFFFFFFu;

inline constexpr bool in_grid(int n, Cell c) {
    return c.row >= 0 && c.col >= 0 && c.row < n && c.col < n;
}

inline constexpr std::uint32_t index_of(int n, Cell c) {
    return static_cast<std::uint32_t>(c.row) * static_cast<std::uint32_t>(n) +
           static_cast<std::uint32_t>(c.col);
}

inline constexpr Cell cell_of(int n, std::uint32_t idx) {
    return Cell{static_cast<int>(idx / static_cast<std::uint32_t>(n)),
                static_cast<int>(idx % static_cast<std::uint32_t>(n))};
}

struct Offset {
    int drow;
    int dcol;
    double length;  // in lattice units: 1 or sqrt(2)
};

inline constexpr double kSqrt2 = 1.41421356237309504880;

// Neighbour order is fixed; Dijkstra tie-breaking does not depend on it.
inline constexpr Offset kOffsets4[4] = {{-1, 0, 1.0}, {0, -1, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}};
inline constexpr Offset kOffsets8[8] = {{-1, -1, kSqrt2}, {-1, 0, 1.0}, {-1, 1, kSqrt2},
                                        {0, -1, 1.0},     {0, 1, 1.0},  {1, -1, kSqrt2},
                                        {1, 0, 1.0},      {1, 1, kSqrt2}};

struct OffsetRange {
    const Offset* first;
    const Offset* last;
    const Offset* begin() const { return first; }
    const Offset* end() const { return last; }
};

inline constexpr OffsetRange neighbours(Connectivity conn) {
    return conn == Connectivity::four ? OffsetRange{kOffsets4, kOffsets4 + 4}
                                      : OffsetRange{kOffsets8, kOffsets8 + 8};
}

/// SplitMix64 finaliser; also the seed-splitting rule seed_i = split_seed(master, i).
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline constexpr std::int64_t split_seed(std::int64_t master, std::uint64_t stream) {
    return static_cast<std::int64_t>(mix64(static_cast<std::uint64_t>(master) ^ mix64(stream)));
}

inline constexpr bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace lfpp
