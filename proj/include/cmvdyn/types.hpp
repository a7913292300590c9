#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace cmvdyn {

using Complex = std::complex<double>;
using Index = std::int64_t;

inline constexpr Index index_min = std::numeric_limits<Index>::min() / 4;
inline constexpr Index index_max = std::numeric_limits<Index>::max() / 4;

/// Half-open interval [lo, hi) of lattice indices.
struct Window {
    Index lo = 0;
    Index hi = 0;

    Index size() const noexcept { return hi > lo ? hi - lo : 0; }
    bool contains(Index n) const noexcept { return n >= lo && n < hi; }
    bool contains(const Window& w) const noexcept { return w.lo >= lo && w.hi <= hi; }
    bool bounded_below() const noexcept { return lo > index_min; }
    bool bounded_above() const noexcept { return hi < index_max; }

    friend bool operator==(const Window&, const Window&) = default;
};

inline constexpr Window whole_line{index_min, index_max};
inline constexpr Window half_line{0, index_max};

inline Window intersect(const Window& a, const Window& b) noexcept {
    return {a.lo > b.lo ? a.lo : b.lo, a.hi < b.hi ? a.hi : b.hi};
}

/// Finitely supported vector on the lattice: amplitudes[i] sits at offset + i.
struct State {
    Index offset = 0;
    std::vector<Complex> amplitudes;

    static State basis(Index n, Complex value = 1.0) { return State{n, {value}}; }

    bool empty() const noexcept { return amplitudes.empty(); }
    Index first() const noexcept { return offset; }
    Index end() const noexcept { return offset + static_cast<Index>(amplitudes.size()); }
    Window support() const noexcept { return {first(), end()}; }

    Complex at(Index n) const noexcept {
        if (n < offset || n >= end()) return {0.0, 0.0};
        return amplitudes[static_cast<std::size_t>(n - offset)];
    }

    double norm_squared() const noexcept {
        double s = 0.0;
        for (const auto& a : amplitudes) s += std::norm(a);
        return s;
    }
    double norm() const noexcept;

    /// Drops exact zeros at both ends; the stored range is then the exact support hull.
    void trim();
};

/// Inner product <a, b>, conjugate-linear in the first slot.
Complex inner(const State& a, const State& b) noexcept;

}  // namespace cmvdyn
