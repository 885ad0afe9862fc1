#pragma once

#include <numeric>

#include "eslab/common.hpp"

namespace eslab {

enum class Mode { Exact, Real };

inline const char* mode_name(Mode m) { return m == Mode::Exact ? "exact" : "real"; }

inline Mode mode_from_name(const std::string& s) {
    if (s == "exact") return Mode::Exact;
    if (s == "real") return Mode::Real;
    throw Error("unknown mode: " + s + " (expected exact|real)");
}

/// One periodic axis: physical extent `side`, `samples` uniform points,
/// spacing side/samples. Frequencies on the axis are integer multiples of
/// 1/side; a frequency xi is representable iff xi*side is an integer, and
/// its bin is (xi*side) mod samples.
struct Axis {
    double side = 1.0;
    int64_t samples = 1;
    double spacing() const { return side / double(samples); }
};

/// Sampling lattice for Q = [0,side]^dims or a mixed-extent cell.
/// Storage convention for fields: row-major, axis 0 slowest, last axis
/// fastest.
struct GridSpec {
    Mode mode = Mode::Real;
    int prime = 2;  // p of the exact-mode cyclic group
    std::vector<Axis> axes;

    GridSpec() = default;
    GridSpec(Mode m, std::vector<Axis> ax, int p = 2) : mode(m), prime(p), axes(std::move(ax)) {
        validate();
    }
    /// Square grid over [0, side]^dims with M samples per axis.
    static GridSpec square(Mode m, double side, int64_t samples_per_axis, int dims, int p = 2) {
        std::vector<Axis> ax(dims, Axis{side, samples_per_axis});
        return GridSpec(m, std::move(ax), p);
    }

    int dims() const { return int(axes.size()); }
    int64_t point_count() const {
        int64_t n = 1;
        for (const auto& a : axes) n *= a.samples;
        return n;
    }
    std::vector<int64_t> extents() const {
        std::vector<int64_t> e;
        for (const auto& a : axes) e.push_back(a.samples);
        return e;
    }
    /// Product of axis sides: |Q|.
    double volume() const {
        double v = 1.0;
        for (const auto& a : axes) v *= a.side;
        return v;
    }
    /// Volume of one sampling cell.
    double cell_volume() const {
        double v = 1.0;
        for (const auto& a : axes) v *= a.spacing();
        return v;
    }

    /// Signed frequency representative for a bin on one axis.
    int64_t signed_bin(int ax, int64_t k) const {
        int64_t m = axes[ax].samples;
        k %= m;
        if (k < 0) k += m;
        return (k <= m / 2) ? k : k - m;
    }
    /// Physical frequency of a bin (cycles per unit length).
    double bin_frequency(int ax, int64_t k) const { return double(signed_bin(ax, k)) / axes[ax].side; }

    /// Checks that the grid resolves a given frequency extent with the
    /// required oversampling (spacing at most 1/(4*extent)).
    void require_resolves(double finest_frequency_extent, double factor = 4.0) const {
        for (const auto& a : axes)
            require(double(a.samples) >= factor * a.side * finest_frequency_extent,
                    "grid too coarse for the requested frequency extent");
    }

    bool same_layout(const GridSpec& o) const {
        if (axes.size() != o.axes.size()) return false;
        for (std::size_t i = 0; i < axes.size(); ++i)
            if (axes[i].samples != o.axes[i].samples || axes[i].side != o.axes[i].side) return false;
        return o.mode == mode;
    }

  private:
    void validate() const {
        require(!axes.empty(), "grid needs at least one axis");
        for (const auto& a : axes) {
            require(a.samples > 0, "samples_per_axis must be positive");
            require(a.side > 0.0, "side_length must be positive");
        }
        if (mode == Mode::Exact) {
            require(prime >= 2, "exact mode needs a prime p >= 2");
            for (const auto& a : axes) {
                // every extent a power of p so aligned boxes are cosets
                int64_t s = a.samples;
                while (s % prime == 0) s /= prime;
                require(s == 1, "exact mode: samples per axis must be a power of p");
            }
        }
    }
};

/// Row-major index helpers (axis 0 slowest).
inline int64_t flat_index(const std::vector<int64_t>& ext, const std::vector<int64_t>& idx) {
    int64_t f = 0;
    for (std::size_t a = 0; a < ext.size(); ++a) f = f * ext[a] + idx[a];
    return f;
}
inline void unflatten(const std::vector<int64_t>& ext, int64_t f, std::vector<int64_t>& idx) {
    idx.resize(ext.size());
    for (int a = int(ext.size()) - 1; a >= 0; --a) {
        idx[a] = f % ext[a];
        f /= ext[a];
    }
}

}  // namespace eslab
