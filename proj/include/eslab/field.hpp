#pragma once

#include <functional>

#include "eslab/fft.hpp"
#include "eslab/grid.hpp"

namespace eslab {

/// Complex amplitudes sampled on a grid. Immutable by convention after
/// construction; operations return new fields.
struct ComplexField {
    GridSpec grid;
    std::vector<cplx> v;

    ComplexField() = default;
    explicit ComplexField(GridSpec g) : grid(std::move(g)), v(grid.point_count()) {}
    ComplexField(GridSpec g, std::vector<cplx> data) : grid(std::move(g)), v(std::move(data)) {
        require(int64_t(v.size()) == grid.point_count(), "sample count does not match grid");
    }
    int64_t size() const { return int64_t(v.size()); }
};

struct RealField {
    GridSpec grid;
    std::vector<double> v;

    RealField() = default;
    explicit RealField(GridSpec g) : grid(std::move(g)), v(grid.point_count()) {}
    int64_t size() const { return int64_t(v.size()); }
};

/// Subset of grid points (houses the Omega/L/Y/U masks).
struct RegionMask {
    GridSpec grid;
    std::vector<std::uint8_t> m;

    RegionMask() = default;
    explicit RegionMask(GridSpec g, bool fill = false)
        : grid(std::move(g)), m(grid.point_count(), fill ? 1 : 0) {}
    int64_t count() const {
        int64_t c = 0;
        for (auto b : m) c += b;
        return c;
    }
    static RegionMask full(const GridSpec& g) { return RegionMask(g, true); }
};

inline double l2_norm(const ComplexField& f) {
    Kahan s;
    for (const cplx& z : f.v) s.add(std::norm(z));
    return std::sqrt(s.value());
}

/// Unitary DFT: forward uses the e(-k.x) kernel and both directions are
/// scaled by point_count^{-1/2}, so dft_inverse(dft_forward(f)) == f and
/// Parseval holds exactly.
inline ComplexField dft_forward(const ComplexField& f) {
    ComplexField out = f;
    fft_nd(out.v.data(), out.grid.extents(), -1);
    double s = 1.0 / std::sqrt(double(out.grid.point_count()));
    for (cplx& z : out.v) z *= s;
    return out;
}

inline ComplexField dft_inverse(const ComplexField& f) {
    ComplexField out = f;
    fft_nd(out.v.data(), out.grid.extents(), +1);
    double s = 1.0 / std::sqrt(double(out.grid.point_count()));
    for (cplx& z : out.v) z *= s;
    return out;
}

enum class AvgNorm { ByDomain, ByRegion };

/// Averaged L^p norm over `region`:
///   ByDomain: ((1/|Q|) * sum_{x in region} |f(x)|^p * cellvol)^{1/p}
///   ByRegion: the same with 1/|region| in place of 1/|Q|.
template <class Field>
double lp_avg_norm(const Field& f, double p, const RegionMask* region = nullptr,
                   AvgNorm norm = AvgNorm::ByDomain) {
    require(p >= 1.0, "lp_avg_norm needs p >= 1");
    if (region) require(region->grid.same_layout(f.grid), "region/grid mismatch");
    Kahan s;
    int64_t n = f.size(), inside = 0;
    for (int64_t i = 0; i < n; ++i) {
        if (region && !region->m[i]) continue;
        ++inside;
        double a = std::abs(f.v[i]);
        s.add(p == 2.0 ? a * a : std::pow(a, p));
    }
    if (region) require(inside > 0, "lp_avg_norm over an empty region");
    double denom = norm == AvgNorm::ByDomain ? f.grid.volume() : double(inside) * f.grid.cell_volume();
    return std::pow(s.value() * f.grid.cell_volume() / denom, 1.0 / p);
}

/// Plain (non averaged) L^p integral norm: (sum |f|^p cellvol)^{1/p}.
template <class Field>
double lp_norm(const Field& f, double p, const RegionMask* region = nullptr) {
    Kahan s;
    int64_t n = f.size();
    for (int64_t i = 0; i < n; ++i) {
        if (region && !region->m[i]) continue;
        double a = std::abs(f.v[i]);
        s.add(p == 2.0 ? a * a : std::pow(a, p));
    }
    return std::pow(s.value() * f.grid.cell_volume(), 1.0 / p);
}

template <class Field>
double linf_norm(const Field& f, const RegionMask* region = nullptr) {
    double m = 0.0;
    for (int64_t i = 0; i < f.size(); ++i) {
        if (region && !region->m[i]) continue;
        m = std::max(m, std::abs(f.v[i]));
    }
    return m;
}

/// Applies a frequency-side multiplier. `symbol(bins)` receives the raw
/// bin indices of the current frequency point.
inline ComplexField apply_multiplier(const ComplexField& f,
                                     const std::function<double(const std::vector<int64_t>&)>& symbol) {
    ComplexField hat = dft_forward(f);
    auto ext = hat.grid.extents();
    std::vector<int64_t> idx(ext.size(), 0);
    for (int64_t i = 0; i < hat.size(); ++i) {
        double s = symbol(idx);
        if (s != 1.0) hat.v[i] *= s;
        // odometer increment, last axis fastest
        for (int a = int(ext.size()) - 1; a >= 0; --a) {
            if (++idx[a] < ext[a]) break;
            idx[a] = 0;
        }
    }
    return dft_inverse(hat);
}

/// Raised-cosine low-pass symbol: 1 on |xi| <= c, 0 beyond 2c.
inline double raised_cosine(double r, double c) {
    if (r <= c) return 1.0;
    if (r >= 2.0 * c) return 0.0;
    double u = std::cos(0.25 * two_pi * (r - c) / c);  // cos(pi/2 * t), t in (0,1)
    return u * u;
}

/// Low-pass at physical frequency radius `cutoff`.
///  - Exact mode: sharp indicator of the subgroup comb, per axis
///    bin_k ≡ 0 (mod 1/cutoff); 1/cutoff must be a power of p. The dual
///    object is averaging over cosets of the dual subgroup.
///  - Real mode: radial raised-cosine, identity on |xi| <= cutoff and
///    zero beyond 2*cutoff.
inline ComplexField lowpass_convolve(const ComplexField& f, double cutoff) {
    require(cutoff > 0.0, "cutoff must be positive");
    const GridSpec& g = f.grid;
    if (g.mode == Mode::Exact) {
        double minv = 1.0 / cutoff;
        int64_t m = int64_t(std::llround(minv));
        require(std::abs(minv - double(m)) < 1e-9 && m >= 1, "exact mode cutoff must be 1/integer");
        {
            int64_t t = m;
            while (t % g.prime == 0) t /= g.prime;
            require(t == 1, "exact mode cutoff must be a power of 1/p");
        }
        return apply_multiplier(f, [m](const std::vector<int64_t>& bins) {
            for (int64_t k : bins)
                if (k % m != 0) return 0.0;
            return 1.0;
        });
    }
    return apply_multiplier(f, [&g, cutoff](const std::vector<int64_t>& bins) {
        double r2 = 0.0;
        for (std::size_t a = 0; a < bins.size(); ++a) {
            double xi = g.bin_frequency(int(a), bins[a]);
            r2 += xi * xi;
        }
        return raised_cosine(std::sqrt(r2), cutoff);
    });
}

inline ComplexField highpass_part(const ComplexField& f, double cutoff) {
    ComplexField low = lowpass_convolve(f, cutoff);
    ComplexField out = f;
    for (int64_t i = 0; i < out.size(); ++i) out.v[i] -= low.v[i];
    return out;
}

/// Frequency-side indicator of a per-axis coset {k ≡ residue (mod modulus)},
/// i.e. a subgroup coset of the exact-mode frequency group. Its inverse DFT
/// is a modulated indicator of the dual coset (uncertainty identity).
inline ComplexField make_coset_indicator(const GridSpec& g, const std::vector<int64_t>& modulus,
                                         const std::vector<int64_t>& residue) {
    require(int(modulus.size()) == g.dims() && int(residue.size()) == g.dims(),
            "coset spec arity mismatch");
    ComplexField hat(g);
    auto ext = g.extents();
    std::vector<int64_t> idx(ext.size(), 0);
    for (int64_t i = 0; i < hat.size(); ++i) {
        bool in = true;
        for (int a = 0; a < g.dims(); ++a)
            if ((idx[a] - residue[a]) % modulus[a] != 0) { in = false; break; }
        hat.v[i] = in ? 1.0 : 0.0;
        for (int a = int(ext.size()) - 1; a >= 0; --a) {
            if (++idx[a] < ext[a]) break;
            idx[a] = 0;
        }
    }
    return hat;
}

}  // namespace eslab
