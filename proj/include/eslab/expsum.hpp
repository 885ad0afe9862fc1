#pragma once

#include <algorithm>

#include "eslab/field.hpp"

namespace eslab {

/// Parabola exponential sum f(x) = sum_n a_n e(gamma(n/N).x) with
/// gamma(s) = (s, s^2). Frequencies are indexed n = 0..N-1, so every
/// n/N lies in exactly one half-open dyadic interval of [0,1).
struct ExpSumSpec {
    int64_t N = 0;
    std::vector<cplx> coeffs;

    ExpSumSpec() = default;
    ExpSumSpec(int64_t n, std::vector<cplx> a) : N(n), coeffs(std::move(a)) {
        require(N > 0, "ExpSumSpec needs N >= 1");
        require(int64_t(coeffs.size()) == N, "coefficient count must equal N");
    }
    static ExpSumSpec all_ones(int64_t n) { return ExpSumSpec(n, std::vector<cplx>(n, cplx(1.0, 0.0))); }
    /// Unit-modulus coefficients with phases drawn from the named
    /// mt19937_64 stream.
    static ExpSumSpec random_phase(int64_t n, uint64_t seed) {
        Rng rng(seed);
        std::vector<cplx> a(n);
        for (auto& z : a) z = unit_phase(rng.next_double());
        return ExpSumSpec(n, std::move(a));
    }

    double coeff_l2() const {
        Kahan s;
        for (const cplx& z : coeffs) s.add(std::norm(z));
        return std::sqrt(s.value());
    }
    bool is_zero() const {
        for (const cplx& z : coeffs)
            if (z != cplx(0.0, 0.0)) return false;
        return true;
    }
    uint64_t coeff_hash() const {
        return fnv1a(coeffs.data(), coeffs.size() * sizeof(cplx), fnv1a(&N, sizeof(N)));
    }
};

/// Partition of [0,1) into 1/delta cells of scale delta.
///  - Contiguous: the usual dyadic intervals [k delta, (k+1) delta).
///  - Residue: exact-mode cells n/N with n ≡ k (mod 1/delta), the finite
///    stand-in for p-adic balls. Same cardinality per cell; this is the
///    style under which the sharp cutoff identities are exact.
enum class IntervalStyle { Contiguous, Residue };

struct DyadicPartition {
    double delta = 1.0;
    int64_t cells = 1;  // 1/delta
    IntervalStyle style = IntervalStyle::Contiguous;

    DyadicPartition() = default;
    DyadicPartition(double d, IntervalStyle st, int prime = 2) : delta(d), style(st) {
        require(d > 0.0 && d <= 1.0, "delta must lie in (0,1]");
        double inv = 1.0 / d;
        cells = int64_t(std::llround(inv));
        require(std::abs(inv - double(cells)) < 1e-9, "1/delta must be an integer");
        int64_t t = cells;
        while (t % prime == 0) t /= prime;
        require(t == 1, "delta must be a power of 1/p");
    }

    /// Cell index of frequency n (of N).
    int64_t cell_of(int64_t n, int64_t N) const {
        require(N % cells == 0, "partition scale finer than the frequency lattice");
        return style == IntervalStyle::Contiguous ? n / (N / cells) : n % cells;
    }
    bool contains(int64_t cell, int64_t n, int64_t N) const { return cell_of(n, N) == cell; }
};

/// One cell of a DyadicPartition.
struct Interval {
    DyadicPartition partition;
    int64_t index = 0;
    bool contains(int64_t n, int64_t N) const { return partition.contains(index, n, N); }
};

// ---------------------------------------------------------------------------
// Grids for Q = [0,N^2]^2. Axis order is [x2, x1] (x1 fastest), which keeps
// x2 = "time" slices contiguous.
// ---------------------------------------------------------------------------

/// The square grid of the module defaults: M_g = oversample*N^2 per axis.
/// Character orthogonality makes |f|^{2m} quadrature exact for m <= 3 at
/// oversample 4. Feasible for small N only.
inline GridSpec q_square_grid(int64_t N, Mode mode, int64_t oversample = 4) {
    double side = double(N) * double(N);
    int64_t m = oversample * N * N;
    return GridSpec(mode, {Axis{side, m}, Axis{side, m}});
}

/// Fundamental cell [0,N) x [0,N^2) of the same field (f is N-periodic in
/// x1), with independent per-axis oversampling. Averaged norms over Q and
/// over the cell agree.
inline GridSpec q_cell_grid(int64_t N, Mode mode, int64_t ox1 = 1, int64_t ox2 = 1) {
    return GridSpec(mode, {Axis{double(N) * double(N), ox2 * N * N}, Axis{double(N), ox1 * N}});
}

namespace detail {
/// e(r/M) table for exact integer phase reduction.
inline std::vector<cplx> root_table(int64_t M) {
    std::vector<cplx> t(M);
    for (int64_t r = 0; r < M; ++r) t[r] = unit_phase(double(r) / double(M));
    return t;
}
/// Integer k1 such that the x1 phase of frequency n at sample j is
/// e(n*k1*j / M1), and likewise k2 for x2 (phase e(n^2*k2*l / M2)).
/// Exists because grid extents are multiples of the frequency lattice.
inline int64_t phase_step(double side, int64_t samples, double denom) {
    // frequency 1/denom on an axis of physical side `side`: bin index side/denom
    double step = side / denom * double(samples) / (side / 1.0) / double(samples);
    (void)step;
    double k = side / denom;
    int64_t ki = int64_t(std::llround(k));
    require(std::abs(k - double(ki)) < 1e-9, "frequency lattice does not align with the grid");
    return ki;
}
}  // namespace detail

/// Samples f over a [x2, x1] grid. Deterministic: ascending n with
/// compensated accumulation at every point.
inline ComplexField eval_exp_sum(const ExpSumSpec& spec, const GridSpec& grid) {
    require(grid.dims() == 2, "exp sums live on 2-d spacetime grids");
    const int64_t N = spec.N;
    require(std::abs(grid.axes[0].side - double(N) * double(N)) < 1e-9, "grid x2 side must be N^2");
    const int64_t M2 = grid.axes[0].samples, M1 = grid.axes[1].samples;
    // phase of frequency n/N at x1 = j*side1/M1 is n*j*side1/(N*M1)
    const int64_t k1 = detail::phase_step(grid.axes[1].side, M1, double(N));
    const int64_t k2 = detail::phase_step(grid.axes[0].side, M2, double(N) * double(N));
    auto e1 = detail::root_table(M1);
    auto e2 = detail::root_table(M2);

    ComplexField f(grid);
    std::vector<cplx> cn(N);
    for (int64_t l = 0; l < M2; ++l) {
        for (int64_t n = 0; n < N; ++n) cn[n] = spec.coeffs[n] * e2[(n * n % M2) * (k2 * l % M2) % M2];
        cplx* row = f.v.data() + l * M1;
        for (int64_t j = 0; j < M1; ++j) {
            KahanC acc;
            for (int64_t n = 0; n < N; ++n) acc.add(cn[n] * e1[(n * k1 % M1) * j % M1]);
            row[j] = acc.value();
        }
    }
    return f;
}

/// Single-point evaluation at physical coordinates (x1, x2).
inline cplx eval_exp_sum_at(const ExpSumSpec& spec, double x1, double x2,
                            const Interval* restrict_to = nullptr) {
    KahanC acc;
    const double N = double(spec.N);
    for (int64_t n = 0; n < spec.N; ++n) {
        if (restrict_to && !restrict_to->contains(n, spec.N)) continue;
        double p1 = std::fmod(double(n) * x1 / N, 1.0);
        double p2 = std::fmod(double(n) * double(n) * x2 / (N * N), 1.0);
        acc.add(spec.coeffs[n] * unit_phase(p1 + p2));
    }
    return acc.value();
}

/// f_I: the part of the sum with n/N in one partition cell.
inline ComplexField partial_sum(const ExpSumSpec& spec, const Interval& interval, const GridSpec& grid) {
    ExpSumSpec masked = spec;
    for (int64_t n = 0; n < spec.N; ++n)
        if (!interval.contains(n, spec.N)) masked.coeffs[n] = 0.0;
    return eval_exp_sum(masked, grid);
}

// ---------------------------------------------------------------------------
// Exact coefficient-space moments: avg_Q |f|^{2m} equals the weighted count
// of solutions of sum n_i = sum n'_i, sum n_i^2 = sum n'_i^2 because the
// frequencies gamma(n/N) are exactly orthogonal over Q. The streaming
// evaluation below groups m-tuples by (s,q) with a dense q-line per s.
// ---------------------------------------------------------------------------

/// avg_Q |f|^2m for m in {1,2,3}, exact up to rounding, O(N^m) time and
/// O(N^2) memory. For m = 3 with non-constant coefficients N is capped to
/// keep the per-s line in memory.
inline double l2m_moment_stream(const std::vector<cplx>& a, int m) {
    const int64_t N = int64_t(a.size());
    require(N >= 1, "empty coefficient vector");
    require(m >= 1 && m <= 3, "m must be 1, 2 or 3");
    if (m == 1) {
        Kahan s;
        for (const cplx& z : a) s.add(std::norm(z));
        return s.value();
    }
    bool ones = std::all_of(a.begin(), a.end(), [](cplx z) { return z == cplx(1.0, 0.0); });

    if (m == 2) {
        // pairs grouped by (s = n1+n2, q = n1^2+n2^2); per-s dense q line
        const int64_t qmax = 2 * (N - 1) * (N - 1);
        std::vector<cplx> slot(qmax + 1, cplx(0, 0));
        std::vector<int64_t> touched;
        Kahan total;
        for (int64_t s = 0; s <= 2 * (N - 1); ++s) {
            touched.clear();
            int64_t lo = std::max<int64_t>(0, s - (N - 1));
            int64_t hi = s / 2;
            for (int64_t n1 = lo; n1 <= hi; ++n1) {
                int64_t n2 = s - n1;
                int64_t q = n1 * n1 + n2 * n2;
                cplx w = a[n1] * a[n2] * (n1 == n2 ? 1.0 : 2.0);
                if (slot[q] == cplx(0.0, 0.0)) touched.push_back(q);
                slot[q] += w;
            }
            for (int64_t q : touched) {
                total.add(std::norm(slot[q]));
                slot[q] = 0.0;
            }
        }
        return total.value();
    }

    // m == 3
    const int64_t qmax = 3 * (N - 1) * (N - 1);
    if (ones) {
        require(N <= (int64_t{1} << 12), "all-ones sextuple moment capped at N = 4096");
        std::vector<std::uint32_t> cnt(qmax + 1, 0);
        std::vector<std::uint16_t> epoch(qmax + 1, 0xFFFF);
        std::uint16_t cur = 0;
        int64_t total = 0;
        const int64_t smax = 3 * (N - 1);
        for (int64_t s = 0; s <= (smax - 1) / 2 + (smax % 2 == 0 ? 1 : 0); ++s) {
            int64_t mult = (2 * s == smax) ? 1 : 2;  // reflection n -> N-1-n pairs s with smax-s
            ++cur;
            // sorted triples n1 <= n2 <= n3 with multiplicity weights
            for (int64_t n1 = std::max<int64_t>(0, s - 2 * (N - 1)); 3 * n1 <= s; ++n1) {
                int64_t rem = s - n1;
                int64_t n2lo = std::max<int64_t>(n1, rem - (N - 1));
                int64_t n2hi = rem / 2;
                int64_t q12 = n1 * n1;
                for (int64_t n2 = n2lo; n2 <= n2hi; ++n2) {
                    int64_t n3 = rem - n2;
                    int64_t q = q12 + n2 * n2 + n3 * n3;
                    std::uint32_t w = (n1 == n2 && n2 == n3) ? 1 : (n1 == n2 || n2 == n3) ? 3 : 6;
                    std::uint32_t c = (epoch[q] == cur) ? cnt[q] : 0;
                    total += mult * int64_t(w) * (2 * int64_t(c) + int64_t(w));
                    cnt[q] = c + w;
                    epoch[q] = cur;
                }
            }
        }
        return double(total);
    }

    require(N <= (int64_t{1} << 10), "weighted sextuple moment capped at N = 1024");
    std::vector<cplx> slot(qmax + 1, cplx(0, 0));
    std::vector<std::uint16_t> epoch(qmax + 1, 0xFFFF);
    std::uint16_t cur = 0;
    Kahan total;
    for (int64_t s = 0; s <= 3 * (N - 1); ++s) {
        ++cur;
        double partial = 0.0;
        for (int64_t n1 = std::max<int64_t>(0, s - 2 * (N - 1)); 3 * n1 <= s; ++n1) {
            int64_t rem = s - n1;
            int64_t n2lo = std::max<int64_t>(n1, rem - (N - 1));
            int64_t n2hi = rem / 2;
            for (int64_t n2 = n2lo; n2 <= n2hi; ++n2) {
                int64_t n3 = rem - n2;
                int64_t q = n1 * n1 + n2 * n2 + n3 * n3;
                double mult = (n1 == n2 && n2 == n3) ? 1.0 : (n1 == n2 || n2 == n3) ? 3.0 : 6.0;
                cplx w = a[n1] * a[n2] * a[n3] * mult;
                cplx c = (epoch[q] == cur) ? slot[q] : cplx(0.0, 0.0);
                partial += 2.0 * (c.real() * w.real() + c.imag() * w.imag()) + std::norm(w);
                slot[q] = c + w;
                epoch[q] = cur;
            }
        }
        total.add(partial);
    }
    return total.value();
}

/// D(N)-type quantity: ||f||_{L^p_avg(Q)} / ||a||_{l^2}, measured on a grid.
inline double strichartz_ratio(const ExpSumSpec& spec, double p, const GridSpec& grid) {
    require(p >= 2.0, "strichartz_ratio needs p >= 2");
    require(!spec.is_zero(), "zero coefficient vector");
    ComplexField f = eval_exp_sum(spec, grid);
    return lp_avg_norm(f, p) / spec.coeff_l2();
}

/// Same ratio through the exact coefficient-space moments (p in {2,4,6});
/// the production path for N beyond grid feasibility.
inline double strichartz_ratio_exact(const ExpSumSpec& spec, int p) {
    require(!spec.is_zero(), "zero coefficient vector");
    require(p == 2 || p == 4 || p == 6, "exact path supports p in {2,4,6}");
    double mom = l2m_moment_stream(spec.coeffs, p / 2);
    return std::pow(mom, 1.0 / double(p)) / spec.coeff_l2();
}

/// ||sum_I f_I||_{L^p_avg} / (sum_I ||f_I||^2_{L^p_avg})^{1/2}.
inline double decoupling_ratio(const ExpSumSpec& spec, const DyadicPartition& part, double p,
                               const GridSpec& grid) {
    require(!spec.is_zero(), "zero coefficient vector");
    require(spec.N % part.cells == 0, "partition incompatible with N");
    ComplexField f = eval_exp_sum(spec, grid);
    double num = lp_avg_norm(f, p);
    Kahan denom2;
    for (int64_t k = 0; k < part.cells; ++k) {
        Interval iv{part, k};
        ComplexField fi = partial_sum(spec, iv, grid);
        double nk = lp_avg_norm(fi, p);
        denom2.add(nk * nk);
    }
    return num / std::sqrt(denom2.value());
}

}  // namespace eslab
