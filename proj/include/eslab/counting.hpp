#pragma once

#include <filesystem>
#include <fstream>

#include "eslab/expsum.hpp"

namespace eslab {

/// Exact count of the pair system
///   n - m = n' - m',  n^2 - m^2 = n'^2 - m'^2,
/// with n/N, m/N in I, n'/N, m'/N in I', n != m, n' != m'. For I != I' the
/// count is zero: equal nonzero differences force equal sums, hence equal
/// pairs.
struct SystemSolutionCount {
    int64_t N = 0;
    int64_t count = 0;
    cplx weighted_value{0.0, 0.0};
};

namespace detail {
/// (difference key, weight) rows for all ordered pairs n != m in one cell.
inline std::vector<std::pair<int64_t, cplx>> pair_rows(const ExpSumSpec& spec, const Interval& iv) {
    const int64_t N = spec.N;
    const int64_t vspan = (N - 1) * (N - 1);
    std::vector<std::pair<int64_t, cplx>> rows;
    for (int64_t n = 0; n < N; ++n) {
        if (!iv.contains(n, N)) continue;
        for (int64_t m = 0; m < N; ++m) {
            if (m == n || !iv.contains(m, N)) continue;
            int64_t u = n - m, v = n * n - m * m;
            int64_t key = (u + N) * (2 * vspan + 1) + (v + vspan);
            rows.emplace_back(key, spec.coeffs[n] * std::conj(spec.coeffs[m]));
        }
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return rows;
}
}  // namespace detail

inline SystemSolutionCount count_pair_system(const ExpSumSpec& spec, const Interval& I,
                                             const Interval& Iprime) {
    auto a = detail::pair_rows(spec, I);
    auto b = detail::pair_rows(spec, Iprime);
    SystemSolutionCount out;
    out.N = spec.N;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first < b[j].first) { ++i; continue; }
        if (b[j].first < a[i].first) { ++j; continue; }
        int64_t key = a[i].first;
        std::size_t i2 = i, j2 = j;
        KahanC wa, wb;
        int64_t ca = 0, cb = 0;
        while (i2 < a.size() && a[i2].first == key) { wa.add(a[i2].second); ++ca; ++i2; }
        while (j2 < b.size() && b[j2].first == key) { wb.add(b[j2].second); ++cb; ++j2; }
        out.count += ca * cb;
        out.weighted_value += wa.value() * std::conj(wb.value());
        i = i2;
        j = j2;
    }
    return out;
}

inline SystemSolutionCount count_pair_system(int64_t N, const Interval& I, const Interval& Iprime) {
    return count_pair_system(ExpSumSpec::all_ones(N), I, Iprime);
}

/// Independent oracle for avg_Q |f|^{2m}: full ordered enumeration of
/// m-tuples hashed by (sum n_i, sum n_i^2), then Parseval. No symmetry
/// shortcuts; this is the ground truth the production paths are checked
/// against. m = 3 is O(N^3) and capped at N = 64.
inline double l2m_norm_by_counting(const std::vector<cplx>& a, int m) {
    const int64_t N = int64_t(a.size());
    require(N >= 1, "empty coefficient vector");
    require(m >= 1 && m <= 3, "m must be 1, 2 or 3");
    if (m == 3)
        require(N <= 64,
                "counting oracle capped at N = 64 for m = 3 "
                "(use l2m_moment_stream or grid quadrature beyond)");

    std::vector<std::pair<int64_t, cplx>> rows;
    const int64_t qspan = int64_t(m) * (N - 1) * (N - 1) + 1;
    if (m == 1) {
        for (int64_t n = 0; n < N; ++n) rows.emplace_back(n * qspan + n * n, a[n]);
    } else if (m == 2) {
        for (int64_t n1 = 0; n1 < N; ++n1)
            for (int64_t n2 = 0; n2 < N; ++n2)
                rows.emplace_back((n1 + n2) * qspan + n1 * n1 + n2 * n2, a[n1] * a[n2]);
    } else {
        rows.reserve(std::size_t(N) * N * N);
        for (int64_t n1 = 0; n1 < N; ++n1)
            for (int64_t n2 = 0; n2 < N; ++n2)
                for (int64_t n3 = 0; n3 < N; ++n3)
                    rows.emplace_back((n1 + n2 + n3) * qspan + n1 * n1 + n2 * n2 + n3 * n3,
                                      a[n1] * a[n2] * a[n3]);
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    Kahan total;
    std::size_t i = 0;
    while (i < rows.size()) {
        int64_t key = rows[i].first;
        KahanC w;
        while (i < rows.size() && rows[i].first == key) { w.add(rows[i].second); ++i; }
        total.add(std::norm(w.value()));
    }
    return total.value();
}

/// Oracle with a disk cache keyed by (N, coefficient hash, m).
inline double l2m_norm_by_counting_cached(const ExpSumSpec& spec, int m, const std::string& cache_dir) {
    if (cache_dir.empty()) return l2m_norm_by_counting(spec.coeffs, m);
    std::filesystem::create_directories(cache_dir);
    char name[128];
    std::snprintf(name, sizeof name, "l2m_N%lld_h%016llx_m%d.txt", (long long)spec.N,
                  (unsigned long long)spec.coeff_hash(), m);
    std::filesystem::path p = std::filesystem::path(cache_dir) / name;
    if (std::filesystem::exists(p)) {
        std::ifstream is(p);
        double v = 0.0;
        if (is >> v) return v;
    }
    double v = l2m_norm_by_counting(spec.coeffs, m);
    std::ofstream os(p);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    os << buf;
    return v;
}

/// Relative discrepancy between grid quadrature of |f|^{2m} and the oracle.
inline double verify_quadrature(const ExpSumSpec& spec, const GridSpec& grid, int m,
                                const std::string& cache_dir = "") {
    double oracle = l2m_norm_by_counting_cached(spec, m, cache_dir);
    ComplexField f = eval_exp_sum(spec, grid);
    double quad = std::pow(lp_avg_norm(f, 2.0 * m), 2.0 * m);
    return std::abs(quad - oracle) / oracle;
}

}  // namespace eslab
