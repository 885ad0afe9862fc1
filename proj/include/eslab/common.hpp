#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace eslab {

using cplx = std::complex<double>;
using std::int64_t;
using std::uint64_t;

inline constexpr double two_pi = 6.283185307179586476925286766559;

/// e(t) = exp(2*pi*i*t), the character convention used throughout.
inline cplx unit_phase(double t) {
    double a = two_pi * t;
    return {std::cos(a), std::sin(a)};
}

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw Error(what);
}

/// Compensated accumulator. Deterministic for a fixed add order.
struct Kahan {
    double sum = 0.0, c = 0.0;
    void add(double x) {
        double y = x - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

struct KahanC {
    Kahan re, im;
    void add(cplx z) {
        re.add(z.real());
        im.add(z.imag());
    }
    cplx value() const { return {re.value(), im.value()}; }
};

inline bool is_pow2(int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

inline int log2_exact(int64_t v) {
    require(is_pow2(v), "value is not a power of two: " + std::to_string(v));
    int e = 0;
    while ((int64_t{1} << e) < v) ++e;
    return e;
}

/// Largest power of `p` that is <= x (x > 0), as a double. Used when
/// rounding ladder scales down to the partition-compatible lattice.
inline double round_down_pow(int p, double x) {
    require(x > 0.0, "round_down_pow needs x > 0");
    double v = 1.0;
    if (x >= 1.0) {
        while (v * p <= x) v *= p;
    } else {
        while (v > x) v /= p;
    }
    return v;
}

/// 2-adic (p-adic) valuation of k modulo the group order m = p^e:
/// v(0 mod m) is defined as e.
inline int padic_valuation(int p, int64_t k, int64_t m) {
    k %= m;
    if (k < 0) k += m;
    if (k == 0) return log2_exact(m) / log2_exact(p);
    int v = 0;
    while (k % p == 0) {
        k /= p;
        ++v;
    }
    return v;
}

/// Deterministic scalar RNG: std::mt19937_64 (bit-exact by the standard)
/// with an explicit mapping to doubles, so streams do not depend on
/// library distribution internals.
struct Rng {
    explicit Rng(uint64_t seed) : engine(seed) {}
    uint64_t next_u64() { return engine(); }
    /// Uniform in [0,1).
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }
    /// Uniform integer in [0, n).
    uint64_t next_below(uint64_t n) { return next_u64() % n; }
    std::mt19937_64 engine;
};

/// FNV-1a over raw bytes; used for oracle cache keys.
inline uint64_t fnv1a(const void* data, std::size_t n, uint64_t h = 14695981039346656037ULL) {
    const unsigned char* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= b[i];
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace eslab
