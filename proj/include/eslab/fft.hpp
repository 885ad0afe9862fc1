#pragma once

#include <algorithm>

#include "eslab/common.hpp"

namespace eslab {

/// Iterative radix-2 FFT for power-of-two lengths. Every grid in this
/// library has power-of-two extents, so no general-length plan is needed.
/// sign = -1: forward (e(-jk/n) kernel), sign = +1: inverse kernel.
/// No normalization is applied here; callers own the convention.
inline void fft_pow2(cplx* a, int64_t n, int sign) {
    require(is_pow2(n), "fft length must be a power of two");
    // bit reversal
    for (int64_t i = 1, j = 0; i < n; ++i) {
        int64_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int64_t len = 2; len <= n; len <<= 1) {
        double ang = sign * two_pi / double(len);
        cplx wl(std::cos(ang), std::sin(ang));
        for (int64_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (int64_t k = 0; k < len / 2; ++k) {
                cplx u = a[i + k];
                cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

/// Multi-dimensional FFT over a row-major array with extents `dims`
/// (last axis fastest). Transforms every axis; no normalization.
inline void fft_nd(cplx* data, const std::vector<int64_t>& dims, int sign) {
    int64_t total = 1;
    for (int64_t d : dims) total *= d;
    if (total == 0) return;
    std::vector<cplx> scratch;
    int64_t stride = 1;  // stride of the current (rightmost-first) axis
    for (int ax = int(dims.size()) - 1; ax >= 0; --ax) {
        int64_t n = dims[ax];
        if (n > 1) {
            if (stride == 1) {
                for (int64_t base = 0; base < total; base += n) fft_pow2(data + base, n, sign);
            } else {
                scratch.resize(n);
                int64_t block = n * stride;
                for (int64_t b = 0; b < total; b += block) {
                    for (int64_t off = 0; off < stride; ++off) {
                        cplx* p = data + b + off;
                        for (int64_t k = 0; k < n; ++k) scratch[k] = p[k * stride];
                        fft_pow2(scratch.data(), n, sign);
                        for (int64_t k = 0; k < n; ++k) p[k * stride] = scratch[k];
                    }
                }
            }
        }
        stride *= n;
    }
}

}  // namespace eslab
