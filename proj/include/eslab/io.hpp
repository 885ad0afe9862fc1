#pragma once

#include <cstdio>
#include <fstream>

#include "eslab/field.hpp"

namespace eslab {

/// Binary field container. Layout:
///   magic "ESLF", u32 version, u8 mode, u8 prime, u16 dims,
///   per axis { u64 samples, f64 side }, then interleaved f64 re/im.
inline void write_field(const ComplexField& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    require(bool(os), "cannot open for writing: " + path);
    os.write("ESLF", 4);
    std::uint32_t version = 1;
    os.write(reinterpret_cast<const char*>(&version), 4);
    std::uint8_t mode = f.grid.mode == Mode::Exact ? 1 : 0;
    std::uint8_t prime = std::uint8_t(f.grid.prime);
    std::uint16_t dims = std::uint16_t(f.grid.dims());
    os.write(reinterpret_cast<const char*>(&mode), 1);
    os.write(reinterpret_cast<const char*>(&prime), 1);
    os.write(reinterpret_cast<const char*>(&dims), 2);
    for (const Axis& a : f.grid.axes) {
        std::uint64_t s = std::uint64_t(a.samples);
        os.write(reinterpret_cast<const char*>(&s), 8);
        os.write(reinterpret_cast<const char*>(&a.side), 8);
    }
    for (const cplx& z : f.v) {
        double re = z.real(), im = z.imag();
        os.write(reinterpret_cast<const char*>(&re), 8);
        os.write(reinterpret_cast<const char*>(&im), 8);
    }
    require(bool(os), "write failed: " + path);
}

inline ComplexField read_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(bool(is), "cannot open for reading: " + path);
    char magic[4];
    is.read(magic, 4);
    require(is && std::string(magic, 4) == "ESLF", "bad field file magic: " + path);
    std::uint32_t version = 0;
    is.read(reinterpret_cast<char*>(&version), 4);
    require(version == 1, "unsupported field file version");
    std::uint8_t mode = 0, prime = 0;
    std::uint16_t dims = 0;
    is.read(reinterpret_cast<char*>(&mode), 1);
    is.read(reinterpret_cast<char*>(&prime), 1);
    is.read(reinterpret_cast<char*>(&dims), 2);
    std::vector<Axis> axes(dims);
    for (auto& a : axes) {
        std::uint64_t s = 0;
        is.read(reinterpret_cast<char*>(&s), 8);
        is.read(reinterpret_cast<char*>(&a.side), 8);
        a.samples = int64_t(s);
    }
    GridSpec g(mode ? Mode::Exact : Mode::Real, std::move(axes), prime ? prime : 2);
    ComplexField f(g);
    for (cplx& z : f.v) {
        double re = 0, im = 0;
        is.read(reinterpret_cast<char*>(&re), 8);
        is.read(reinterpret_cast<char*>(&im), 8);
        z = {re, im};
    }
    require(bool(is), "truncated field file: " + path);
    return f;
}

/// CSV export for small grids: one row per sample, index columns then
/// re/im with full double precision.
inline void write_field_csv(const ComplexField& f, const std::string& path, int64_t max_points = 1 << 20) {
    require(f.size() <= max_points, "field too large for CSV export");
    std::FILE* fp = std::fopen(path.c_str(), "w");
    require(fp != nullptr, "cannot open for writing: " + path);
    auto ext = f.grid.extents();
    std::fprintf(fp, "# dims=%d", f.grid.dims());
    for (const Axis& a : f.grid.axes) std::fprintf(fp, " axis(samples=%lld,side=%.17g)", (long long)a.samples, a.side);
    std::fprintf(fp, " mode=%s\n", mode_name(f.grid.mode));
    std::vector<int64_t> idx(ext.size(), 0);
    for (int64_t i = 0; i < f.size(); ++i) {
        for (std::size_t a = 0; a < idx.size(); ++a) std::fprintf(fp, "%lld,", (long long)idx[a]);
        std::fprintf(fp, "%.17g,%.17g\n", f.v[i].real(), f.v[i].imag());
        for (int a = int(ext.size()) - 1; a >= 0; --a) {
            if (++idx[a] < ext[a]) break;
            idx[a] = 0;
        }
    }
    std::fclose(fp);
}

}  // namespace eslab
