#include <catch2/catch_amalgamated.hpp>

#include "eslab/expsum.hpp"

using namespace eslab;

namespace {
ComplexField character_field(const GridSpec& g, int64_t k0, int64_t k1) {
    ComplexField f(g);
    auto m0 = g.axes[0].samples, m1 = g.axes[1].samples;
    for (int64_t i = 0; i < m0; ++i)
        for (int64_t j = 0; j < m1; ++j)
            f.v[i * m1 + j] = unit_phase(double(k0 * i) / double(m0) + double(k1 * j) / double(m1));
    return f;
}
double max_abs(const ComplexField& f) { return linf_norm(f); }
}  // namespace

TEST_CASE("lp_avg_norm of a constant field is its modulus") {
    GridSpec g = GridSpec::square(Mode::Real, 9.0, 16, 2);
    ComplexField f(g);
    for (auto& z : f.v) z = cplx(0.0, 2.5);
    CHECK(lp_avg_norm(f, 6.0) == Catch::Approx(2.5).epsilon(1e-13));
}

TEST_CASE("averaged L^2 of the N=2 all-ones sum equals sqrt(2) and L^6 equals 20^(1/6)") {
    ExpSumSpec spec = ExpSumSpec::all_ones(2);
    GridSpec g = q_square_grid(2, Mode::Exact);
    ComplexField f = eval_exp_sum(spec, g);
    CHECK(lp_avg_norm(f, 2.0) == Catch::Approx(std::sqrt(2.0)).epsilon(1e-12));

    // brute-force oracle over all 2^6 sextuples of the two-equation system
    int64_t solutions = 0;
    for (int n1 = 0; n1 < 2; ++n1)
        for (int n2 = 0; n2 < 2; ++n2)
            for (int n3 = 0; n3 < 2; ++n3)
                for (int m1 = 0; m1 < 2; ++m1)
                    for (int m2 = 0; m2 < 2; ++m2)
                        for (int m3 = 0; m3 < 2; ++m3) {
                            bool lin = n1 + n2 + n3 == m1 + m2 + m3;
                            bool quad = n1 * n1 + n2 * n2 + n3 * n3 == m1 * m1 + m2 * m2 + m3 * m3;
                            if (lin && quad) ++solutions;
                        }
    REQUIRE(solutions == 20);
    CHECK(lp_avg_norm(f, 6.0) == Catch::Approx(std::pow(20.0, 1.0 / 6.0)).epsilon(1e-12));
}

TEST_CASE("lp_avg_norm rejects bad input and is monotone in region") {
    GridSpec g = GridSpec::square(Mode::Real, 4.0, 8, 2);
    ComplexField f(g);
    Rng rng(5);
    for (auto& z : f.v) z = {rng.next_double(), 0.0};

    RegionMask empty(g);
    CHECK_THROWS_AS(lp_avg_norm(f, 2.0, &empty), Error);
    CHECK_THROWS_AS(lp_avg_norm(f, 0.5), Error);

    // under full-domain normalization, growing the region grows the norm
    RegionMask small(g), big(g);
    for (int64_t i = 0; i < f.size(); ++i) {
        small.m[i] = i % 4 == 0;
        big.m[i] = i % 2 == 0;
    }
    CHECK(lp_avg_norm(f, 3.0, &small) <= lp_avg_norm(f, 3.0, &big) + 1e-15);
    CHECK(lp_avg_norm(f, 3.0, &big) <= lp_avg_norm(f, 3.0) + 1e-15);
}

TEST_CASE("lowpass keeps spectra inside the cutoff and kills spectra beyond twice it") {
    GridSpec g = GridSpec::square(Mode::Real, 32.0, 128, 2);
    // bins (2,3): |xi| = sqrt(4+9)/32 ~ 0.11 <= 1/4
    ComplexField inside = character_field(g, 2, 3);
    ComplexField low = lowpass_convolve(inside, 0.25);
    double d1 = 0.0;
    for (int64_t i = 0; i < low.size(); ++i) d1 = std::max(d1, std::abs(low.v[i] - inside.v[i]));
    CHECK(d1 < 1e-12);

    // bins (20,24): |xi| ~ 0.98 >= 2*cutoff
    ComplexField outside = character_field(g, 20, 24);
    CHECK(max_abs(lowpass_convolve(outside, 0.25)) < 1e-12);
}

TEST_CASE("exact-mode lowpass is subgroup-coset averaging") {
    const int64_t N = 8;
    ExpSumSpec spec = ExpSumSpec::random_phase(N, 11);
    GridSpec g = q_cell_grid(N, Mode::Exact);
    DyadicPartition part(1.0 / 4.0, IntervalStyle::Residue);
    Interval I{part, 1};
    ComplexField fI = partial_sum(spec, I, g);
    ComplexField gI(g);
    for (int64_t i = 0; i < gI.size(); ++i) gI.v[i] = std::norm(fI.v[i]);

    // cutoff finer than the content: delta'' = 1/8 projects onto the
    // deeper comb, i.e. averages over cosets of the dual lattice
    double cutoff = 1.0 / 8.0;
    ComplexField low = lowpass_convolve(gI, cutoff);

    // oracle: average gI over the coset x + {steps of M_a/8 on each axis}
    auto m2 = g.axes[0].samples, m1 = g.axes[1].samples;
    int64_t s2 = m2 / 8, s1 = m1 / 8;
    double worst = 0.0;
    for (int64_t i = 0; i < m2; ++i)
        for (int64_t j = 0; j < m1; ++j) {
            KahanC acc;
            for (int64_t u = 0; u < 8; ++u)
                for (int64_t w = 0; w < 8; ++w)
                    acc.add(gI.v[((i + u * s2) % m2) * m1 + (j + w * s1) % m1]);
            cplx avg = acc.value() / 64.0;
            worst = std::max(worst, std::abs(avg - low.v[i * m1 + j]));
        }
    CHECK(worst < 1e-11);
}

TEST_CASE("lowpass at the content scale leaves exact-mode square pieces unchanged") {
    const int64_t N = 8;
    ExpSumSpec spec = ExpSumSpec::random_phase(N, 7);
    GridSpec g = q_cell_grid(N, Mode::Exact);
    DyadicPartition part(1.0 / 4.0, IntervalStyle::Residue);
    ComplexField fI = partial_sum(spec, Interval{part, 2}, g);
    ComplexField gI(g);
    for (int64_t i = 0; i < gI.size(); ++i) gI.v[i] = std::norm(fI.v[i]);
    ComplexField low = lowpass_convolve(gI, 1.0 / 4.0);
    double d = 0.0;
    for (int64_t i = 0; i < low.size(); ++i) d = std::max(d, std::abs(low.v[i] - gI.v[i]));
    CHECK(d < 1e-11);
}

TEST_CASE("highpass identities") {
    GridSpec g = GridSpec::square(Mode::Real, 16.0, 64, 2);

    ComplexField constant(g);
    for (auto& z : constant.v) z = 3.0;
    CHECK(max_abs(highpass_part(constant, 0.25)) < 1e-12);

    ComplexField f(g);
    Rng rng(9);
    for (auto& z : f.v) z = {rng.next_double() - 0.5, rng.next_double() - 0.5};
    ComplexField low = lowpass_convolve(f, 0.3), high = highpass_part(f, 0.3);
    double d = 0.0;
    for (int64_t i = 0; i < f.size(); ++i) d = std::max(d, std::abs(low.v[i] + high.v[i] - f.v[i]));
    CHECK(d < 1e-12);

    // a pure character far above the cutoff passes through unchanged
    ComplexField chi = character_field(g, 28, 30);
    ComplexField hp = highpass_part(chi, 0.25);
    double d2 = 0.0;
    for (int64_t i = 0; i < chi.size(); ++i) d2 = std::max(d2, std::abs(hp.v[i] - chi.v[i]));
    CHECK(d2 < 1e-12);
}
