#include <catch2/catch_amalgamated.hpp>

#include "eslab/counting.hpp"
#include "eslab/expsum.hpp"

using namespace eslab;

TEST_CASE("partition cells are disjoint, cover [0,1) and count 1/delta") {
    for (IntervalStyle st : {IntervalStyle::Contiguous, IntervalStyle::Residue}) {
        DyadicPartition part(1.0 / 8.0, st);
        REQUIRE(part.cells == 8);
        const int64_t N = 32;
        std::vector<int> hits(N, 0);
        for (int64_t k = 0; k < part.cells; ++k)
            for (int64_t n = 0; n < N; ++n)
                if (part.contains(k, n, N)) ++hits[n];
        for (int64_t n = 0; n < N; ++n) CHECK(hits[n] == 1);
    }
    CHECK_THROWS_AS(DyadicPartition(0.3, IntervalStyle::Contiguous), Error);
}

TEST_CASE("exp sum values at distinguished points") {
    // all phases cancel the lattice: f(0,0) = N
    ExpSumSpec spec = ExpSumSpec::all_ones(8);
    CHECK(std::abs(eval_exp_sum_at(spec, 0.0, 0.0) - cplx(8.0, 0.0)) < 1e-12);

    // N=1: single character, unit modulus everywhere
    ExpSumSpec one(1, {cplx(1.0, 0.0)});
    GridSpec g1 = q_square_grid(1, Mode::Exact);
    ComplexField f1 = eval_exp_sum(one, g1);
    for (const cplx& z : f1.v) CHECK(std::abs(std::abs(z) - 1.0) < 1e-12);

    // constructive interference at x = (jN, 0)
    ExpSumSpec s16 = ExpSumSpec::all_ones(16);
    for (int64_t j : {0, 1, 5, 15})
        CHECK(std::abs(eval_exp_sum_at(s16, double(j * 16), 0.0) - cplx(16.0, 0.0)) < 1e-10);
}

TEST_CASE("partial sums: identity at delta=1, single characters at delta=1/N, halves at x=0") {
    const int64_t N = 8;
    ExpSumSpec spec = ExpSumSpec::random_phase(N, 21);
    GridSpec g = q_cell_grid(N, Mode::Exact);

    ComplexField f = eval_exp_sum(spec, g);
    DyadicPartition whole(1.0, IntervalStyle::Contiguous);
    ComplexField fw = partial_sum(spec, Interval{whole, 0}, g);
    for (int64_t i = 0; i < f.size(); ++i) CHECK(std::abs(f.v[i] - fw.v[i]) < 1e-12);

    DyadicPartition finest(1.0 / double(N), IntervalStyle::Contiguous);
    for (int64_t k = 0; k < N; ++k) {
        ComplexField fk = partial_sum(spec, Interval{finest, k}, g);
        for (int64_t i = 0; i < fk.size(); i += 97)
            CHECK(std::abs(std::abs(fk.v[i]) - std::abs(spec.coeffs[k])) < 1e-12);
    }

    ExpSumSpec ones = ExpSumSpec::all_ones(N);
    DyadicPartition halves(0.5, IntervalStyle::Contiguous);
    CHECK(std::abs(eval_exp_sum_at(ones, 0.0, 0.0, nullptr) - cplx(double(N), 0.0)) < 1e-12);
    Interval h0{halves, 0}, h1{halves, 1};
    CHECK(std::abs(eval_exp_sum_at(ones, 0.0, 0.0, &h0) - cplx(double(N) / 2, 0.0)) < 1e-12);
    CHECK(std::abs(eval_exp_sum_at(ones, 0.0, 0.0, &h1) - cplx(double(N) / 2, 0.0)) < 1e-12);
}

TEST_CASE("additivity of partial sums over any partition") {
    const int64_t N = 16;
    ExpSumSpec spec = ExpSumSpec::random_phase(N, 4);
    GridSpec g = q_cell_grid(N, Mode::Exact);
    ComplexField f = eval_exp_sum(spec, g);
    for (IntervalStyle st : {IntervalStyle::Contiguous, IntervalStyle::Residue}) {
        DyadicPartition part(1.0 / 4.0, st);
        ComplexField sum(g);
        for (int64_t k = 0; k < part.cells; ++k) {
            ComplexField fk = partial_sum(spec, Interval{part, k}, g);
            for (int64_t i = 0; i < sum.size(); ++i) sum.v[i] += fk.v[i];
        }
        double rel = 0.0;
        for (int64_t i = 0; i < f.size(); ++i) rel = std::max(rel, std::abs(sum.v[i] - f.v[i]));
        CHECK(rel < 1e-12 * double(N));
    }
}

TEST_CASE("exact orthogonality on Q and scaling covariance") {
    const int64_t N = 16;
    ExpSumSpec spec = ExpSumSpec::random_phase(N, 30);
    GridSpec g = q_cell_grid(N, Mode::Exact);
    ComplexField f = eval_exp_sum(spec, g);
    double l2 = lp_avg_norm(f, 2.0);
    CHECK(std::abs(l2 * l2 - spec.coeff_l2() * spec.coeff_l2()) < 1e-10);

    double r1 = strichartz_ratio(spec, 6.0, g);
    ExpSumSpec scaled = spec;
    for (auto& z : scaled.coeffs) z *= cplx(-1.7, 0.4);
    double r2 = strichartz_ratio(scaled, 6.0, g);
    CHECK(std::abs(r1 - r2) < 1e-12 * r1);
    CHECK(std::abs(lp_avg_norm(eval_exp_sum(scaled, g), 6.0) -
                   std::abs(cplx(-1.7, 0.4)) * lp_avg_norm(f, 6.0)) < 1e-10);
}

TEST_CASE("strichartz ratio: N=1 trivial, N=2 matches the 20-solution count") {
    ExpSumSpec one(1, {cplx(0.3, 0.8)});
    GridSpec g1 = q_square_grid(1, Mode::Exact);
    CHECK(strichartz_ratio(one, 6.0, g1) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(strichartz_ratio(one, 4.0, g1) == Catch::Approx(1.0).epsilon(1e-12));

    ExpSumSpec two = ExpSumSpec::all_ones(2);
    GridSpec g2 = q_square_grid(2, Mode::Exact);
    double expected = std::pow(20.0, 1.0 / 6.0) / std::sqrt(2.0);
    CHECK(strichartz_ratio(two, 6.0, g2) == Catch::Approx(expected).epsilon(1e-12));
    CHECK(strichartz_ratio_exact(two, 6) == Catch::Approx(expected).epsilon(1e-12));

    ExpSumSpec zero(3, std::vector<cplx>(3, cplx(0, 0)));
    CHECK_THROWS_AS(strichartz_ratio(zero, 6.0, q_square_grid(3, Mode::Real)), Error);
}

TEST_CASE("streaming moments agree with brute force and the counting oracle") {
    // brute force over all 4^6 sextuples at N=4
    {
        const int64_t N = 4;
        int64_t solutions = 0;
        for (int n1 = 0; n1 < N; ++n1)
            for (int n2 = 0; n2 < N; ++n2)
                for (int n3 = 0; n3 < N; ++n3)
                    for (int m1 = 0; m1 < N; ++m1)
                        for (int m2 = 0; m2 < N; ++m2)
                            for (int m3 = 0; m3 < N; ++m3)
                                if (n1 + n2 + n3 == m1 + m2 + m3 &&
                                    n1 * n1 + n2 * n2 + n3 * n3 == m1 * m1 + m2 * m2 + m3 * m3)
                                    ++solutions;
        ExpSumSpec ones = ExpSumSpec::all_ones(N);
        CHECK(l2m_moment_stream(ones.coeffs, 3) == double(solutions));
        CHECK(l2m_norm_by_counting(ones.coeffs, 3) == Catch::Approx(double(solutions)).epsilon(1e-13));
    }
    // three-way agreement with random phases (stream vs oracle vs grid)
    for (uint64_t seed : {0ull, 1ull, 2ull}) {
        const int64_t N = 16;
        ExpSumSpec spec = ExpSumSpec::random_phase(N, seed);
        double stream = l2m_moment_stream(spec.coeffs, 3);
        double oracle = l2m_norm_by_counting(spec.coeffs, 3);
        double grid = std::pow(lp_avg_norm(eval_exp_sum(spec, q_square_grid(N, Mode::Exact)), 6.0), 6.0);
        CHECK(std::abs(stream - oracle) < 1e-10 * oracle);
        CHECK(std::abs(grid - oracle) < 1e-8 * oracle);

        double p4s = l2m_moment_stream(spec.coeffs, 2);
        double p4o = l2m_norm_by_counting(spec.coeffs, 2);
        CHECK(std::abs(p4s - p4o) < 1e-10 * p4o);
    }
}

TEST_CASE("decoupling ratio: orthogonality and single-block cases") {
    const int64_t N = 16;
    ExpSumSpec spec = ExpSumSpec::random_phase(N, 12);
    GridSpec g = q_cell_grid(N, Mode::Exact, 2, 1);

    DyadicPartition finest(1.0 / double(N), IntervalStyle::Contiguous);
    CHECK(decoupling_ratio(spec, finest, 2.0, g) == Catch::Approx(1.0).epsilon(1e-10));

    DyadicPartition whole(1.0, IntervalStyle::Contiguous);
    CHECK(decoupling_ratio(spec, whole, 6.0, g) == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("decoupling numerator at N=16, delta=1/4 matches the counting oracle") {
    const int64_t N = 16;
    ExpSumSpec ones = ExpSumSpec::all_ones(N);
    GridSpec g = q_square_grid(N, Mode::Exact);
    DyadicPartition quarters(0.25, IntervalStyle::Contiguous);

    double oracle6 = l2m_norm_by_counting(ones.coeffs, 3);
    double num = lp_avg_norm(eval_exp_sum(ones, g), 6.0);
    CHECK(std::pow(num, 6.0) == Catch::Approx(oracle6).epsilon(1e-8));

    Kahan denom2;
    for (int64_t k = 0; k < quarters.cells; ++k) {
        double nk = lp_avg_norm(partial_sum(ones, Interval{quarters, k}, g), 6.0);
        denom2.add(nk * nk);
    }
    double ratio = decoupling_ratio(ones, quarters, 6.0, g);
    CHECK(ratio == Catch::Approx(num / std::sqrt(denom2.value())).epsilon(1e-12));
}
