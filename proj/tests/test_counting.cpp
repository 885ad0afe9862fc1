#include <catch2/catch_amalgamated.hpp>

#include "eslab/counting.hpp"

using namespace eslab;

TEST_CASE("pair system has no solutions across distinct cells") {
    for (IntervalStyle st : {IntervalStyle::Contiguous, IntervalStyle::Residue}) {
        for (double delta : {0.5, 0.25, 0.125}) {
            DyadicPartition part(delta, st);
            const int64_t N = 16;
            for (int64_t k1 = 0; k1 < part.cells; ++k1)
                for (int64_t k2 = 0; k2 < part.cells; ++k2) {
                    auto r = count_pair_system(N, Interval{part, k1}, Interval{part, k2});
                    if (k1 != k2) {
                        CHECK(r.count == 0);
                        CHECK(std::abs(r.weighted_value) == 0.0);
                    } else {
                        CHECK(r.count > 0);
                    }
                }
        }
    }
}

TEST_CASE("pair system over a full interval counts the diagonal pairs") {
    // equal nonzero differences force equal pairs, so the count is the
    // number of ordered pairs n != m: 4*3 = 12
    DyadicPartition whole(1.0, IntervalStyle::Contiguous);
    auto r = count_pair_system(4, Interval{whole, 0}, Interval{whole, 0});
    CHECK(r.count == 12);

    // a cell with at most one lattice point carries no off-diagonal pair
    DyadicPartition fine(1.0 / 4.0, IntervalStyle::Contiguous);
    auto r1 = count_pair_system(4, Interval{fine, 2}, Interval{fine, 2});
    CHECK(r1.count == 0);
}

TEST_CASE("counting oracle basics") {
    ExpSumSpec one(1, {cplx(0.6, -0.8)});
    CHECK(l2m_norm_by_counting(one.coeffs, 3) ==
          Catch::Approx(std::pow(std::abs(one.coeffs[0]), 6.0)).epsilon(1e-13));

    ExpSumSpec two = ExpSumSpec::all_ones(2);
    CHECK(l2m_norm_by_counting(two.coeffs, 3) == 20.0);

    ExpSumSpec r = ExpSumSpec::random_phase(12, 9);
    Kahan parseval;
    for (const cplx& z : r.coeffs) parseval.add(std::norm(z));
    CHECK(l2m_norm_by_counting(r.coeffs, 1) == Catch::Approx(parseval.value()).epsilon(1e-13));

    std::vector<cplx> big(65, cplx(1.0, 0.0));
    CHECK_THROWS_AS(l2m_norm_by_counting(big, 3), Error);
}

TEST_CASE("conjugating the coefficients leaves every norm unchanged") {
    ExpSumSpec spec = ExpSumSpec::random_phase(10, 31);
    ExpSumSpec conj = spec;
    for (auto& z : conj.coeffs) z = std::conj(z);
    for (int m : {1, 2, 3})
        CHECK(l2m_norm_by_counting(spec.coeffs, m) ==
              Catch::Approx(l2m_norm_by_counting(conj.coeffs, m)).epsilon(1e-12));
}

TEST_CASE("quadrature agrees with the oracle to 1e-8") {
    for (int64_t N : {2, 4, 8, 16}) {
        ExpSumSpec ones = ExpSumSpec::all_ones(N);
        CHECK(verify_quadrature(ones, q_square_grid(N, Mode::Exact), 3) < 1e-8);
        ExpSumSpec r = ExpSumSpec::random_phase(N, 40 + uint64_t(N));
        CHECK(verify_quadrature(r, q_square_grid(N, Mode::Exact), 3) < 1e-8);
        CHECK(verify_quadrature(r, q_square_grid(N, Mode::Exact), 2) < 1e-8);
    }
}

TEST_CASE("oracle cache round trips") {
    auto dir = std::filesystem::temp_directory_path() / "eslab_oracle_cache";
    std::filesystem::remove_all(dir);
    ExpSumSpec spec = ExpSumSpec::random_phase(8, 77);
    double v1 = l2m_norm_by_counting_cached(spec, 3, dir.string());
    double v2 = l2m_norm_by_counting_cached(spec, 3, dir.string());
    CHECK(v1 == v2);
    bool found = false;
    for (auto& e : std::filesystem::directory_iterator(dir)) (void)e, found = true;
    CHECK(found);
}
