#include <catch2/catch_amalgamated.hpp>

#include "theta/decompose.hpp"

using namespace theta;

namespace {
// tM M as integers
bool mtm_is_ell_id(const SquareDecomposition& d) {
    std::size_t r = static_cast<std::size_t>(d.r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) {
            long long s = 0;
            for (std::size_t k = 0; k < r; ++k) s += d.M[k][i] * d.M[k][j];
            long long want = i == j ? static_cast<long long>(d.ell) : 0;
            if (s != want) return false;
        }
    return true;
}

bool all_odd_prime_factors_1_mod_4(unsigned long long n) {
    for (unsigned long long p = 3; p * p <= n; p += 2)
        if (n % p == 0) {
            if (p % 4 != 1) return false;
            while (n % p == 0) n /= p;
        }
    return n == 1 || n % 4 == 1;
}
}  // namespace

TEST_CASE("pinned decompositions") {
    auto d9 = decompose(9, 2);
    CHECK(d9.r == 1);
    CHECK(d9.ell1 == 9);
    CHECK(d9.sqrt_ell1 == 3);
    CHECK(d9.M == std::vector<std::vector<long long>>{{3}});

    auto d5 = decompose(5, 2);
    CHECK(d5.r == 2);
    CHECK(d5.a == 1);
    CHECK(d5.b == 2);
    CHECK(d5.M == std::vector<std::vector<long long>>{{1, 2}, {-2, 1}});
    CHECK(d5.beta0 == 3);  // -2/1 mod 5
    CHECK(mtm_is_ell_id(d5));

    auto d3 = decompose(3, 2);
    CHECK(d3.r == 4);
    CHECK(d3.a == 1);
    CHECK(d3.b == 1);
    CHECK(d3.c == 1);
    CHECK(d3.d == 0);
    CHECK(mtm_is_ell_id(d3));

    auto d5f = decompose(5, 4, 4);
    CHECK(d5f.r == 4);
    CHECK(d5f.a == 0);
    CHECK(d5f.b == 1);
    CHECK(d5f.c == 2);
    CHECK(d5f.d == 0);
    CHECK(mtm_is_ell_id(d5f));

    auto d9f = decompose(9, 4, 4);
    CHECK(d9f.r == 4);
    CHECK(d9f.a == 2);
    CHECK(d9f.b == 2);
    CHECK(d9f.c == 1);
    CHECK(d9f.d == 0);
    CHECK(d9f.ell1 == 1);
    CHECK(mtm_is_ell_id(d9f));
}

TEST_CASE("decompose input validation") {
    CHECK_THROWS_AS(decompose(4, 2), usage_error);
    CHECK_THROWS_AS(decompose(1, 2), usage_error);
    CHECK_THROWS_AS(decompose(15, 6), usage_error);  // not coprime to n
    CHECK_THROWS_AS(decompose(15, 2, 1), usage_error);  // not a square
}

TEST_CASE("matrix identity and classification for every odd ell up to 2000") {
    for (unsigned long long ell = 3; ell <= 2000; ell += 2) {
        int n = ell % 2 == 1 ? 2 : 4;
        auto d = decompose(ell, n);
        CHECK(mtm_is_ell_id(d));
        CHECK(d.ell1 * d.ell2 == ell);
        CHECK(d.sqrt_ell1 * d.sqrt_ell1 == d.ell1);
        // cross-check the r classification against naive factorization
        unsigned long long q = d.ell2;
        if (q == 1) {
            CHECK(d.r == 1);
        } else if (all_odd_prime_factors_1_mod_4(q)) {
            CHECK(d.r == 2);
            CHECK(d.a * d.a + d.b * d.b == static_cast<long long>(d.ell2));
        } else {
            CHECK(d.r == 4);
            CHECK(d.a * d.a + d.b * d.b + d.c * d.c + d.d * d.d ==
                  static_cast<long long>(d.ell2));
            CHECK((d.a * d.a + d.b * d.b) % static_cast<long long>(d.ell2) != 0);
        }
        // M^{-1} mod n really inverts M
        std::size_t r = static_cast<std::size_t>(d.r);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j) {
                long long s = 0;
                for (std::size_t k = 0; k < r; ++k) s += d.M[i][k] * d.M_inv_n[k][j];
                CHECK(((s - (i == j ? 1 : 0)) % n + n) % n == 0);
            }
    }
}

TEST_CASE("N counts the kernel of multiplication by sqrt(ell1)") {
    auto d45 = decompose(45, 2);
    CHECK(d45.ell1 == 9);
    CHECK(d45.ell2 == 5);
    CHECK(d45.r == 2);
    CHECK(d45.N_for_g(1) == 3);
    CHECK(d45.N_for_g(2) == 9);
    auto d9 = decompose(9, 2);
    CHECK(d9.N_for_g(1) == 3);
    auto d5 = decompose(5, 2);
    CHECK(d5.N_for_g(1) == 1);
}
