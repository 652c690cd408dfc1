#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "theta/poly.hpp"

using namespace theta;

namespace {
constexpr std::uint64_t P = 1009;

Poly rand_poly(std::mt19937_64& rng, int deg) {
    std::vector<Fp> c;
    for (int i = 0; i <= deg; ++i) c.emplace_back(rng() % P, P);
    return Poly(P, std::move(c));
}
}  // namespace

TEST_CASE("section 7 factorisation data") {
    // R(U) = U^5 + 751U^4 + 546U^3 + 447U^2 + 660U + 339 = (U + 268) Q(U)^2
    Poly R = Poly::from_coeffs(P, {339, 660, 447, 546, 751, 1});
    Poly Q = Poly::from_coeffs(P, {353, 746, 1});
    Poly L = Poly::from_coeffs(P, {268, 1});

    auto [q1, r1] = divmod(R, Q);
    CHECK(r1.is_zero());
    auto [q2, r2] = divmod(q1, Q);
    CHECK(r2.is_zero());
    CHECK(q2 == L);
    CHECK(R == L * Q * Q);

    // the linear factor vanishes at the theta coordinate of 0_A
    CHECK(Poly::from_coeffs(P, {268, 1}).eval(Fp(741, P)).is_zero());
    CHECK_FALSE(Q.eval(Fp(741, P)).is_zero());

    CHECK(squarefree_part(R) == (L * Q).monic());
}

TEST_CASE("divmod basics") {
    Poly Q = Poly::from_coeffs(P, {353, 746, 1});
    auto [q, r] = divmod(Q, Poly::unknown(P));
    CHECK(q == Poly::from_coeffs(P, {746, 1}));
    CHECK(r == Poly::from_coeffs(P, {353}));

    Poly f = Poly::from_coeffs(P, {1, 2, 3});
    auto [q2, r2] = divmod(f, Poly::one(P));
    CHECK(q2 == f);
    CHECK(r2.is_zero());

    CHECK_THROWS_AS(divmod(f, Poly::zero(P)), division_by_zero);
}

TEST_CASE("divmod round trip on random input") {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 100; ++t) {
        Poly f = rand_poly(rng, 1 + static_cast<int>(rng() % 40));
        Poly g = rand_poly(rng, 1 + static_cast<int>(rng() % 20));
        if (g.is_zero()) continue;
        auto [q, r] = divmod(f, g);
        CHECK(q * g + r == f);
        CHECK(r.degree() < g.degree());
    }
}

TEST_CASE("karatsuba agrees with schoolbook semantics") {
    std::mt19937_64 rng(2);
    for (int deg : {40, 67, 129}) {
        Poly f = rand_poly(rng, deg), g = rand_poly(rng, deg + 11);
        Poly prod = f * g;
        // check a few coefficients by direct convolution
        for (int k : {0, 5, deg, deg + 7, 2 * deg}) {
            Fp want(0, P);
            for (int i = 0; i <= k; ++i) want += f.coeff(static_cast<std::size_t>(i)) *
                                                  g.coeff(static_cast<std::size_t>(k - i));
            CHECK(prod.coeff(static_cast<std::size_t>(k)) == want);
        }
        // and evaluation homomorphism
        Fp x(rng() % P, P);
        CHECK(prod.eval(x) == f.eval(x) * g.eval(x));
    }
}

TEST_CASE("xgcd") {
    Poly f = Poly::from_coeffs(P, {3, 0, 7, 1});
    auto [d, u, v] = xgcd(f, Poly::zero(P));
    CHECK(d == f.monic());
    CHECK(u * f == d);

    auto [d2, u2, v2] = xgcd(Poly::from_coeffs(P, {353, 746, 1}), Poly::from_coeffs(P, {268, 1}));
    CHECK(d2 == Poly::one(P));

    auto [d3, u3, v3] = xgcd(f, f);
    CHECK(d3 == f.monic());

    CHECK_THROWS_AS(xgcd(Poly::zero(P), Poly::zero(P)), usage_error);

    std::mt19937_64 rng(3);
    for (int t = 0; t < 60; ++t) {
        Poly a = rand_poly(rng, static_cast<int>(rng() % 15));
        Poly b = rand_poly(rng, static_cast<int>(rng() % 15));
        if (a.is_zero() && b.is_zero()) continue;
        auto [d4, u4, v4] = xgcd(a, b);
        CHECK(u4 * a + v4 * b == d4);
        if (!d4.is_zero()) {
            CHECK((a % d4).is_zero());
            CHECK((b % d4).is_zero());
        }
    }
}

TEST_CASE("derivative") {
    CHECK(Poly::from_coeffs(P, {5}).derivative().is_zero());
    CHECK(Poly::from_coeffs(P, {353, 746, 1}).derivative() == Poly::from_coeffs(P, {746, 2}));
    // characteristic-p: d/dU U^p = 0
    PrimeField F13(13);
    std::vector<Fp> c(14, F13(0));
    c[13] = F13(1);
    CHECK(Poly(13, c).derivative().is_zero());

    std::mt19937_64 rng(4);
    for (int t = 0; t < 40; ++t) {
        Poly a = rand_poly(rng, static_cast<int>(rng() % 10));
        Poly b = rand_poly(rng, static_cast<int>(rng() % 10));
        CHECK((a * b).derivative() == a.derivative() * b + a * b.derivative());
        CHECK((a + b).derivative() == a.derivative() + b.derivative());
    }
}

TEST_CASE("evaluation") {
    Poly Q = Poly::from_coeffs(P, {353, 746, 1});
    CHECK(Q.eval(Fp(0, P)).value() == 353);
    CHECK(Poly::zero(P).eval(Fp(123, P)).is_zero());
}

TEST_CASE("interpolation and resultant") {
    std::mt19937_64 rng(5);
    std::vector<Fp> xs, ys;
    for (int i = 0; i < 6; ++i) {
        xs.emplace_back(100 + 37 * i, P);
        ys.emplace_back(rng() % P, P);
    }
    Poly f = interpolate(xs, ys);
    for (int i = 0; i < 6; ++i) CHECK(f.eval(xs[static_cast<std::size_t>(i)]) == ys[static_cast<std::size_t>(i)]);

    // resultant of split polynomials = product of pairwise root differences
    Poly a = Poly(P, {Fp(P - 2, P), Fp(1, P)}) * Poly(P, {Fp(P - 5, P), Fp(1, P)});
    Poly b = Poly(P, {Fp(P - 3, P), Fp(1, P)});
    // res(a, b) = a(3) = (3-2)(3-5) = -2
    CHECK(resultant(a, b) == Fp(P - 2, P));
}

TEST_CASE("reducer matches plain remainder") {
    std::mt19937_64 rng(6);
    for (int dq : {2, 7, 33, 120}) {
        Poly q = rand_poly(rng, dq - 1) + Poly(P, [&] {
                     std::vector<Fp> c(static_cast<std::size_t>(dq) + 1, Fp(0, P));
                     c.back() = Fp(1, P);
                     return c;
                 }());
        Reducer red(q);
        for (int t = 0; t < 12; ++t) {
            Poly f = rand_poly(rng, 2 * dq - 2);
            CHECK(red.reduce(f) == f % q);
        }
    }
}
