#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "errors.hpp"

namespace theta {

// Sum-of-squares data driving the Koizumi product: ell = ell1 * ell2 with
// ell1 the biggest square factor, an r x r integer matrix M with tM M = ell,
// and the kernel-of-F parametrization constants.
struct SquareDecomposition {
    unsigned long long ell = 0;
    unsigned long long ell1 = 1;
    unsigned long long ell2 = 1;
    unsigned long long sqrt_ell1 = 1;
    int r = 1;
    int t = 1;
    long long a = 0, b = 0, c = 0, d = 0;
    std::vector<std::vector<long long>> M;
    std::vector<std::vector<long long>> M_inv_n;
    unsigned long long beta0 = 0;  // r = 2: -b/a mod ell (when a is invertible)
    bool beta0_valid = false;
    unsigned long long alpha = 0, beta = 0, gamma = 0, delta = 0;  // r = 4, mod ell

    // #ker of x -> sqrt(ell1) x on K^t, with K = (Z/ell)^g
    unsigned long long N_for_g(int g) const {
        unsigned long long n = 1;
        for (int i = 0; i < t * g; ++i) n *= sqrt_ell1;
        return n;
    }
};

namespace detail {

inline std::vector<std::pair<unsigned long long, int>> factorize(unsigned long long n) {
    std::vector<std::pair<unsigned long long, int>> f;
    for (unsigned long long p = 2; p * p <= n; ++p) {
        if (n % p) continue;
        int e = 0;
        while (n % p == 0) { n /= p; ++e; }
        f.emplace_back(p, e);
    }
    if (n > 1) f.emplace_back(n, 1);
    return f;
}

inline unsigned long long isqrt_ull(unsigned long long n) {
    unsigned long long r = static_cast<unsigned long long>(std::sqrt(static_cast<double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

inline long long mulmod_ll(long long a, long long b, long long m) {
    __int128 x = static_cast<__int128>(((a % m) + m) % m) * (((b % m) + m) % m);
    return static_cast<long long>(x % m);
}

inline long long inv_mod(long long a, long long m) {
    long long t = 0, newt = 1, r = m, newr = ((a % m) + m) % m;
    while (newr != 0) {
        long long q = r / newr;
        long long tmp = t - q * newt; t = newt; newt = tmp;
        tmp = r - q * newr; r = newr; newr = tmp;
    }
    if (r != 1) throw usage_error("inverse does not exist");
    return ((t % m) + m) % m;
}

// quaternion left-multiplication matrix of a + bi + cj + dk
inline std::vector<std::vector<long long>> quaternion_matrix(long long a, long long b,
                                                             long long c, long long d) {
    return {{a, -b, -c, -d},
            {b, a, -d, c},
            {c, d, a, -b},
            {d, -c, b, a}};
}

}  // namespace detail

// force_r = 0 picks the natural case; 1/2/4 force that shape (with
// ell1 = 1 for forced r in {2, 4}).
inline SquareDecomposition decompose(unsigned long long ell, int n, int force_r = 0) {
    if (ell < 3 || ell % 2 == 0) throw usage_error("ell must be odd and >= 3");
    if (std::__gcd(ell, static_cast<unsigned long long>(n)) != 1)
        throw usage_error("ell must be coprime to the level n");

    SquareDecomposition dec;
    dec.ell = ell;

    auto fac = detail::factorize(ell);
    unsigned long long ell1 = 1, ell2 = 1;
    bool all_one_mod4 = true;
    for (auto [p, e] : fac) {
        for (int i = 0; i + 1 < e; i += 2) ell1 *= p * p;
        if (e % 2) {
            ell2 *= p;
            if (p % 4 != 1) all_one_mod4 = false;
        }
    }

    int r;
    if (force_r == 1) {
        if (ell2 != 1) throw usage_error("cannot force r=1: ell is not a perfect square");
        r = 1;
    } else if (force_r == 2) {
        r = 2;
        ell1 = 1;
        ell2 = ell;
    } else if (force_r == 4) {
        r = 4;
        ell1 = 1;
        ell2 = ell;
    } else if (force_r != 0) {
        throw usage_error("force_r must be one of 1, 2, 4");
    } else {
        r = ell2 == 1 ? 1 : (all_one_mod4 ? 2 : 4);
    }

    dec.ell1 = ell1;
    dec.ell2 = ell2;
    dec.sqrt_ell1 = detail::isqrt_ull(ell1);
    dec.r = r;
    dec.t = std::max(1, r / 2);
    long long s1 = static_cast<long long>(dec.sqrt_ell1);

    if (r == 1) {
        dec.M = {{s1}};
    } else if (r == 2) {
        // smallest-a two-square decomposition, preferring gcd(a, ell) = 1 so
        // that beta0 = -b/a exists mod ell
        bool found = false;
        for (int pass = 0; pass < 2 && !found; ++pass) {
            for (unsigned long long a = 1; a * a * 2 <= ell2 && !found; ++a) {
                unsigned long long bb = ell2 - a * a;
                unsigned long long b = detail::isqrt_ull(bb);
                if (b * b != bb || b == 0) continue;
                if (pass == 0 && std::__gcd(a, ell) != 1) continue;
                dec.a = static_cast<long long>(a);
                dec.b = static_cast<long long>(b);
                found = true;
            }
        }
        if (!found) throw usage_error("ell2 is not a sum of two positive squares");
        dec.M = {{s1 * dec.a, s1 * dec.b}, {-s1 * dec.b, s1 * dec.a}};
        long long l = static_cast<long long>(ell);
        if (std::__gcd(static_cast<unsigned long long>(dec.a), ell) == 1) {
            dec.beta0 = static_cast<unsigned long long>(
                detail::mulmod_ll(-dec.b, detail::inv_mod(dec.a, l), l));
            dec.beta0_valid = true;
        }
    } else {
        // descending-sorted four-square decompositions in lexicographic order
        std::vector<std::array<long long, 4>> sorted_reps;
        long long m = static_cast<long long>(ell2);
        for (long long a = 0; a * a <= m; ++a)
            for (long long b = 0; b <= a && a * a + b * b <= m; ++b)
                for (long long c = 0; c <= b && a * a + b * b + c * c <= m; ++c) {
                    long long dd = m - a * a - b * b - c * c;
                    long long d = detail::isqrt_ull(static_cast<unsigned long long>(dd));
                    if (d * d != dd || d > c) continue;
                    sorted_reps.push_back({a, b, c, d});
                }
        std::sort(sorted_reps.begin(), sorted_reps.end());
        // permutations tried to make a^2+b^2 invertible: identity, then swaps
        const std::array<std::array<int, 4>, 6> perms = {{{0, 1, 2, 3},
                                                          {2, 1, 0, 3},
                                                          {3, 1, 2, 0},
                                                          {0, 2, 1, 3},
                                                          {0, 3, 2, 1},
                                                          {2, 3, 0, 1}}};
        bool found = false;
        for (int pass = 0; pass < 2 && !found; ++pass) {
            for (const auto& rep : sorted_reps) {
                for (const auto& pm : perms) {
                    long long a = rep[static_cast<std::size_t>(pm[0])];
                    long long b = rep[static_cast<std::size_t>(pm[1])];
                    long long c = rep[static_cast<std::size_t>(pm[2])];
                    long long d = rep[static_cast<std::size_t>(pm[3])];
                    long long s = a * a + b * b;
                    bool ok = pass == 0 ? std::__gcd(static_cast<unsigned long long>(s), ell) == 1
                                        : s % static_cast<long long>(ell2) != 0;
                    if (!ok) continue;
                    dec.a = a; dec.b = b; dec.c = c; dec.d = d;
                    found = true;
                    break;
                }
                if (found) break;
            }
        }
        if (!found) throw usage_error("no usable four-square decomposition");
        dec.M = detail::quaternion_matrix(dec.a, dec.b, dec.c, dec.d);
        for (auto& row : dec.M)
            for (auto& x : row) x *= s1;
        long long l = static_cast<long long>(ell);
        long long s = (dec.a * dec.a + dec.b * dec.b) % l;
        long long sinv = detail::inv_mod(s, l);
        dec.alpha = static_cast<unsigned long long>(
            detail::mulmod_ll(dec.a * dec.c - dec.d * dec.b, sinv, l));
        dec.beta = static_cast<unsigned long long>(
            detail::mulmod_ll(dec.a * dec.d + dec.b * dec.c, sinv, l));
        dec.gamma = dec.beta;
        dec.delta = static_cast<unsigned long long>(
            detail::mulmod_ll(dec.b * dec.d - dec.a * dec.c, sinv, l));
    }

    // M^{-1} mod n = ell^{-1} tM mod n
    long long ellinv_n = detail::inv_mod(static_cast<long long>(ell % static_cast<unsigned long long>(n)), n);
    dec.M_inv_n.assign(static_cast<std::size_t>(r), std::vector<long long>(static_cast<std::size_t>(r), 0));
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            long long v = dec.M[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] % n;
            v = ((v * ellinv_n) % n + n) % n;
            dec.M_inv_n[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v;
        }
    return dec;
}

}  // namespace theta
